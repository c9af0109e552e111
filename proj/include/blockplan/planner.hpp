#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blockplan/model.hpp"
#include "blockplan/stability.hpp"

// Bounded-makespan search over truly concurrent joint actions. Iterative
// deepening over the horizon gives minimal-makespan plans; within a horizon
// a depth-first walk with duplicate-state pruning keyed on the canonical
// state form guarantees exhaustiveness. Stability is checked only on the
// state after a whole joint action, never between the actions of one step.

namespace blockplan {

// Result of asking whether a block (with everything resting on it) can be
// picked as one rigid assembly.
struct Pickable {
    std::set<Sym> blocks;  // the assembly S(b); valid iff reason is empty
    std::string reason;    // non-empty means NotPickable

    bool ok() const { return reason.empty(); }
};

Pickable pickable_set(const ProblemInstance& inst, const WorldState& state, const Sym& b);

// All conflict-free combinations of per-gripper actions (each gripper may
// also idle). Includes the empty joint action. Deterministically ordered.
std::vector<JointAction> enumerate_joint_actions(const ProblemInstance& inst,
                                                 const WorldState& state);

// Verdict caches shared across apply() calls. Keys are canonical
// serializations of the anchored configuration / the assembly shape, so
// repeated encounters of the same geometry skip the LP.
struct StabilityCache {
    std::map<std::string, StabilityVerdict> anchored;
    std::map<std::string, StabilityVerdict> held;
};

struct ApplyResult {
    std::optional<WorldState> state;  // set iff accepted
    std::string rejected;             // "unstable" | "held unstable" | "ordering"

    bool ok() const { return state.has_value(); }
};

// Simultaneous application of a joint action enumerated on `state`.
// Callers passing arbitrary joint actions get a ValidationError for
// malformed input rather than a rejection.
ApplyResult apply(const ProblemInstance& inst, const WorldState& state, const JointAction& ja,
                  StabilityCache* cache = nullptr);

// True iff every goal conjunct holds and no gripper is loaded. Goal states
// must be free-standing structures, so a held block always fails.
bool check_goal(const ProblemInstance& inst, const WorldState& state);

struct SearchStats {
    long nodes_expanded = 0;
    long stability_rejections = 0;
    long duplicates = 0;
    int horizons_tried = 0;
};

struct SearchLimits {
    long max_nodes = 20'000'000;
    long max_millis = 0;  // 0 = no time cap
    std::optional<int> makespan;  // overrides the instance bound
};

struct SearchResult {
    enum class Outcome { FoundPlan, Unsat, ResourceLimit };
    Outcome outcome = Outcome::Unsat;
    Plan plan;             // FoundPlan only
    int unsat_makespan = 0;  // Unsat only: the exhausted bound
    std::string limit;     // ResourceLimit only: "nodes" or "time"
    SearchStats stats;
};

// Minimal-makespan plan within the bound, Unsat(T) after exhausting it, or
// ResourceLimit when a cap is hit before either conclusion.
SearchResult plan(const ProblemInstance& inst, const SearchLimits& limits = {});

struct EnumerationResult {
    std::set<Plan> plans;  // every valid plan of makespan <= T
    bool complete = false;  // false iff a cap ended the walk early
    SearchStats stats;
};

// Exhaustive plan enumeration for tiny instances. A plan here is any
// sequence of valid joint actions (empty steps allowed) whose final state
// satisfies the goal; counts are modulo the canonical leftmost placement
// anchor.
EnumerationResult enumerate_plans(const ProblemInstance& inst, const SearchLimits& limits = {});

}  // namespace blockplan
