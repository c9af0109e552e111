#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "blockplan/model.hpp"

// Derived spatial relations over a world state.
//
//   on(b, l, u, v)   unit v of block b rests on unit u of location l
//                    (for surfaces, u is the global column)
//   above(h, b, v, x) unit v of anchored block b is at column x, h = level+1
//   supported(b, l)  b rests transitively on l
//   connected        symmetric-transitive closure of vertical support,
//                    over blocks and surfaces
//
// Two independent routes compute them: derive_* reads the occupancy grid;
// fixpoint_oracle iterates the defining rules from anchor atoms only and is
// used by the validator and as a cross-check.

namespace blockplan {

struct CircularityError : std::runtime_error {
    Sym block;
    explicit CircularityError(const Sym& block_)
        : std::runtime_error("circular support involving '" + block_ + "'"), block(block_) {}
};

struct NonTerminationError : std::runtime_error {
    NonTerminationError() : std::runtime_error("rule iteration exceeded its bound") {}
};

struct OnAtom {
    Sym b;
    Sym l;
    int u = 0;
    int v = 0;
    auto operator<=>(const OnAtom&) const = default;
};

struct AboveAtom {
    int h = 0;
    Sym b;
    int v = 0;
    int x = 0;
    auto operator<=>(const AboveAtom&) const = default;
};

enum class Side { Left, Right };

struct DerivedRelations {
    std::set<OnAtom> on;                      // anchored plus held-internal atoms
    std::set<AboveAtom> above;                // anchored blocks only
    std::set<std::pair<Sym, Sym>> supported;  // transitive, includes surfaces as l
    std::set<std::pair<Sym, Sym>> connected;  // symmetric, distinct pairs
    std::map<Sym, std::set<Side>> side;       // per bridge goal groups
};

// Grid route ------------------------------------------------------------

std::set<OnAtom> derive_on(const ProblemInstance& inst, const WorldState& state);
std::set<AboveAtom> compute_above(const ProblemInstance& inst, const WorldState& state);

// Least fixpoint of: supported(b,l) <- on(b,l); supported(b,l) <- on(b,l'),
// supported(l',l), b != l'. Throws CircularityError if supported(b,b) is
// ever derived.
std::set<std::pair<Sym, Sym>> supported_closure(const std::set<std::pair<Sym, Sym>>& on_aux);

std::set<std::pair<Sym, Sym>> project_on_aux(const std::set<OnAtom>& on);

struct Components {
    std::map<Sym, int> component;             // node -> component id
    std::set<std::pair<Sym, Sym>> connected;  // all distinct symmetric pairs
    std::map<Sym, std::set<Side>> side;
};

// Union of vertical-support edges among anchored blocks and surfaces.
// left/right groups label sides for bridge goals; pass empty groups when no
// bridge goal exists.
Components connected_components(const ProblemInstance& inst, const WorldState& state,
                                const std::vector<Sym>& left_group,
                                const std::vector<Sym>& right_group);

// Number of contiguous columns immediately beyond the surface's edge that
// are covered (at any level) by blocks connected to that surface.
int overhang_extent(const ProblemInstance& inst, const WorldState& state,
                    const Sym& surface, GoalAtom::Edge edge);

DerivedRelations derive_relations(const ProblemInstance& inst, const WorldState& state,
                                  const std::vector<Sym>& left_group = {},
                                  const std::vector<Sym>& right_group = {});

// Rule route ------------------------------------------------------------

struct OracleRelations {
    std::set<OnAtom> on;
    std::set<AboveAtom> above;
    std::set<std::pair<Sym, Sym>> supported;
};

// Naive iteration of the defining rules to a fixpoint, seeded only with
// each anchored block's stored anchor atom (held assemblies are evaluated
// in their local frame with the root as ground; their above scaffolding is
// not emitted). Guarded against runaway iteration.
OracleRelations fixpoint_oracle(const ProblemInstance& inst, const WorldState& state);

} // namespace blockplan
