#pragma once

#include <string>
#include <vector>

#include "blockplan/model.hpp"

// Independent plan re-verification. The validator replays a plan with its
// own precondition, concurrency, effect and goal code, derives relations
// through the literal-rule fixpoint oracle (never the grid shortcut), and
// re-runs the stability checks on every visited state. All violations are
// collected; invalid actions are skipped so the replay can continue.

namespace blockplan {

struct Violation {
    enum class Category {
        Precondition,
        Concurrency,
        Circularity,
        Stability,
        HeldStability,
        Goal,
        Format,
    };

    int step = -1;  // 0-based plan step; -1 for plan-level or final-state issues
    Category category = Category::Format;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

std::string to_string(Violation::Category c);

// Empty result means Ok.
std::vector<Violation> validate_plan(const ProblemInstance& inst, const Plan& plan);

}  // namespace blockplan
