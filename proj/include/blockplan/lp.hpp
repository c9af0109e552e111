#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

// Small dense phase-I simplex over exact rationals. Decides feasibility of
//   { x >= 0 : A_eq x = b_eq, A_le x <= b_le }
// by minimizing the total artificial infeasibility; the minimum is reported
// so callers can treat "feasible within slack" as feasible. Exact arithmetic
// keeps verdicts deterministic and lets marginal equilibria sit exactly on
// the boundary.

namespace blockplan {

using Rat = boost::multiprecision::cpp_rational;

struct LinearProgram {
    struct Row {
        std::vector<std::pair<int, Rat>> terms; // (variable index, coefficient)
        Rat rhs;
        bool equality = true;
    };
    int num_vars = 0;
    std::vector<Row> rows;

    int add_var() { return num_vars++; }
    void add_row(Row r) { rows.push_back(std::move(r)); }
};

struct FeasibilityResult {
    bool feasible = false;     // infeasibility <= slack
    Rat infeasibility;         // phase-I optimum
    std::vector<Rat> solution; // values of the original variables
    // per-equality-row residual absorbed by its artificial variable
    std::vector<Rat> row_residual;
};

FeasibilityResult solve_feasibility(const LinearProgram& lp, const Rat& slack);

} // namespace blockplan
