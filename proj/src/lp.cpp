#include "blockplan/lp.hpp"

#include <stdexcept>

namespace blockplan {

// Dense tableau phase-I simplex with Bland's rule. Row/column counts here
// are tiny (tens), so clarity wins over sparsity.
FeasibilityResult solve_feasibility(const LinearProgram& lp, const Rat& slack) {
    const int m = (int)lp.rows.size();
    int n = lp.num_vars;

    // column layout: [ structural | slacks for <= rows | artificials ]
    std::vector<int> slack_col(m, -1), art_col(m, -1);
    for (int i = 0; i < m; ++i)
        if (!lp.rows[i].equality) slack_col[i] = n++;
    int first_art = n;
    for (int i = 0; i < m; ++i) art_col[i] = n++;

    // tableau[i] = row coefficients, tableau[i][n] = rhs
    std::vector<std::vector<Rat>> tab(m, std::vector<Rat>(n + 1, Rat(0)));
    for (int i = 0; i < m; ++i) {
        const auto& row = lp.rows[i];
        for (const auto& [j, c] : row.terms) tab[i][j] += c;
        if (slack_col[i] >= 0) tab[i][slack_col[i]] = 1;
        tab[i][n] = row.rhs;
        if (tab[i][n] < 0)
            for (auto& c : tab[i]) c = -c;
        tab[i][art_col[i]] = 1;
    }

    // start from the all-artificial basis; inequality slacks enter on their
    // own through pivoting if useful
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = art_col[i];

    // reduced costs for min sum(artificials): z_j - c_j computed against the
    // artificial basis; maintain objective row incrementally
    std::vector<Rat> obj(n + 1, Rat(0));
    for (int j = 0; j <= n; ++j) {
        Rat s(0);
        for (int i = 0; i < m; ++i) s += tab[i][j];
        obj[j] = s; // z_j with unit cost on every artificial
    }
    for (int j = first_art; j < n; ++j) obj[j] -= 1;

    long iterations = 0;
    const long max_iterations = 2000L * (m + n + 1);
    while (true) {
        if (++iterations > max_iterations)
            throw std::runtime_error("simplex iteration limit exceeded");

        // Bland: smallest improving column; artificials never re-enter
        int enter = -1;
        for (int j = 0; j < first_art; ++j)
            if (obj[j] > 0) { enter = j; break; }
        if (enter < 0) break;

        int leave = -1;
        Rat best;
        for (int i = 0; i < m; ++i) {
            if (tab[i][enter] <= 0) continue;
            Rat ratio = tab[i][n] / tab[i][enter];
            if (leave < 0 || ratio < best ||
                (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break; // unbounded improvement cannot happen in phase I

        // pivot
        Rat piv = tab[leave][enter];
        for (int j = 0; j <= n; ++j) tab[leave][j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            Rat f = tab[i][enter];
            if (f == 0) continue;
            for (int j = 0; j <= n; ++j) tab[i][j] -= f * tab[leave][j];
        }
        Rat fo = obj[enter];
        if (fo != 0)
            for (int j = 0; j <= n; ++j) obj[j] -= fo * tab[leave][j];
        basis[leave] = enter;
    }

    FeasibilityResult res;
    res.infeasibility = 0;
    res.solution.assign(lp.num_vars, Rat(0));
    res.row_residual.assign(m, Rat(0));
    for (int i = 0; i < m; ++i) {
        if (basis[i] < lp.num_vars) res.solution[basis[i]] = tab[i][n];
        if (basis[i] >= first_art) {
            res.infeasibility += tab[i][n];
            res.row_residual[basis[i] - first_art] = tab[i][n];
        }
    }
    res.feasible = res.infeasibility <= slack;
    return res;
}

} // namespace blockplan
