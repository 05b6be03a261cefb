#include "dual_tableau.hpp"

namespace capsel {

namespace {

LpSolution cold(const LinearProgram& lp, const std::vector<double>& lower, const std::vector<double>& upper,
                LpBasis& basis) {
    LinearProgram copy = lp;
    copy.lower = lower;
    copy.upper = upper;
    basis = {};
    return solve_lp(copy);
}

}  // namespace

LpSolution solve_lp_warm(const LinearProgram& lp, const std::vector<double>& lower, const std::vector<double>& upper,
                         LpBasis& basis) {
    const std::size_t n = lp.num_variables();
    const std::size_t m = lp.rows.size();
    if (lower.size() != n || upper.size() != n || lp.rhs.size() != m) {
        throw ValidationError("dimension", "linear program dimensions do not match");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(lower[j] <= upper[j]) || !std::isfinite(lower[j])) return cold(lp, lower, upper, basis);
    }
    if (basis.basic.size() != m || basis.at_upper.size() != n + m) {
        basis.basic.resize(m);
        for (std::size_t r = 0; r < m; ++r) basis.basic[r] = n + r;
        basis.at_upper.assign(n + m, false);
    }

    detail::DualTableau tab(lp, lower, upper);
    if (!tab.factor(basis) || !tab.make_dual_feasible()) return cold(lp, lower, upper, basis);
    return detail::finish_warm(tab, lp, lower, upper, basis);
}

LpSolution detail::finish_warm(DualTableau& tab, const LinearProgram& lp, const std::vector<double>& lower,
                               const std::vector<double>& upper, LpBasis& basis) {
    const std::size_t n = lp.num_variables();
    LpSolution out;
    out.values.assign(n, 0.0);
    if (!tab.run(out.iterations)) {
        basis = tab.basis();
        return out;
    }
    if (!tab.dual_feasible()) return cold(lp, lower, upper, basis);

    out.status = SolveStatus::optimal;
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = std::min(std::max(tab.value(j), lower[j]), upper[j]);
        out.objective += lp.objective[j] * out.values[j];
    }
    basis = tab.basis();
    return out;
}

}  // namespace capsel
