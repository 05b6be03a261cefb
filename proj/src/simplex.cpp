#include <cmath>
#include <limits>
#include <string>

#include "capsel/milp.hpp"

namespace capsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;
constexpr double kPhaseOneTol = 1e-8;
constexpr std::size_t kIterationLimit = 200'000;

/// Dense bounded-variable tableau. Nonbasic variables sit at 0 or at their
/// upper bound; basic values are tracked in `x_basic`.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0), x_basic_(rows, 0.0), basis_(rows, 0),
          upper_(cols, kInf), at_upper_(cols, false), basic_row_(cols, -1), reduced_(cols, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    void set_basic(std::size_t r, std::size_t col, double value) {
        basis_[r] = col;
        basic_row_[col] = static_cast<long>(r);
        x_basic_[r] = value;
    }

    void set_upper(std::size_t col, double u) { upper_[col] = u; }

    /// Primal simplex with Bland's rule. Returns false on unboundedness.
    bool optimise(const std::vector<double>& cost, std::size_t& iterations) {
        price(cost);
        for (;;) {
            if (++iterations > kIterationLimit) {
                throw ResourceLimitError("simplex iteration limit reached");
            }
            const long enter = choose_entering();
            if (enter < 0) return true;
            const auto e = static_cast<std::size_t>(enter);
            const double dir = at_upper_[e] ? -1.0 : 1.0;

            double step = upper_[e];
            long leave_row = -1;
            std::size_t leave_var = e;
            for (std::size_t r = 0; r < rows_; ++r) {
                const double rate = -dir * at(r, e);
                double t;
                if (rate < -kPivotTol) {
                    t = x_basic_[r] / -rate;
                } else if (rate > kPivotTol && std::isfinite(upper_[basis_[r]])) {
                    t = (upper_[basis_[r]] - x_basic_[r]) / rate;
                } else {
                    continue;
                }
                t = std::max(t, 0.0);
                if (t < step - kRatioTieTol || (t <= step + kRatioTieTol && basis_[r] < leave_var)) {
                    step = std::min(t, step);
                    leave_row = static_cast<long>(r);
                    leave_var = basis_[r];
                }
            }
            if (!std::isfinite(step)) return false;

            for (std::size_t r = 0; r < rows_; ++r) x_basic_[r] += -dir * at(r, e) * step;
            if (leave_row < 0) {
                at_upper_[e] = !at_upper_[e];
                continue;
            }
            const auto lr = static_cast<std::size_t>(leave_row);
            const double leave_rate = -dir * at(lr, e);
            const std::size_t old = basis_[lr];
            basic_row_[old] = -1;
            at_upper_[old] = leave_rate > 0.0;
            const double entering_value = dir > 0.0 ? step : upper_[e] - step;
            pivot(lr, e);
            at_upper_[e] = false;
            set_basic(lr, e, entering_value);
        }
    }

    [[nodiscard]] double value(std::size_t col) const {
        if (basic_row_[col] >= 0) return x_basic_[static_cast<std::size_t>(basic_row_[col])];
        return at_upper_[col] ? upper_[col] : 0.0;
    }

private:
    void price(const std::vector<double>& cost) {
        for (std::size_t c = 0; c < cols_; ++c) {
            double d = cost[c];
            for (std::size_t r = 0; r < rows_; ++r) d -= cost[basis_[r]] * at(r, c);
            reduced_[c] = d;
        }
    }

    [[nodiscard]] long choose_entering() const {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (basic_row_[c] >= 0 || upper_[c] <= 0.0) continue;
            if (!at_upper_[c] && reduced_[c] < -kCostTol) return static_cast<long>(c);
            if (at_upper_[c] && reduced_[c] > kCostTol) return static_cast<long>(c);
        }
        return -1;
    }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        double* prow = &a_[pr * cols_];
        for (std::size_t c = 0; c < cols_; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            double* row = &a_[r * cols_];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        const double f = reduced_[pc];
        if (f != 0.0) {
            for (std::size_t c = 0; c < cols_; ++c) reduced_[c] -= f * prow[c];
            reduced_[pc] = 0.0;
        }
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
    std::vector<double> x_basic_;
    std::vector<std::size_t> basis_;
    std::vector<double> upper_;
    std::vector<bool> at_upper_;
    std::vector<long> basic_row_;
    std::vector<double> reduced_;
};

}  // namespace

const char* to_string(SolveStatus status) {
    return status == SolveStatus::optimal ? "optimal" : "infeasible";
}

LpSolution solve_lp(const LinearProgram& lp) {
    const std::size_t n = lp.num_variables();
    if (lp.rows.size() != lp.rhs.size() || lp.lower.size() != n || lp.upper.size() != n) {
        throw ValidationError("dimension", "linear program dimensions do not match");
    }
    for (const auto& row : lp.rows) {
        if (row.size() != n) throw ValidationError("dimension", "constraint row width does not match variable count");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(lp.lower[j] <= lp.upper[j]) || !std::isfinite(lp.lower[j])) {
            throw ValidationError("bounds", "variable " + std::to_string(j) + " has inconsistent bounds");
        }
    }

    LpSolution out;
    out.values.assign(n, 0.0);

    // Shift to y = x - lower, scale each row to unit magnitude, and drop rows
    // that are trivially satisfied.
    struct ScaledRow {
        std::vector<double> coef;
        double rhs;
    };
    std::vector<ScaledRow> active;
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        const auto& row = lp.rows[r];
        double rhs = lp.rhs[r];
        double scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            rhs -= row[j] * lp.lower[j];
            scale = std::max(scale, std::abs(row[j]));
        }
        if (scale == 0.0) {
            if (rhs > 0.0) return out;  // 0 >= positive: infeasible
            continue;
        }
        scale = std::max(scale, std::abs(rhs));
        ScaledRow s{std::vector<double>(n), rhs / scale};
        for (std::size_t j = 0; j < n; ++j) s.coef[j] = row[j] / scale;
        active.push_back(std::move(s));
    }

    const std::size_t m = active.size();
    std::size_t artificials = 0;
    for (const auto& r : active) artificials += r.rhs > 0.0 ? 1 : 0;
    const std::size_t cols = n + m + artificials;

    Tableau tab(m, cols);
    for (std::size_t j = 0; j < n; ++j) tab.set_upper(j, lp.upper[j] - lp.lower[j]);
    std::size_t next_art = n + m;
    std::vector<std::size_t> art_cols;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = active[r];
        if (row.rhs > 0.0) {
            for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = row.coef[j];
            tab.at(r, n + r) = -1.0;
            tab.at(r, next_art) = 1.0;
            tab.set_basic(r, next_art, row.rhs);
            art_cols.push_back(next_art++);
        } else {
            for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = -row.coef[j];
            tab.at(r, n + r) = 1.0;
            tab.set_basic(r, n + r, -row.rhs);
        }
    }

    if (!art_cols.empty()) {
        std::vector<double> phase_one(cols, 0.0);
        for (auto c : art_cols) phase_one[c] = 1.0;
        tab.optimise(phase_one, out.iterations);
        double residual = 0.0;
        for (auto c : art_cols) residual += tab.value(c);
        if (residual > kPhaseOneTol) return out;
        for (auto c : art_cols) tab.set_upper(c, 0.0);
    }

    std::vector<double> cost(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
    if (!tab.optimise(cost, out.iterations)) {
        throw Error(ErrorKind::validation, "linear program is unbounded");
    }

    out.status = SolveStatus::optimal;
    out.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double v = lp.lower[j] + tab.value(j);
        v = std::min(std::max(v, lp.lower[j]), lp.upper[j]);
        out.values[j] = v;
        out.objective += lp.objective[j] * v;
    }
    return out;
}

}  // namespace capsel
