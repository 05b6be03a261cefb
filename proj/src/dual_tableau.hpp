#pragma once

// Dense bounded dual simplex used for warm-started relaxations. Internal to
// the library.

#include <cmath>
#include <limits>
#include <vector>

#include "capsel/milp.hpp"

namespace capsel::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPivotTol = 1e-9;
inline constexpr double kDualTol = 1e-9;
inline constexpr double kRatioTieTol = 1e-12;
inline constexpr std::size_t kIterationLimit = 200'000;

inline double feas_tol(double bound) { return 1e-9 * std::max(1.0, std::abs(bound)); }

/// Rows of [A | -I] with each row scaled to unit magnitude, reduced against
/// the current basis.
class DualTableau {
public:
    DualTableau(const LinearProgram& lp, const std::vector<double>& lower, const std::vector<double>& upper)
        : m_(lp.rows.size()), n_(lp.num_variables()), cols_(n_ + m_), t_(m_ * cols_, 0.0), beta_(m_, 0.0),
          lower_(cols_, 0.0), upper_(cols_, kInf), cost_(cols_, 0.0), d_(cols_, 0.0), x_(m_, 0.0), basic_(m_, 0),
          row_of_(cols_, -1), at_upper_(cols_, 0) {
        for (std::size_t r = 0; r < m_; ++r) {
            double scale = std::abs(lp.rhs[r]);
            for (std::size_t j = 0; j < n_; ++j) scale = std::max(scale, std::abs(lp.rows[r][j]));
            if (scale == 0.0) scale = 1.0;
            for (std::size_t j = 0; j < n_; ++j) at(r, j) = lp.rows[r][j] / scale;
            at(r, n_ + r) = -1.0;
            beta_[r] = lp.rhs[r] / scale;
        }
        for (std::size_t j = 0; j < n_; ++j) {
            lower_[j] = lower[j];
            upper_[j] = upper[j];
            cost_[j] = lp.objective[j];
        }
    }

    /// Reduces to the given basis with partial pivoting. False when singular.
    bool factor(const LpBasis& basis) {
        std::vector<bool> assigned(m_, false);
        for (std::size_t k = 0; k < m_; ++k) {
            const std::size_t col = basis.basic[k];
            long best = -1;
            double mag = kPivotTol;
            for (std::size_t r = 0; r < m_; ++r) {
                if (!assigned[r] && std::abs(at(r, col)) > mag) {
                    mag = std::abs(at(r, col));
                    best = static_cast<long>(r);
                }
            }
            if (best < 0) return false;
            const auto r = static_cast<std::size_t>(best);
            assigned[r] = true;
            eliminate(r, col);
            basic_[r] = col;
            row_of_[col] = static_cast<long>(r);
        }
        for (std::size_t j = 0; j < cols_; ++j) at_upper_[j] = row_of_[j] < 0 && basis.at_upper[j] ? 1 : 0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (at_upper_[j] && !std::isfinite(upper_[j])) return false;
        }
        price();
        return true;
    }

    /// Nonbasic columns must sit on the side their reduced cost allows. A
    /// boxed column can be flipped; an unbounded one cannot.
    bool make_dual_feasible() {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (row_of_[j] >= 0 || lower_[j] == upper_[j]) continue;
            if (!at_upper_[j] && d_[j] < -kDualTol) {
                if (!std::isfinite(upper_[j])) return false;
                at_upper_[j] = 1;
            } else if (at_upper_[j] && d_[j] > kDualTol) {
                at_upper_[j] = 0;
            }
        }
        return true;
    }

    /// Returns false when the program is infeasible.
    bool run(std::size_t& iterations) {
        for (;;) {
            values();
            long leave = -1;
            for (std::size_t r = 0; r < m_; ++r) {
                const std::size_t b = basic_[r];
                const bool out = x_[r] < lower_[b] - feas_tol(lower_[b]) || x_[r] > upper_[b] + feas_tol(upper_[b]);
                if (out && (leave < 0 || b < basic_[static_cast<std::size_t>(leave)])) leave = static_cast<long>(r);
            }
            if (leave < 0) return true;
            if (++iterations > kIterationLimit) throw ResourceLimitError("simplex iteration limit reached");

            const auto r = static_cast<std::size_t>(leave);
            const std::size_t b = basic_[r];
            const bool below = x_[r] < lower_[b];
            long enter = -1;
            double best = kInf;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (row_of_[j] >= 0 || lower_[j] == upper_[j]) continue;
                const double alpha = at(r, j);
                // Raising a column at its lower bound moves x_B[r] by -alpha.
                const bool helps = below ? (at_upper_[j] ? alpha > kPivotTol : alpha < -kPivotTol)
                                         : (at_upper_[j] ? alpha < -kPivotTol : alpha > kPivotTol);
                if (!helps) continue;
                const double ratio = std::abs(d_[j]) / std::abs(alpha);
                if (ratio < best - kRatioTieTol) {
                    best = ratio;
                    enter = static_cast<long>(j);
                }
            }
            if (enter < 0) return false;

            const auto q = static_cast<std::size_t>(enter);
            row_of_[b] = -1;
            at_upper_[b] = below ? 0 : 1;
            eliminate(r, q);
            at_upper_[q] = 0;
            basic_[r] = q;
            row_of_[q] = static_cast<long>(r);
        }
    }

    [[nodiscard]] bool dual_feasible() const {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (row_of_[j] >= 0 || lower_[j] == upper_[j]) continue;
            if (!at_upper_[j] && d_[j] < -1e-7) return false;
            if (at_upper_[j] && d_[j] > 1e-7) return false;
        }
        return true;
    }

    [[nodiscard]] double value(std::size_t j) const {
        if (row_of_[j] >= 0) return x_[static_cast<std::size_t>(row_of_[j])];
        return at_upper_[j] ? upper_[j] : lower_[j];
    }

    [[nodiscard]] LpBasis basis() const { return {basic_, std::vector<bool>(at_upper_.begin(), at_upper_.end())}; }

    /// New bounds for a structural column; the basis stays dual feasible.
    void set_bounds(std::size_t j, double lower, double upper) {
        lower_[j] = lower;
        upper_[j] = upper;
    }

private:
    double& at(std::size_t r, std::size_t c) { return t_[r * cols_ + c]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return t_[r * cols_ + c]; }

    void eliminate(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        double* prow = &t_[pr * cols_];
        for (std::size_t c = 0; c < cols_; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        beta_[pr] *= inv;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == pr) continue;
            double* row = &t_[r * cols_];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
            beta_[r] -= f * beta_[pr];
        }
        const double f = d_[pc];
        if (f != 0.0) {
            for (std::size_t c = 0; c < cols_; ++c) d_[c] -= f * prow[c];
            d_[pc] = 0.0;
        }
    }

    void price() {
        for (std::size_t c = 0; c < cols_; ++c) {
            double d = cost_[c];
            for (std::size_t r = 0; r < m_; ++r) d -= cost_[basic_[r]] * at(r, c);
            d_[c] = row_of_[c] >= 0 ? 0.0 : d;
        }
    }

    void values() {
        for (std::size_t r = 0; r < m_; ++r) {
            double v = beta_[r];
            for (std::size_t j = 0; j < cols_; ++j) {
                if (row_of_[j] >= 0) continue;
                const double xj = at_upper_[j] ? upper_[j] : lower_[j];
                if (xj != 0.0) v -= at(r, j) * xj;
            }
            x_[r] = v;
        }
    }

    std::size_t m_;
    std::size_t n_;
    std::size_t cols_;
    std::vector<double> t_;
    std::vector<double> beta_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> cost_;
    std::vector<double> d_;
    std::vector<double> x_;
    std::vector<std::size_t> basic_;
    std::vector<long> row_of_;
    std::vector<char> at_upper_;  // not vector<bool>: this is the hot loop
};

/// Runs a factored, dual-feasible tableau to optimality and reads off the
/// solution; falls back to the two-phase solver if dual feasibility is lost.
LpSolution finish_warm(DualTableau& tab, const LinearProgram& lp, const std::vector<double>& lower,
                       const std::vector<double>& upper, LpBasis& basis);

}  // namespace capsel::detail
