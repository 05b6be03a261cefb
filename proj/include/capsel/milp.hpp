#pragma once

// Exact solver for the covering programs produced by build_model: bounded
// simplex on dense tableaux (two-phase primal with Bland's rule, or dual
// simplex warm-started from a parent basis), driven by best-bound
// branch-and-bound.
//
// The dense tableau is sized for desk-scale models: up to roughly a thousand
// variables and fifty rows. Larger instances work but slow down linearly in
// the column count per pivot.

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capsel/capmodel.hpp"
#include "capsel/error.hpp"

namespace capsel {

enum class SolveStatus { optimal, infeasible };

const char* to_string(SolveStatus status);

struct VariableBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// General bounded LP in `>=` form: min c.x, A x >= b, lower <= x <= upper.
/// Coefficients may have any sign.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;  // dense, one vector per row
    std::vector<double> rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::size_t num_variables() const { return objective.size(); }
};

struct LpSolution {
    std::vector<double> values;
    double objective = 0.0;
    SolveStatus status = SolveStatus::infeasible;
    std::size_t iterations = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

/// LP relaxation of `model` with per-variable bounds replacing [0, u_i].
/// An empty `bounds` means the model's own bounds.
LpSolution solve_lp(const MilpModel& model, const std::vector<VariableBounds>& bounds = {});

LinearProgram to_linear_program(const MilpModel& model);

/// Basis over the structural columns followed by one surplus column per row.
/// Empty means the all-surplus basis.
struct LpBasis {
    std::vector<std::size_t> basic;
    std::vector<bool> at_upper;
};

/// Bounded dual simplex from `basis`, with `lower`/`upper` replacing the
/// program's bounds. The basis must be dual feasible for the objective (an
/// empty basis is, when every cost is >= 0); otherwise this falls back to
/// solve_lp. On return `basis` holds the final basis.
LpSolution solve_lp_warm(const LinearProgram& lp, const std::vector<double>& lower, const std::vector<double>& upper,
                         LpBasis& basis);

struct MilpConfig {
    double integrality_tol = 1e-6;
    std::size_t node_limit = 1'000'000;
};

struct MilpSolution {
    std::vector<long> counts;
    double objective = 0.0;
    SolveStatus status = SolveStatus::infeasible;
    std::size_t nodes_explored = 0;
    double root_bound = 0.0;  // LP relaxation objective at the root
    std::chrono::duration<double> wall_time{};
};

/// Thrown when the node budget runs out. Carries the best incumbent so far.
class NodeLimitError : public ResourceLimitError {
public:
    NodeLimitError(const std::string& message, std::optional<MilpSolution> incumbent)
        : ResourceLimitError(message), incumbent_(std::move(incumbent)) {}

    [[nodiscard]] const std::optional<MilpSolution>& incumbent() const noexcept { return incumbent_; }

private:
    std::optional<MilpSolution> incumbent_;
};

/// Branch-and-bound over a general bounded LP with integer variables.
/// Used directly by callers whose relaxations are not covering programs.
MilpSolution solve_integer_program(const LinearProgram& lp, const MilpConfig& config = {});

/// Globally optimal counts. Best-bound node order, most-fractional branching
/// (lowest index on ties), floor child first; among equal-objective integer
/// solutions the lexicographically smallest counts vector is kept.
MilpSolution solve_milp(const MilpModel& model, const MilpConfig& config = {});

struct RowSlack {
    std::string label;
    double achieved = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool satisfied = false;
};

struct SolutionReport {
    std::vector<RowSlack> rows;
    bool feasible = true;
    Cents total_cost;
    double total_area = 0.0;
    double objective = 0.0;
};

/// Row-by-row achieved value against the right-hand side. A row counts as
/// satisfied when achieved >= rhs (1 - 1e-9).
SolutionReport check_solution(const MilpModel& model, const std::vector<long>& counts);

bool row_satisfied(double achieved, double rhs);

}  // namespace capsel
