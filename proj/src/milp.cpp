#include "capsel/milp.hpp"

#include "dual_tableau.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace capsel {

namespace {

constexpr double kRowRelTol = 1e-9;

double objective_tol(double z) { return 1e-9 * std::max(1.0, std::abs(z)); }

struct Node {
    std::vector<double> lower;
    std::vector<double> upper;
    LpSolution lp;
    std::size_t seq = 0;
    LpBasis basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.lp.objective != b.lp.objective) return a.lp.objective > b.lp.objective;
        return a.seq > b.seq;
    }
};

bool integer_point_feasible(const LinearProgram& lp, const std::vector<long>& counts) {
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        long double achieved = 0.0L;
        for (std::size_t j = 0; j < counts.size(); ++j) achieved += static_cast<long double>(lp.rows[r][j]) * counts[j];
        const double rhs = lp.rhs[r];
        if (static_cast<double>(achieved) < rhs - kRowRelTol * std::abs(rhs)) return false;
    }
    return true;
}

// With an integer-valued objective a node is done once its bound rounds up to
// the incumbent.
bool cannot_improve(double bound, double incumbent, bool integral_objective) {
    if (integral_objective) return std::ceil(bound - 1e-6) >= incumbent;
    return bound > incumbent + objective_tol(incumbent);
}

MilpSolution branch_and_bound(const LinearProgram& base, const MilpConfig& config, bool integral_objective);

// Column j strictly dominates column i when it costs less, covers at least as
// much in every row, and its own bound is never binding. Such an i appears in
// no optimal solution.
std::vector<std::size_t> undominated_columns(const LinearProgram& lp) {
    const std::size_t n = lp.num_variables();
    std::vector<std::size_t> keep;
    bool covering = true;
    for (std::size_t j = 0; j < n; ++j) {
        covering = covering && lp.objective[j] >= 0.0 && lp.lower[j] == 0.0;
        for (const auto& row : lp.rows) covering = covering && row[j] >= 0.0;
    }
    for (double b : lp.rhs) covering = covering && b >= 0.0;
    if (!covering) {
        for (std::size_t j = 0; j < n; ++j) keep.push_back(j);
        return keep;
    }

    std::vector<bool> free_bound(n, true);
    for (std::size_t j = 0; j < n; ++j) {
        double need = 0.0;
        for (std::size_t r = 0; r < lp.rows.size(); ++r) {
            if (lp.rows[r][j] > 0.0) need = std::max(need, std::ceil(lp.rhs[r] / lp.rows[r][j]));
        }
        free_bound[j] = lp.upper[j] >= need;
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < n && !dominated; ++j) {
            if (j == i || !free_bound[j] || !(lp.objective[j] < lp.objective[i] - objective_tol(lp.objective[i]))) continue;
            bool covers = true;
            for (const auto& row : lp.rows) covers = covers && row[j] >= row[i];
            dominated = covers;
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

LinearProgram select_columns(const LinearProgram& lp, const std::vector<std::size_t>& keep) {
    LinearProgram sub;
    for (std::size_t j : keep) {
        sub.objective.push_back(lp.objective[j]);
        sub.lower.push_back(lp.lower[j]);
        sub.upper.push_back(lp.upper[j]);
    }
    for (const auto& row : lp.rows) {
        std::vector<double> dense;
        for (std::size_t j : keep) dense.push_back(row[j]);
        sub.rows.push_back(std::move(dense));
    }
    sub.rhs = lp.rhs;
    return sub;
}

// Walks the columns in order, pushing each to its smallest value over the
// optimal face while earlier columns stay fixed. Columns at zero are already
// minimal; an LP bound settles most of the rest.
std::vector<long> lexicographic_minimum(const LinearProgram& lp, std::vector<long> x, double z,
                                        const MilpConfig& config, std::size_t& nodes) {
    const std::size_t n = lp.num_variables();
    LinearProgram face = lp;
    std::vector<double> cap(n);
    for (std::size_t j = 0; j < n; ++j) cap[j] = -lp.objective[j];
    face.rows.push_back(std::move(cap));
    face.rhs.push_back(-(z + objective_tol(z)));

    for (std::size_t k = 0; k < n; ++k) {
        if (x[k] > 0) {
            LinearProgram probe = face;
            std::fill(probe.objective.begin(), probe.objective.end(), 0.0);
            probe.objective[k] = 1.0;
            const auto relaxed = solve_lp(probe);
            ++nodes;
            if (relaxed.status == SolveStatus::optimal && std::ceil(relaxed.objective - 1e-6) < static_cast<double>(x[k])) {
                auto better = branch_and_bound(probe, config, true);
                nodes += better.nodes_explored;
                if (better.status == SolveStatus::optimal && better.counts[k] < x[k]) x = std::move(better.counts);
            }
        }
        face.lower[k] = face.upper[k] = static_cast<double>(x[k]);
    }
    return x;
}

}  // namespace

MilpSolution solve_integer_program(const LinearProgram& base, const MilpConfig& config) {
    return branch_and_bound(base, config, false);
}

bool row_satisfied(double achieved, double rhs) { return achieved >= rhs - kRowRelTol * std::abs(rhs); }

LinearProgram to_linear_program(const MilpModel& model) {
    const std::size_t n = model.num_variables();
    if (model.objective.size() != n || model.upper_bounds.size() != n) {
        throw ValidationError("dimension", "model vectors do not match the variable count");
    }
    LinearProgram lp;
    lp.objective = model.objective;
    lp.lower.assign(n, 0.0);
    lp.upper.resize(n);
    for (std::size_t j = 0; j < n; ++j) lp.upper[j] = static_cast<double>(model.upper_bounds[j]);
    for (const auto& row : model.rows) {
        std::vector<double> dense(n, 0.0);
        for (const auto& e : row.entries) {
            if (e.column >= n) throw ValidationError("dimension", "row '" + row.label + "' references a missing column");
            dense[e.column] += e.value;
        }
        lp.rows.push_back(std::move(dense));
        lp.rhs.push_back(row.rhs);
    }
    return lp;
}

LpSolution solve_lp(const MilpModel& model, const std::vector<VariableBounds>& bounds) {
    auto lp = to_linear_program(model);
    if (!bounds.empty()) {
        if (bounds.size() != model.num_variables()) {
            throw ValidationError("dimension", "bounds vector does not match the variable count");
        }
        for (std::size_t j = 0; j < bounds.size(); ++j) {
            lp.lower[j] = bounds[j].lower;
            lp.upper[j] = bounds[j].upper;
        }
    }
    return solve_lp(lp);
}

namespace {

MilpSolution branch_and_bound(const LinearProgram& base, const MilpConfig& config, bool integral_objective) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = base.num_variables();

    // Relax positive right-hand sides by the row tolerance so that the LP and
    // the integer feasibility check agree on what "satisfied" means.
    LinearProgram lp = base;
    for (auto& b : lp.rhs) b -= kRowRelTol * std::abs(b);

    MilpSolution result;
    std::optional<MilpSolution> incumbent;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::size_t seq = 0;

    // Nonnegative costs make every basis reached by bound changes dual
    // feasible, so children re-solve from their parent's basis.
    const bool warm = std::all_of(lp.objective.begin(), lp.objective.end(), [](double c) { return c >= 0.0; });
    auto relax = [&](Node& node) {
        if (warm) {
            node.lp = solve_lp_warm(lp, node.lower, node.upper, node.basis);
        } else {
            LinearProgram sub = lp;
            sub.lower = node.lower;
            sub.upper = node.upper;
            node.lp = solve_lp(sub);
        }
    };

    Node root{lp.lower, lp.upper, {}, seq++, {}};
    relax(root);
    result.nodes_explored = 1;
    if (root.lp.status == SolveStatus::infeasible) {
        result.wall_time = std::chrono::steady_clock::now() - start;
        return result;
    }
    result.root_bound = root.lp.objective;
    open.push(std::move(root));

    std::size_t explored = 0;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (incumbent && cannot_improve(node.lp.objective, incumbent->objective, integral_objective)) break;
        if (++explored > config.node_limit) {
            if (incumbent) {
                incumbent->nodes_explored = explored - 1;
                incumbent->root_bound = result.root_bound;
                incumbent->wall_time = std::chrono::steady_clock::now() - start;
            }
            throw NodeLimitError("branch-and-bound node limit of " + std::to_string(config.node_limit) + " reached",
                                 incumbent);
        }

        const auto& x = node.lp.values;
        long branch = -1;
        double best_frac = config.integrality_tol;
        for (std::size_t j = 0; j < n; ++j) {
            const double frac = x[j] - std::floor(x[j]);
            const double dist = std::min(frac, 1.0 - frac);
            if (dist > best_frac) {
                best_frac = dist;
                branch = static_cast<long>(j);
            }
        }

        if (branch < 0) {
            std::vector<long> counts(n);
            for (std::size_t j = 0; j < n; ++j) counts[j] = std::lround(x[j]);
            if (integer_point_feasible(base, counts)) {
                double obj = 0.0;
                for (std::size_t j = 0; j < n; ++j) obj += base.objective[j] * static_cast<double>(counts[j]);
                const bool better = !incumbent || obj < incumbent->objective - objective_tol(incumbent->objective);
                const bool tie_smaller = incumbent && !better &&
                                         std::abs(obj - incumbent->objective) <= objective_tol(incumbent->objective) &&
                                         counts < incumbent->counts;
                if (better || tie_smaller) {
                    MilpSolution s;
                    s.counts = std::move(counts);
                    s.objective = obj;
                    s.status = SolveStatus::optimal;
                    incumbent = std::move(s);
                }
                continue;
            }
            // Rounding inside the integrality tolerance broke a row: branch on
            // the largest rounding gap instead.
            double gap = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double g = std::abs(x[j] - std::round(x[j]));
                if (g > gap) {
                    gap = g;
                    branch = static_cast<long>(j);
                }
            }
            if (branch < 0) continue;
        }

        const auto j = static_cast<std::size_t>(branch);
        const double down = std::floor(x[j]);
        const double up = down + 1.0;

        // Both children start from this node's factored basis.
        std::optional<detail::DualTableau> parent;
        if (warm) {
            parent.emplace(lp, node.lower, node.upper);
            if (node.basis.basic.size() != lp.rows.size() || !parent->factor(node.basis) || !parent->make_dual_feasible()) {
                parent.reset();
            }
        }

        Node floor_child{node.lower, node.upper, {}, 0, node.basis};
        floor_child.upper[j] = down;
        Node ceil_child{std::move(node.lower), std::move(node.upper), {}, 0, std::move(node.basis)};
        ceil_child.lower[j] = up;
        for (Node* child : {&floor_child, &ceil_child}) {
            if (child->lower[j] > child->upper[j]) continue;
            if (parent) {
                auto tab = *parent;
                tab.set_bounds(j, child->lower[j], child->upper[j]);
                child->lp = detail::finish_warm(tab, lp, child->lower, child->upper, child->basis);
            } else {
                relax(*child);
            }
            if (child->lp.status != SolveStatus::optimal) continue;
            if (incumbent && cannot_improve(child->lp.objective, incumbent->objective, integral_objective)) continue;
            child->seq = seq++;
            open.push(std::move(*child));
        }
    }

    if (incumbent) {
        result.counts = std::move(incumbent->counts);
        result.objective = incumbent->objective;
        result.status = SolveStatus::optimal;
    }
    result.nodes_explored = std::max<std::size_t>(explored, 1);
    result.wall_time = std::chrono::steady_clock::now() - start;
    return result;
}

}  // namespace

MilpSolution solve_milp(const MilpModel& model, const MilpConfig& config) {
    for (auto u : model.upper_bounds) {
        if (u < 0) throw ValidationError("upper_bounds", "variable upper bounds must be >= 0");
    }
    const auto start = std::chrono::steady_clock::now();
    const auto lp = to_linear_program(model);
    const auto keep = undominated_columns(lp);
    const auto reduced = select_columns(lp, keep);
    auto core = branch_and_bound(reduced, config, false);
    if (core.status != SolveStatus::optimal) {
        core.wall_time = std::chrono::steady_clock::now() - start;
        return core;
    }

    const auto x = lexicographic_minimum(reduced, core.counts, core.objective, config, core.nodes_explored);
    core.counts.assign(lp.num_variables(), 0);
    core.objective = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        core.counts[keep[k]] = x[k];
        core.objective += lp.objective[keep[k]] * static_cast<double>(x[k]);
    }
    core.wall_time = std::chrono::steady_clock::now() - start;
    return core;
}

SolutionReport check_solution(const MilpModel& model, const std::vector<long>& counts) {
    if (counts.size() != model.num_variables()) {
        throw ValidationError("counts", "counts vector has " + std::to_string(counts.size()) + " entries, model has " +
                                            std::to_string(model.num_variables()) + " variables");
    }
    SolutionReport report;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw ValidationError("counts", "counts must be nonnegative");
        report.objective += model.objective[i] * static_cast<double>(counts[i]);
        if (i < model.unit_costs.size()) report.total_cost = report.total_cost + model.unit_costs[i] * counts[i];
        if (i < model.unit_areas.size()) report.total_area += model.unit_areas[i] * static_cast<double>(counts[i]);
    }
    for (const auto& row : model.rows) {
        long double achieved = 0.0L;
        for (const auto& e : row.entries) achieved += static_cast<long double>(e.value) * counts[e.column];
        RowSlack slack;
        slack.label = row.label;
        slack.achieved = static_cast<double>(achieved);
        slack.rhs = row.rhs;
        slack.slack = static_cast<double>(achieved - row.rhs);
        slack.satisfied = row_satisfied(slack.achieved, row.rhs);
        report.feasible = report.feasible && slack.satisfied;
        report.rows.push_back(std::move(slack));
    }
    return report;
}

}  // namespace capsel
