#include "capsel/frontier.hpp"

#include <algorithm>
#include <cmath>

#include "capsel/error.hpp"
#include "capsel/numfmt.hpp"

namespace capsel {

Spacing parse_spacing(const std::string& text) {
    if (text == "log") return Spacing::log;
    if (text == "linear") return Spacing::linear;
    throw ValidationError("spacing", "spacing must be 'log' or 'linear', got '" + text + "'");
}

std::vector<double> k_grid(double k_min, double k_max, std::size_t steps, Spacing spacing) {
    if (!(k_min > 0.0) || !(k_max >= k_min) || !std::isfinite(k_max)) {
        throw ValidationError("k_range", "K range must satisfy 0 < k_min <= k_max");
    }
    if (steps < 1) throw ValidationError("steps", "steps must be >= 1");
    std::vector<double> ks(steps, k_min);
    if (steps == 1) return ks;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        ks[s] = spacing == Spacing::log ? k_min * std::pow(k_max / k_min, t) : k_min + (k_max - k_min) * t;
    }
    ks.back() = k_max;
    return ks;
}

SweepResult sweep_k(const ProblemSpec& spec, const PartLibrary& parts, double k_min, double k_max,
                    std::size_t steps, Spacing spacing, const MilpConfig& config) {
    return sweep_k_values(spec, parts, k_grid(k_min, k_max, steps, spacing), config);
}

SweepResult sweep_k_values(const ProblemSpec& spec, const PartLibrary& parts, std::vector<double> ks,
                           const MilpConfig& config) {
    if (ks.empty()) throw ValidationError("steps", "sweep needs at least one K value");
    std::sort(ks.begin(), ks.end());

    SweepResult out;
    for (double k : ks) {
        ProblemSpec at_k = spec;
        at_k.preference_k = k;
        const MilpModel model = build_model(at_k, parts);
        if (out.variable_ids.empty()) out.variable_ids = model.variable_ids;
        const MilpSolution sol = solve_milp(model, config);
        if (sol.status != SolveStatus::optimal) {
            throw InfeasibleError("no selection satisfies the constraints (sweep stopped at K = " +
                                  format_number(k) + ")");
        }

        const auto same = std::find_if(out.points.begin(), out.points.end(),
                                       [&](const FrontierPoint& p) { return p.counts == sol.counts; });
        std::size_t index;
        if (same != out.points.end()) {
            index = static_cast<std::size_t>(same - out.points.begin());
        } else {
            const SolutionReport report = check_solution(model, sol.counts);
            FrontierPoint p;
            p.k = k;
            p.counts = sol.counts;
            p.total_cost = report.total_cost;
            p.total_area = report.total_area;
            p.objective = sol.objective;
            for (long n : sol.counts) {
                p.unique_parts += n > 0 ? 1 : 0;
                p.total_parts += n;
            }
            index = out.points.size();
            out.points.push_back(std::move(p));
        }
        out.log.push_back({k, sol.objective, index, sol.nodes_explored, sol.wall_time.count()});
    }
    return out;
}

std::vector<FrontierPoint> pareto_filter(const std::vector<FrontierPoint>& points) {
    // Areas are sums of decimal inputs; compare them with a relative tolerance.
    auto area_eq = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
    auto dominates = [&](const FrontierPoint& a, const FrontierPoint& b) {
        const bool area_le = a.total_area <= b.total_area || area_eq(a.total_area, b.total_area);
        const bool area_lt = a.total_area < b.total_area && !area_eq(a.total_area, b.total_area);
        return a.total_cost <= b.total_cost && area_le && (a.total_cost < b.total_cost || area_lt);
    };
    std::vector<FrontierPoint> kept;
    for (const auto& p : points) {
        const bool dominated = std::any_of(points.begin(), points.end(),
                                           [&](const FrontierPoint& q) { return dominates(q, p); });
        if (dominated) continue;
        const auto twin = std::find_if(kept.begin(), kept.end(), [&](const FrontierPoint& q) {
            return q.total_cost == p.total_cost && area_eq(q.total_area, p.total_area);
        });
        if (twin == kept.end()) {
            kept.push_back(p);
        } else if (p.k < twin->k) {
            *twin = p;
        }
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const FrontierPoint& a, const FrontierPoint& b) { return a.total_cost < b.total_cost; });
    return kept;
}

TangencyLine tangency_line(const FrontierPoint& point) {
    TangencyLine line;
    const double cost = point.total_cost.value();
    line.slope_area_per_cost = -point.k;
    line.area_intercept = point.k * cost + point.total_area;
    if (point.k > 0.0) line.cost_intercept = line.area_intercept / point.k;
    return line;
}

}  // namespace capsel
