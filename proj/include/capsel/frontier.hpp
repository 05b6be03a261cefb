#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "capsel/capmodel.hpp"
#include "capsel/milp.hpp"

namespace capsel {

struct FrontierPoint {
    double k = 0.0;
    std::vector<long> counts;  // aligned with SweepResult::variable_ids
    Cents total_cost;
    double total_area = 0.0;
    double objective = 0.0;
    std::size_t unique_parts = 0;
    long total_parts = 0;
};

/// One solve of the sweep. `point` indexes SweepResult::points; several K
/// values map to the same point when the solution does not change.
struct SweepLogEntry {
    double k = 0.0;
    double objective = 0.0;
    std::size_t point = 0;
    std::size_t nodes_explored = 0;
    double wall_time_s = 0.0;
};

struct SweepResult {
    std::vector<std::string> variable_ids;
    std::vector<FrontierPoint> points;  // ascending K, unique counts
    std::vector<SweepLogEntry> log;     // one per K value
};

enum class Spacing { log, linear };

std::vector<double> k_grid(double k_min, double k_max, std::size_t steps, Spacing spacing);

SweepResult sweep_k(const ProblemSpec& spec, const PartLibrary& parts, double k_min, double k_max,
                    std::size_t steps, Spacing spacing = Spacing::log, const MilpConfig& config = {});

/// Same as sweep_k over an explicit list of K values (sorted ascending first).
SweepResult sweep_k_values(const ProblemSpec& spec, const PartLibrary& parts, std::vector<double> ks,
                           const MilpConfig& config = {});

/// Keeps points not dominated in (total_cost, total_area); ascending cost.
std::vector<FrontierPoint> pareto_filter(const std::vector<FrontierPoint>& points);

/// Iso-objective line K*cost + area = objective through a frontier point.
struct TangencyLine {
    double slope_area_per_cost = 0.0;       // -K
    double area_intercept = 0.0;            // at cost = 0
    std::optional<double> cost_intercept;   // at area = 0; none when K = 0
};

TangencyLine tangency_line(const FrontierPoint& point);

Spacing parse_spacing(const std::string& text);

}  // namespace capsel
