#pragma once

// Request-level workflows shared by the command line and the HTTP service.
// Both front ends call these and serialise the returned JSON unchanged, so
// their outputs are identical for identical inputs.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capsel/capmodel.hpp"
#include "capsel/demand.hpp"
#include "capsel/frontier.hpp"
#include "capsel/milp.hpp"
#include "capsel/pdnplace.hpp"

namespace capsel {

/// Builds and solves one spec. Throws InfeasibleError naming the rows that
/// no part can contribute to when there is no solution.
nlohmann::ordered_json run_solve(const ProblemSpec& spec, const PartLibrary& parts, const MilpConfig& config = {});

nlohmann::ordered_json solution_to_json(const MilpModel& model, const MilpSolution& solution);

struct SweepParams {
    double k_min = 0.1;
    double k_max = 10.0;
    std::size_t steps = 10;
    Spacing spacing = Spacing::log;
    std::optional<std::vector<double>> k_values;  // overrides the grid
};

SweepResult run_sweep_result(const ProblemSpec& spec, const PartLibrary& parts, const SweepParams& params,
                             const MilpConfig& config = {});
nlohmann::ordered_json sweep_to_json(const SweepResult& sweep);
std::string sweep_to_csv(const SweepResult& sweep);
nlohmann::ordered_json run_sweep(const ProblemSpec& spec, const PartLibrary& parts, const SweepParams& params,
                                 const MilpConfig& config = {});

/// Throws InfeasibleError when no placement satisfies every location.
nlohmann::ordered_json run_placement(const PlacementRequest& request);
nlohmann::ordered_json placement_to_json(const PlacementSolution& solution);

struct DemandRequest {
    ApplicationSet apps;
    std::string part_id;
    std::vector<double> prices;
    std::optional<SupplyCurve> supply;
};

struct DemandResult {
    DemandCurve curve;
    std::optional<SupplyIntersection> intersection;
    std::optional<double> savings;  // at the intersection price
};

DemandResult run_demand_result(const DemandRequest& request, const MilpConfig& config = {});
nlohmann::ordered_json demand_result_to_json(const DemandResult& result);
nlohmann::ordered_json run_demand(const DemandRequest& request, const MilpConfig& config = {});

/// Per-part invariant report. Never throws for bad parts; lists them instead.
nlohmann::ordered_json validation_report(const PartLibrary& parts);

// Request bodies as accepted by the HTTP service.
SweepParams sweep_params_from_json(const nlohmann::json& j);
DemandRequest demand_request_from_json(const nlohmann::json& j, const PartLibrary& parts);

}  // namespace capsel
