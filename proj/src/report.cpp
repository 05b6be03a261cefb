#include "capsel/report.hpp"

#include <algorithm>
#include <sstream>

#include "capsel/error.hpp"
#include "capsel/numfmt.hpp"

namespace capsel {

namespace {

using ojson = nlohmann::ordered_json;

double num(double v) { return round_sig(v); }

std::string dead_rows(const MilpModel& model) {
    std::string names;
    for (const auto& row : model.rows) {
        if (row.rhs <= 0.0) continue;
        const bool any = std::any_of(row.entries.begin(), row.entries.end(), [](const MatrixEntry& e) { return e.value > 0.0; });
        if (!any) names += (names.empty() ? "" : ", ") + row.label;
    }
    return names;
}

ojson counts_object(const std::vector<std::string>& ids, const std::vector<long>& counts) {
    ojson j = ojson::object();
    for (std::size_t i = 0; i < ids.size(); ++i) j[ids[i]] = counts[i];
    return j;
}

double json_number(const nlohmann::json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

}  // namespace

ojson solution_to_json(const MilpModel& model, const MilpSolution& solution) {
    const SolutionReport report = check_solution(model, solution.counts);
    ojson j;
    j["status"] = to_string(solution.status);
    j["K_mm2_per_cent"] = num(model.preference_k);
    j["objective"] = num(solution.objective);
    j["total_cost_cents"] = num(report.total_cost.value());
    j["total_area_mm2"] = num(report.total_area);
    j["counts"] = counts_object(model.variable_ids, solution.counts);
    auto selection = ojson::array();
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        if (solution.counts[i] == 0) continue;
        selection.push_back({{"id", model.variable_ids[i]},
                             {"count", solution.counts[i]},
                             {"unit_cost_cents", num(model.unit_costs[i].value())},
                             {"unit_area_mm2", num(model.unit_areas[i])}});
    }
    j["selection"] = std::move(selection);
    auto rows = ojson::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"label", r.label},
                        {"achieved", num(r.achieved)},
                        {"rhs", num(r.rhs)},
                        {"slack", num(r.slack)},
                        {"satisfied", r.satisfied}});
    }
    j["rows"] = std::move(rows);
    j["feasible"] = report.feasible;
    j["root_bound"] = num(solution.root_bound);
    j["nodes_explored"] = solution.nodes_explored;
    return j;
}

ojson run_solve(const ProblemSpec& spec, const PartLibrary& parts, const MilpConfig& config) {
    const MilpModel model = build_model(spec, parts);
    const MilpSolution solution = solve_milp(model, config);
    if (solution.status != SolveStatus::optimal) {
        const std::string rows = dead_rows(model);
        throw InfeasibleError(rows.empty() ? "no selection satisfies the constraints"
                                           : "no part can contribute to row(s): " + rows);
    }
    return solution_to_json(model, solution);
}

SweepResult run_sweep_result(const ProblemSpec& spec, const PartLibrary& parts, const SweepParams& params,
                             const MilpConfig& config) {
    if (params.k_values) return sweep_k_values(spec, parts, *params.k_values, config);
    return sweep_k(spec, parts, params.k_min, params.k_max, params.steps, params.spacing, config);
}

ojson sweep_to_json(const SweepResult& sweep) {
    ojson j;
    j["variable_ids"] = sweep.variable_ids;
    auto points = ojson::array();
    for (const auto& p : sweep.points) {
        const TangencyLine line = tangency_line(p);
        ojson tangency;
        tangency["slope_area_per_cost"] = num(line.slope_area_per_cost);
        tangency["area_intercept_mm2"] = num(line.area_intercept);
        tangency["cost_intercept_cents"] = line.cost_intercept ? ojson(num(*line.cost_intercept)) : ojson(nullptr);
        points.push_back({{"K_mm2_per_cent", num(p.k)},
                          {"objective", num(p.objective)},
                          {"total_cost_cents", num(p.total_cost.value())},
                          {"total_area_mm2", num(p.total_area)},
                          {"unique_parts", p.unique_parts},
                          {"total_parts", p.total_parts},
                          {"counts", counts_object(sweep.variable_ids, p.counts)},
                          {"tangency", std::move(tangency)}});
    }
    j["points"] = std::move(points);

    // Pareto membership by index into "points".
    auto pareto = ojson::array();
    for (const auto& kept : pareto_filter(sweep.points)) {
        for (std::size_t i = 0; i < sweep.points.size(); ++i) {
            if (sweep.points[i].counts == kept.counts) pareto.push_back(i);
        }
    }
    j["pareto"] = std::move(pareto);

    auto log = ojson::array();
    for (const auto& e : sweep.log) {
        log.push_back({{"K_mm2_per_cent", num(e.k)},
                       {"objective", num(e.objective)},
                       {"point", e.point},
                       {"nodes_explored", e.nodes_explored}});
    }
    j["log"] = std::move(log);
    return j;
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "k,total_cost_cents,total_area_mm2,objective";
    for (const auto& id : sweep.variable_ids) out << ',' << id;
    out << '\n';
    for (const auto& p : sweep.points) {
        out << format_number(p.k) << ',' << format_number(p.total_cost.value()) << ',' << format_number(p.total_area)
            << ',' << format_number(p.objective);
        for (long n : p.counts) out << ',' << n;
        out << '\n';
    }
    return out.str();
}

ojson run_sweep(const ProblemSpec& spec, const PartLibrary& parts, const SweepParams& params,
                const MilpConfig& config) {
    return sweep_to_json(run_sweep_result(spec, parts, params, config));
}

ojson placement_to_json(const PlacementSolution& solution) {
    ojson j;
    j["status"] = to_string(solution.status);
    j["objective"] = num(solution.objective);
    j["lower_bound"] = num(solution.lower_bound);
    j["nodes_explored"] = solution.nodes_explored;
    j["part_ids"] = solution.part_ids;
    auto locations = ojson::array();
    for (std::size_t l = 0; l < solution.locations.size(); ++l) {
        const auto& loc = solution.locations[l];
        ojson counts = ojson::object();
        for (std::size_t i = 0; i < solution.part_ids.size(); ++i) counts[solution.part_ids[i]] = solution.counts(i, l);
        auto mask = ojson::array();
        for (const auto& m : loc.mask) {
            mask.push_back({{"freq_Hz", num(m.frequency)},
                            {"achieved_S", num(m.achieved)},
                            {"target_S", num(m.target)},
                            {"satisfied", m.satisfied}});
        }
        locations.push_back({{"label", loc.label},
                             {"counts", std::move(counts)},
                             {"ceff_achieved_uF", num(loc.ceff_achieved * 1e6)},
                             {"ceff_target_uF", num(loc.ceff_target * 1e6)},
                             {"mask", std::move(mask)},
                             {"satisfied", loc.satisfied}});
    }
    j["locations"] = std::move(locations);
    return j;
}

ojson run_placement(const PlacementRequest& request) {
    const PlacementSolution solution = solve_placement(request.problem, request.config);
    if (solution.status != SolveStatus::optimal) {
        throw InfeasibleError("no placement satisfies every location within the count caps");
    }
    return placement_to_json(solution);
}

DemandResult run_demand_result(const DemandRequest& request, const MilpConfig& config) {
    DemandResult out;
    out.curve = demand_curve(request.apps, request.part_id, request.prices, config);
    if (request.supply) {
        out.intersection = intersect_supply(out.curve, *request.supply);
        if (out.intersection) out.savings = savings_area(out.curve, out.intersection->unit_price);
    }
    return out;
}

ojson demand_result_to_json(const DemandResult& result) {
    ojson j = demand_to_json(result.curve);
    if (result.intersection) {
        j["intersection"] = {{"quantity", result.intersection->quantity},
                             {"unit_price_cents", num(result.intersection->unit_price)}};
        j["savings_area_cents"] = num(result.savings.value_or(0.0));
    } else {
        j["intersection"] = nullptr;
        j["savings_area_cents"] = nullptr;
    }
    return j;
}

ojson run_demand(const DemandRequest& request, const MilpConfig& config) {
    return demand_result_to_json(run_demand_result(request, config));
}

ojson validation_report(const PartLibrary& parts) {
    auto issues = ojson::array();
    for (std::size_t i = 0; i < parts.size(); ++i) {
        try {
            validate_part(parts[i]);
        } catch (const ValidationError& e) {
            issues.push_back({{"id", parts[i].id}, {"field", e.field()}, {"message", e.what()}});
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (parts[k].id == parts[i].id) {
                issues.push_back({{"id", parts[i].id}, {"field", "id"}, {"message", "duplicate part id '" + parts[i].id + "'"}});
                break;
            }
        }
    }
    ojson j;
    j["parts"] = parts.size();
    j["valid"] = issues.empty();
    j["issues"] = std::move(issues);
    return j;
}

SweepParams sweep_params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("sweep request must be a JSON object");
    SweepParams p;
    p.k_min = json_number(j, "k_min", p.k_min);
    p.k_max = json_number(j, "k_max", p.k_max);
    if (j.contains("steps")) {
        if (!j.at("steps").is_number_integer() || j.at("steps").get<long long>() < 1) {
            throw ValidationError("steps", "steps must be an integer >= 1");
        }
        p.steps = j.at("steps").get<std::size_t>();
    }
    if (j.contains("spacing")) {
        if (!j.at("spacing").is_string()) throw ParseError("field 'spacing' must be a string");
        p.spacing = parse_spacing(j.at("spacing").get<std::string>());
    }
    if (j.contains("k_values")) {
        if (!j.at("k_values").is_array()) throw ParseError("field 'k_values' must be an array");
        std::vector<double> ks;
        for (const auto& k : j.at("k_values")) {
            if (!k.is_number()) throw ParseError("k_values entries must be numbers");
            ks.push_back(k.get<double>());
        }
        p.k_values = std::move(ks);
    }
    return p;
}

DemandRequest demand_request_from_json(const nlohmann::json& j, const PartLibrary& parts) {
    if (!j.is_object()) throw ParseError("demand request must be a JSON object");
    DemandRequest req;
    req.apps = applications_from_json(j, parts);
    if (!j.contains("part_id") || !j.at("part_id").is_string()) throw ParseError("field 'part_id' must be a string");
    req.part_id = j.at("part_id").get<std::string>();
    if (!j.contains("prices_cents") || !j.at("prices_cents").is_array()) {
        throw ParseError("field 'prices_cents' must be an array");
    }
    for (const auto& p : j.at("prices_cents")) {
        if (!p.is_number()) throw ParseError("prices_cents entries must be numbers");
        req.prices.push_back(p.get<double>());
    }
    if (j.contains("supply") && !j.at("supply").is_null()) req.supply = supply_from_json(j.at("supply"));
    return req;
}

}  // namespace capsel
