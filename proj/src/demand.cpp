#include "capsel/demand.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "capsel/error.hpp"
#include "capsel/numfmt.hpp"
#include "csv.hpp"

namespace capsel {

namespace {

double objective_tol(double z) { return 1e-9 * std::max(1.0, std::abs(z)); }

std::size_t find_part(const PartLibrary& parts, const std::string& id) {
    const auto it = std::find_if(parts.begin(), parts.end(), [&](const CapacitorPart& p) { return p.id == id; });
    if (it == parts.end()) throw ValidationError(id, "unknown part '" + id + "'");
    return static_cast<std::size_t>(it - parts.begin());
}

double json_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

}  // namespace

void validate_applications(const ApplicationSet& apps) {
    if (apps.applications.empty()) throw ValidationError("applications", "application set is empty");
    for (const auto& spec : apps.applications) validate_spec(spec);
}

void validate_supply(const SupplyCurve& supply) {
    if (supply.tiers.empty()) throw ValidationError("tiers", "supply curve needs at least one tier");
    if (supply.tiers.front().min_quantity != 0) throw ValidationError("tiers", "first supply tier must start at quantity 0");
    for (std::size_t t = 0; t < supply.tiers.size(); ++t) {
        const auto& tier = supply.tiers[t];
        if (!(tier.unit_price >= 0.0) || !std::isfinite(tier.unit_price)) {
            throw ValidationError("unit_price_cents", "supply prices must be finite and >= 0");
        }
        if (t > 0 && tier.min_quantity <= supply.tiers[t - 1].min_quantity) {
            throw ValidationError("min_quantity", "supply tiers must have ascending min_quantity");
        }
    }
}

long min_part_count(const ProblemSpec& spec, const PartLibrary& parts, const std::string& part_id,
                    const MilpConfig& config) {
    MilpModel model = build_model(spec, parts);
    const auto it = std::find(model.variable_ids.begin(), model.variable_ids.end(), part_id);
    const MilpSolution best = solve_milp(model, config);
    if (best.status != SolveStatus::optimal) throw InfeasibleError("application is infeasible");
    if (it == model.variable_ids.end()) return 0;
    const auto s = static_cast<std::size_t>(it - model.variable_ids.begin());

    // The optimum can only get worse as the cap on the swept part shrinks, so
    // the smallest cap that keeps it is found by bisection.
    long lo = 0;
    long hi = best.counts[s];
    while (lo < hi) {
        const long mid = lo + (hi - lo) / 2;
        model.upper_bounds[s] = mid;
        const MilpSolution capped = solve_milp(model, config);
        if (capped.status == SolveStatus::optimal && capped.objective <= best.objective + objective_tol(best.objective)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

DemandCurve demand_curve(const ApplicationSet& apps, const std::string& part_id,
                         const std::vector<double>& price_grid, const MilpConfig& config) {
    validate_applications(apps);
    const std::size_t s = find_part(apps.parts, part_id);
    if (price_grid.empty()) throw ValidationError("prices", "price grid is empty");
    for (std::size_t g = 0; g < price_grid.size(); ++g) {
        if (!(price_grid[g] >= 0.0) || !std::isfinite(price_grid[g])) throw ValidationError("prices", "prices must be finite and >= 0");
        if (g > 0 && !(price_grid[g] > price_grid[g - 1])) throw ValidationError("prices", "price grid must be strictly ascending");
    }

    DemandCurve curve;
    curve.part_id = part_id;
    curve.price_grid = price_grid;
    PartLibrary parts = apps.parts;
    for (double price : price_grid) {
        parts[s].cost = Cents::from_cents(price);
        long q = 0;
        for (std::size_t p = 0; p < apps.applications.size(); ++p) {
            try {
                q += min_part_count(apps.applications[p], parts, part_id, config);
            } catch (const InfeasibleError& e) {
                throw InfeasibleError("application " + std::to_string(p) + " is infeasible at price " +
                                      format_number(price) + " cents: " + e.what());
            }
        }
        curve.quantities.push_back(q);
        if (q == 0 && !curve.x_intercept) curve.x_intercept = price;
    }
    return curve;
}

long demand_at(const DemandCurve& demand, double price) {
    if (demand.price_grid.empty()) return 0;
    const auto it = std::upper_bound(demand.price_grid.begin(), demand.price_grid.end(), price);
    if (it == demand.price_grid.begin()) return demand.quantities.front();
    return demand.quantities[static_cast<std::size_t>(it - demand.price_grid.begin()) - 1];
}

double supply_price(const SupplyCurve& supply, long quantity) {
    validate_supply(supply);
    double price = supply.tiers.front().unit_price;
    for (const auto& tier : supply.tiers) {
        if (quantity >= tier.min_quantity) price = tier.unit_price;
    }
    return price;
}

std::optional<SupplyIntersection> intersect_supply(const DemandCurve& demand, const SupplyCurve& supply) {
    validate_supply(supply);
    std::optional<SupplyIntersection> best;
    for (long q : demand.quantities) {
        if (q <= 0 || (best && q <= best->quantity)) continue;
        const double price = supply_price(supply, q);
        if (demand_at(demand, price) >= q) best = SupplyIntersection{q, price};
    }
    return best;
}

double savings_area(const DemandCurve& demand, double price) {
    if (!(price >= 0.0)) throw ValidationError("price", "price must be >= 0");
    const auto& grid = demand.price_grid;
    double area = 0.0;
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
        const double from = std::max(price, grid[g]);
        const double to = grid[g + 1];
        if (to <= from) continue;
        area += static_cast<double>(demand.quantities[g]) * (to - from);
    }
    return area;
}

std::vector<double> parse_price_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        item = first == std::string::npos ? std::string() : item.substr(first, last - first + 1);
        out.push_back(detail::parse_double(item, "prices", 1));
    }
    if (out.empty()) throw ValidationError("prices", "price list is empty");
    return out;
}

ApplicationSet applications_from_json(const nlohmann::json& j, const PartLibrary& parts) {
    const nlohmann::json* list = &j;
    if (j.is_object()) {
        if (!j.contains("applications")) throw ParseError("missing field 'applications'");
        list = &j.at("applications");
    }
    if (!list->is_array()) throw ParseError("applications must be an array of problem specs");
    ApplicationSet apps;
    apps.parts = parts;
    for (const auto& spec : *list) apps.applications.push_back(spec_from_json(spec));
    validate_applications(apps);
    return apps;
}

SupplyCurve supply_from_json(const nlohmann::json& j) {
    const nlohmann::json* list = &j;
    if (j.is_object()) {
        if (!j.contains("tiers")) throw ParseError("missing field 'tiers'");
        list = &j.at("tiers");
    }
    if (!list->is_array()) throw ParseError("supply tiers must be an array");
    SupplyCurve supply;
    for (const auto& t : *list) {
        if (!t.is_object()) throw ParseError("supply tiers must be objects");
        if (!t.contains("min_quantity") || !t.at("min_quantity").is_number_integer()) {
            throw ParseError("field 'min_quantity' must be an integer");
        }
        supply.tiers.push_back({t.at("min_quantity").get<long>(), json_number(t, "unit_price_cents")});
    }
    validate_supply(supply);
    return supply;
}

nlohmann::ordered_json supply_to_json(const SupplyCurve& supply) {
    nlohmann::ordered_json tiers = nlohmann::ordered_json::array();
    for (const auto& t : supply.tiers) {
        tiers.push_back({{"min_quantity", t.min_quantity}, {"unit_price_cents", round_sig(t.unit_price)}});
    }
    return {{"tiers", tiers}};
}

nlohmann::ordered_json demand_to_json(const DemandCurve& demand) {
    nlohmann::ordered_json j;
    j["part_id"] = demand.part_id;
    auto points = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < demand.price_grid.size(); ++g) {
        points.push_back({{"price_cents", round_sig(demand.price_grid[g])}, {"quantity", demand.quantities[g]}});
    }
    j["points"] = std::move(points);
    j["x_intercept_cents"] = demand.x_intercept ? nlohmann::ordered_json(round_sig(*demand.x_intercept)) : nlohmann::ordered_json(nullptr);
    return j;
}

DemandCurve demand_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("points") || !j.at("points").is_array()) {
        throw ParseError("demand curve must be an object with a 'points' array");
    }
    DemandCurve d;
    d.part_id = j.value("part_id", "");
    for (const auto& p : j.at("points")) {
        d.price_grid.push_back(json_number(p, "price_cents"));
        if (!p.contains("quantity") || !p.at("quantity").is_number_integer()) throw ParseError("field 'quantity' must be an integer");
        d.quantities.push_back(p.at("quantity").get<long>());
        if (d.quantities.back() == 0 && !d.x_intercept) d.x_intercept = d.price_grid.back();
    }
    return d;
}

void write_demand_csv(std::ostream& out, const DemandCurve& demand) {
    out << "price_cents,quantity\n";
    for (std::size_t g = 0; g < demand.price_grid.size(); ++g) {
        out << format_number(demand.price_grid[g]) << ',' << demand.quantities[g] << '\n';
    }
}

}  // namespace capsel
