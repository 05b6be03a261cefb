#pragma once

// Demand for one part as a function of its unit price: every application is
// re-solved at each grid price and the optimal counts of the part are summed.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capsel/capmodel.hpp"
#include "capsel/milp.hpp"

namespace capsel {

struct ApplicationSet {
    std::vector<ProblemSpec> applications;
    PartLibrary parts;
};

struct DemandCurve {
    std::string part_id;
    std::vector<double> price_grid;  // cents, ascending
    std::vector<long> quantities;    // Q at each grid price
    std::optional<double> x_intercept;
};

/// Piecewise-constant unit price by quantity. Tier k applies from its
/// min_quantity up to the next tier's.
struct SupplyTier {
    long min_quantity = 0;
    double unit_price = 0.0;  // cents
};

struct SupplyCurve {
    std::vector<SupplyTier> tiers;
};

struct SupplyIntersection {
    long quantity = 0;
    double unit_price = 0.0;
};

void validate_applications(const ApplicationSet& apps);
void validate_supply(const SupplyCurve& supply);

/// Optimal count of `part_id` for one application at the library's current
/// prices, preferring the fewest units of that part among optimal solutions.
/// Returns 0 when the part is filtered out. Throws InfeasibleError.
long min_part_count(const ProblemSpec& spec, const PartLibrary& parts, const std::string& part_id,
                    const MilpConfig& config = {});

DemandCurve demand_curve(const ApplicationSet& apps, const std::string& part_id,
                         const std::vector<double>& price_grid, const MilpConfig& config = {});

/// Q(p) as a right-continuous step function of price; below the first grid
/// price the first quantity applies.
long demand_at(const DemandCurve& demand, double price);

/// Supply price for buying `quantity` units.
double supply_price(const SupplyCurve& supply, long quantity);

std::optional<SupplyIntersection> intersect_supply(const DemandCurve& demand, const SupplyCurve& supply);

/// Area under the step demand curve and above `price`, in cents.
double savings_area(const DemandCurve& demand, double price);

std::vector<double> parse_price_list(const std::string& text);

ApplicationSet applications_from_json(const nlohmann::json& j, const PartLibrary& parts);
SupplyCurve supply_from_json(const nlohmann::json& j);
nlohmann::ordered_json supply_to_json(const SupplyCurve& supply);
nlohmann::ordered_json demand_to_json(const DemandCurve& demand);
DemandCurve demand_from_json(const nlohmann::json& j);
void write_demand_csv(std::ostream& out, const DemandCurve& demand);

}  // namespace capsel
