#pragma once

// Placement-aware selection. Parts are placed at J candidate locations; each
// location has its own impedance mask and area preference K_j, and locations
// are coupled through admittances Y_jk. At location j and mask frequency f:
//
//   |Y|_j = sum_i N_ij Y_i  +  sum_{k != j} 1 / (1/Y_jk + 1/sum_i N_ik Y_i)
//
// The remote term is non-linear, so the problem is solved by exact
// depth-first enumeration over bounded counts, pruned by (a) feasibility with
// every free count at its cap and (b) the LP relaxation of the ideal-PDN
// problem (infinite coupling), which can only overestimate admittance.
//
// Desk-scale only: at most 12 decision variables (I * J) by default, with
// count caps around 6 or less.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capsel/capmodel.hpp"
#include "capsel/milp.hpp"

namespace capsel {

struct Location {
    std::string label;
    double k_weight = 0.0;        // mm^2 per cent
    std::vector<MaskPoint> mask;  // empty: no local requirement
    double ceff_target = 0.0;     // F, satisfied by parts placed here
};

/// Coupling admittance between two locations. Without a frequency the edge
/// applies at every frequency; a frequency-specific edge overrides it.
struct CouplingEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    std::optional<double> frequency;
    double admittance = 0.0;  // S
};

struct PlacementProblem {
    std::vector<Location> locations;
    std::vector<CouplingEdge> coupling;
    PartLibrary parts;
    double bias_voltage = 0.0;
    PartFilter filter;
};

/// I x J matrix of counts, part-major.
class CountMatrix {
public:
    CountMatrix() = default;
    CountMatrix(std::size_t parts, std::size_t locations, long fill = 0)
        : parts_(parts), locations_(locations), data_(parts * locations, fill) {}

    long& operator()(std::size_t part, std::size_t location) { return data_[part * locations_ + location]; }
    long operator()(std::size_t part, std::size_t location) const { return data_[part * locations_ + location]; }

    [[nodiscard]] std::size_t parts() const { return parts_; }
    [[nodiscard]] std::size_t locations() const { return locations_; }

    friend bool operator==(const CountMatrix&, const CountMatrix&) = default;

private:
    std::size_t parts_ = 0;
    std::size_t locations_ = 0;
    std::vector<long> data_;
};

struct PlacementConfig {
    std::optional<CountMatrix> count_cap;  // per (part, location); derived when absent
    std::size_t max_variables = 12;
    std::size_t node_limit = 5'000'000;
};

struct MaskCheck {
    double frequency = 0.0;
    double achieved = 0.0;  // S
    double target = 0.0;    // S, after the load transform
    bool satisfied = false;
};

struct LocationReport {
    std::string label;
    std::vector<MaskCheck> mask;
    double ceff_achieved = 0.0;
    double ceff_target = 0.0;
    bool satisfied = true;
};

struct PlacementSolution {
    std::vector<std::string> part_ids;  // after the filter
    CountMatrix counts;
    double objective = 0.0;
    SolveStatus status = SolveStatus::infeasible;
    std::vector<LocationReport> locations;
    double lower_bound = 0.0;  // merged single-node MILP optimum
    std::size_t nodes_explored = 0;
};

void validate_placement(const PlacementProblem& problem);

/// Coupling between j and k at a frequency; 0 for unconnected pairs.
double coupling_admittance(const PlacementProblem& problem, std::size_t j, std::size_t k, double frequency);

/// Effective admittance seen at `location` for `frequency`. Part admittances
/// use that location's mask point at the frequency (its series impedance)
/// when one exists, the bare part admittance otherwise. `counts` is indexed by
/// the filtered part list.
double effective_admittance(const PlacementProblem& problem, const CountMatrix& counts, std::size_t location,
                            double frequency);

/// Default per-(part, location) caps: the largest single-part count that an
/// ideal PDN would need for any row the variable can contribute to.
CountMatrix default_count_caps(const PlacementProblem& problem);

/// Ideal-PDN relaxation: all locations merged into one node, part cost at the
/// cheapest K_j, all rows kept, summed C_eff.
MilpModel merged_model(const PlacementProblem& problem, const CountMatrix& caps);

PlacementSolution solve_placement(const PlacementProblem& problem, const PlacementConfig& config = {});

/// Checks `counts` against every location and fills the per-location report.
std::vector<LocationReport> check_placement(const PlacementProblem& problem, const CountMatrix& counts);

struct PlacementRequest {
    PlacementProblem problem;
    PlacementConfig config;
};

/// Parses the placement JSON. Parts come from "parts" (inline), "library"
/// (a path resolved against `base_dir`), or `fallback` when neither is given.
PlacementRequest placement_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                     const PartLibrary* fallback = nullptr);

}  // namespace capsel
