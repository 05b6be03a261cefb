#pragma once

// Turns a selection task plus a part library into a covering integer program
//
//   minimise   sum_i (K a_i + b_i) N_i
//   subject to sum_i C_i N_i          >= C_eff
//              sum_i N_i |Y|_{i@f_m}  >= 1 / (T_m - Z_L,m)     for each mask point
//              0 <= N_i <= u_i, N_i integer
//
// where |Y|_{i@f_m} = 1 / (|Z|_{i@f_m} + Z_m) folds the series path impedance
// into each part before the parallel (admittance) sum.

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capsel/partlib.hpp"

namespace capsel {

struct MaskPoint {
    double frequency = 0.0;         // Hz
    double impedance_target = 0.0;  // ohm
    double series_impedance = 0.0;  // ohm, capacitor-to-load path
    double load_impedance = 0.0;    // ohm, load-side path
};

struct ProblemSpec {
    double ceff_target = 0.0;   // F
    double bias_voltage = 0.0;  // V
    std::vector<MaskPoint> mask;
    double preference_k = 0.0;  // mm^2 per cent
    PartFilter filter;
};

struct MatrixEntry {
    std::size_t column;
    double value;
};

/// One `>=` row of the covering program.
struct CoveringRow {
    std::string label;  // "ceff" or "mask@<freq>"
    std::vector<MatrixEntry> entries;
    double rhs = 0.0;
};

struct MilpModel {
    std::vector<std::string> variable_ids;
    std::vector<double> objective;
    std::vector<CoveringRow> rows;
    std::vector<long> upper_bounds;

    // Per-variable economics, kept alongside so reports can split the
    // scalarised objective back into cost and area.
    std::vector<Cents> unit_costs;
    std::vector<double> unit_areas;
    double preference_k = 0.0;

    [[nodiscard]] std::size_t num_variables() const { return variable_ids.size(); }
    [[nodiscard]] std::size_t num_rows() const { return rows.size(); }
};

void validate_mask_point(const MaskPoint& point);
void validate_spec(const ProblemSpec& spec);

/// Target admittance 1 / (T - Z_L). Throws InfeasibleMaskError when Z_L >= T.
double transform_mask(const MaskPoint& point);

/// 1 / (|Z|_{i@f} + Z_m).
double part_mask_admittance(const CapacitorPart& part, const MaskPoint& point, double bias);

/// Applies `spec.filter`, then builds the covering program.
MilpModel build_model(const ProblemSpec& spec, const PartLibrary& parts);

/// Smallest count of a single variable that satisfies, on its own, every row
/// it participates in; 0 when it appears in no row.
long derived_upper_bound(const std::vector<CoveringRow>& rows, std::size_t column);

/// ceil(rhs / coef) with a relative slack of 1e-9 so values that are integral
/// up to rounding are not pushed to the next integer.
long covering_count(double rhs, double coefficient);

std::string mask_label(double frequency);

ProblemSpec spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json spec_to_json(const ProblemSpec& spec);
MaskPoint mask_point_from_json(const nlohmann::json& j);
nlohmann::ordered_json mask_point_to_json(const MaskPoint& point);

}  // namespace capsel
