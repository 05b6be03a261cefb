#include "capsel/capmodel.hpp"

#include <algorithm>
#include <cmath>

#include "capsel/error.hpp"
#include "capsel/numfmt.hpp"

namespace capsel {

namespace {

constexpr double kMicro = 1e-6;
constexpr double kFeasibilityRelTol = 1e-9;

double json_number(const nlohmann::json& j, const char* key, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ParseError(std::string("missing field '") + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

std::string mask_label(double frequency) { return "mask@" + format_number(frequency); }

void validate_mask_point(const MaskPoint& p) {
    if (!(p.frequency > 0.0)) throw ValidationError("freq_Hz", "mask frequency must be > 0");
    if (!(p.impedance_target > 0.0)) throw ValidationError("target_ohm", "mask impedance target must be > 0");
    if (!(p.series_impedance >= 0.0)) throw ValidationError("series_ohm", "mask series impedance must be >= 0");
    if (!(p.load_impedance >= 0.0)) throw ValidationError("load_ohm", "mask load impedance must be >= 0");
}

void validate_spec(const ProblemSpec& spec) {
    if (!(spec.ceff_target >= 0.0)) throw ValidationError("ceff_uF", "ceff target must be >= 0");
    if (!(spec.bias_voltage >= 0.0)) throw ValidationError("bias_V", "bias voltage must be >= 0");
    if (!(spec.preference_k >= 0.0) || !std::isfinite(spec.preference_k)) {
        throw ValidationError("K_mm2_per_cent", "preference K must be finite and >= 0");
    }
    for (std::size_t m = 0; m < spec.mask.size(); ++m) {
        validate_mask_point(spec.mask[m]);
        if (m > 0 && !(spec.mask[m].frequency > spec.mask[m - 1].frequency)) {
            throw ValidationError("mask", "mask frequencies must be strictly ascending");
        }
    }
    validate_filter(spec.filter);
}

double transform_mask(const MaskPoint& point) {
    validate_mask_point(point);
    const double effective = point.impedance_target - point.load_impedance;
    if (!(effective > 0.0)) {
        throw InfeasibleMaskError("mask point at " + format_number(point.frequency) + " Hz: load impedance " +
                                  format_number(point.load_impedance) + " ohm leaves no margin under target " +
                                  format_number(point.impedance_target) + " ohm");
    }
    return 1.0 / effective;
}

double part_mask_admittance(const CapacitorPart& part, const MaskPoint& point, double bias) {
    return 1.0 / (impedance_magnitude(part, point.frequency, bias) + point.series_impedance);
}

long covering_count(double rhs, double coefficient) {
    const double ratio = rhs / coefficient;
    const double down = std::floor(ratio);
    if (ratio - down <= kFeasibilityRelTol * ratio) return static_cast<long>(down);
    return static_cast<long>(std::ceil(ratio));
}

long derived_upper_bound(const std::vector<CoveringRow>& rows, std::size_t column) {
    long bound = 0;
    for (const auto& row : rows) {
        for (const auto& e : row.entries) {
            if (e.column == column && e.value > 0.0) bound = std::max(bound, covering_count(row.rhs, e.value));
        }
    }
    return bound;
}

MilpModel build_model(const ProblemSpec& spec, const PartLibrary& library) {
    validate_spec(spec);
    // Mask transforms first: an infeasible mask is reported before anything
    // that depends on the library.
    std::vector<double> targets;
    targets.reserve(spec.mask.size());
    for (const auto& point : spec.mask) targets.push_back(transform_mask(point));

    const PartLibrary parts = filter_parts(library, spec.filter);
    const bool vacuous = spec.ceff_target == 0.0 && spec.mask.empty();
    if (parts.empty() && !vacuous) {
        throw NoPartsError("no parts survive the filter but the problem has constraints");
    }

    MilpModel model;
    model.preference_k = spec.preference_k;
    for (const auto& part : parts) {
        model.variable_ids.push_back(part.id);
        model.objective.push_back(spec.preference_k * part.cost.value() + part.area);
        model.unit_costs.push_back(part.cost);
        model.unit_areas.push_back(part.area);
    }

    if (spec.ceff_target > 0.0) {
        CoveringRow row{"ceff", {}, spec.ceff_target};
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const double c = derated_capacitance(parts[i], spec.bias_voltage);
            if (c > 0.0) row.entries.push_back({i, c});
        }
        model.rows.push_back(std::move(row));
    }
    for (std::size_t m = 0; m < spec.mask.size(); ++m) {
        CoveringRow row{mask_label(spec.mask[m].frequency), {}, targets[m]};
        for (std::size_t i = 0; i < parts.size(); ++i) {
            row.entries.push_back({i, part_mask_admittance(parts[i], spec.mask[m], spec.bias_voltage)});
        }
        model.rows.push_back(std::move(row));
    }

    model.upper_bounds.resize(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) model.upper_bounds[i] = derived_upper_bound(model.rows, i);
    return model;
}

MaskPoint mask_point_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("mask point must be an object");
    MaskPoint p;
    p.frequency = json_number(j, "freq_Hz");
    p.impedance_target = json_number(j, "target_ohm");
    p.series_impedance = json_number(j, "series_ohm", 0.0);
    p.load_impedance = json_number(j, "load_ohm", 0.0);
    return p;
}

nlohmann::ordered_json mask_point_to_json(const MaskPoint& p) {
    return {{"freq_Hz", round_sig(p.frequency)},
            {"target_ohm", round_sig(p.impedance_target)},
            {"series_ohm", round_sig(p.series_impedance)},
            {"load_ohm", round_sig(p.load_impedance)}};
}

ProblemSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("problem spec must be a JSON object");
    ProblemSpec spec;
    spec.ceff_target = json_number(j, "ceff_uF", 0.0) * kMicro;
    spec.bias_voltage = json_number(j, "bias_V", 0.0);
    spec.preference_k = json_number(j, "K_mm2_per_cent");
    if (j.contains("mask")) {
        if (!j.at("mask").is_array()) throw ParseError("field 'mask' must be an array");
        for (const auto& m : j.at("mask")) spec.mask.push_back(mask_point_from_json(m));
    }
    if (j.contains("filter")) spec.filter = filter_from_json(j.at("filter"));
    validate_spec(spec);
    return spec;
}

nlohmann::ordered_json spec_to_json(const ProblemSpec& spec) {
    nlohmann::ordered_json j;
    j["ceff_uF"] = round_sig(spec.ceff_target / kMicro);
    j["bias_V"] = round_sig(spec.bias_voltage);
    j["K_mm2_per_cent"] = round_sig(spec.preference_k);
    auto mask = nlohmann::ordered_json::array();
    for (const auto& p : spec.mask) mask.push_back(mask_point_to_json(p));
    j["mask"] = std::move(mask);
    j["filter"] = filter_to_json(spec.filter);
    return j;
}

}  // namespace capsel
