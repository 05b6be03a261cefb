#include "capsel/partlib.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_set>

#include "capsel/error.hpp"
#include "capsel/numfmt.hpp"
#include "csv.hpp"

namespace capsel {

namespace {

constexpr double kMicro = 1e-6;
constexpr double kNano = 1e-9;
constexpr double kRelEps = 1e-12;

const std::vector<std::string> kPartColumns = {
    "id", "description", "package", "nominal_uF", "voltage_rating_V", "height_mm", "area_mm2",
    "cost_cents", "dielectric", "manufacturer", "esr_ohm", "esl_nH"};
const std::vector<std::string> kDeratingColumns = {"part_id", "bias_V", "ceff_uF"};
const std::vector<std::string> kImpedanceColumns = {"part_id", "freq_Hz", "zmag_ohm"};

std::string where(const CapacitorPart& part) { return "part '" + part.id + "'"; }

[[noreturn]] void invalid(const CapacitorPart& part, const std::string& field, const std::string& what) {
    throw ValidationError(field, where(part) + ": " + field + " " + what);
}

/// Inserts the (0 V, nominal) anchor when the supplied table starts above 0 V.
void anchor_derating(CapacitorPart& part) {
    auto& pts = part.derating.points;
    if (pts.empty() || pts.front().bias_voltage > 0.0) {
        pts.insert(pts.begin(), DeratingPoint{0.0, part.nominal_capacitance});
    }
}

double number_at(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::string string_at(const nlohmann::json& j, const char* key, bool required = true) {
    if (!j.contains(key)) {
        if (required) throw ParseError(std::string("missing field '") + key + "'");
        return {};
    }
    const auto& v = j.at(key);
    if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Cents Cents::from_cents(double cents) {
    return from_micro(static_cast<std::int64_t>(std::llround(cents * kMicroPerCent)));
}

void validate_part(const CapacitorPart& part) {
    if (part.id.empty()) throw ValidationError("id", "part id must not be empty");
    if (!(part.area > 0.0)) invalid(part, "area", "must be > 0");
    if (part.cost.micro() < 0) invalid(part, "cost", "must be >= 0");
    if (!(part.height > 0.0)) invalid(part, "height", "must be > 0");
    if (!(part.nominal_capacitance > 0.0)) invalid(part, "nominal_capacitance", "must be > 0");
    if (!(part.voltage_rating > 0.0)) invalid(part, "voltage_rating", "must be > 0");

    const auto& pts = part.derating.points;
    if (pts.empty()) invalid(part, "derating", "needs at least one point");
    if (pts.front().bias_voltage != 0.0) invalid(part, "derating", "must start at 0 V");
    if (std::abs(pts.front().effective_capacitance - part.nominal_capacitance) >
        kRelEps * part.nominal_capacitance) {
        invalid(part, "derating", "value at 0 V must equal the nominal capacitance");
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double c = pts[k].effective_capacitance;
        if (!(c > 0.0) || c > part.nominal_capacitance * (1.0 + kRelEps)) {
            invalid(part, "derating", "values must lie in (0, nominal]");
        }
        if (k > 0 && !(pts[k].bias_voltage > pts[k - 1].bias_voltage)) {
            invalid(part, "derating", "bias voltages must be strictly ascending");
        }
    }

    if (const auto* rlc = std::get_if<SeriesRlc>(&part.impedance)) {
        if (!(rlc->esr >= 0.0)) invalid(part, "esr", "must be >= 0");
        if (!(rlc->esl >= 0.0)) invalid(part, "esl", "must be >= 0");
    } else {
        const auto& table = std::get<TabulatedImpedance>(part.impedance).points;
        if (table.size() < 2) invalid(part, "impedance", "table needs at least two points");
        for (std::size_t k = 0; k < table.size(); ++k) {
            if (!(table[k].magnitude > 0.0)) invalid(part, "impedance", "magnitudes must be > 0");
            if (!(table[k].frequency > 0.0)) invalid(part, "impedance", "frequencies must be > 0");
            if (k > 0 && !(table[k].frequency > table[k - 1].frequency)) {
                invalid(part, "impedance", "frequencies must be strictly ascending");
            }
        }
    }
}

void validate_library(const PartLibrary& parts) {
    std::unordered_set<std::string> seen;
    for (const auto& part : parts) {
        validate_part(part);
        if (!seen.insert(part.id).second) {
            throw ValidationError(part.id, "duplicate part id '" + part.id + "'");
        }
    }
}

void validate_filter(const PartFilter& filter) {
    if (filter.max_height && !(*filter.max_height > 0.0)) {
        throw ValidationError("max_height", "filter max_height must be > 0");
    }
    if (filter.min_voltage_rating && !(*filter.min_voltage_rating > 0.0)) {
        throw ValidationError("min_voltage_rating", "filter min_voltage_rating must be > 0");
    }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

PartLibrary load_library_csv(std::istream& parts_in, std::istream* derating_in, std::istream* impedance_in) {
    using detail::parse_double;

    const auto rows = detail::read_csv(parts_in);
    PartLibrary parts;
    if (rows.empty()) return parts;
    detail::require_header(rows.front(), kPartColumns, "parts");

    std::map<std::string, std::size_t> index;
    std::vector<std::pair<std::string, std::string>> rlc_text;  // raw esr/esl, checked after sidecars
    std::vector<std::size_t> lines;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != kPartColumns.size()) {
            throw ParseError("parts line " + std::to_string(row.line) + ": expected " +
                             std::to_string(kPartColumns.size()) + " fields, got " +
                             std::to_string(row.fields.size()));
        }
        const auto& f = row.fields;
        CapacitorPart p;
        p.id = f[0];
        p.description = f[1];
        p.package = f[2];
        p.nominal_capacitance = parse_double(f[3], "nominal_uF", row.line) * kMicro;
        p.voltage_rating = parse_double(f[4], "voltage_rating_V", row.line);
        p.height = parse_double(f[5], "height_mm", row.line);
        p.area = parse_double(f[6], "area_mm2", row.line);
        p.cost = Cents::from_cents(parse_double(f[7], "cost_cents", row.line));
        p.dielectric = f[8];
        p.manufacturer = f[9];
        if (index.count(p.id) != 0) {
            throw ValidationError(p.id, "parts line " + std::to_string(row.line) + ": duplicate part id '" + p.id + "'");
        }
        index.emplace(p.id, parts.size());
        rlc_text.emplace_back(f[10], f[11]);
        lines.push_back(row.line);
        parts.push_back(std::move(p));
    }

    auto lookup = [&](const std::string& id, const std::string& table, std::size_t line) -> CapacitorPart& {
        const auto it = index.find(id);
        if (it == index.end()) {
            throw ValidationError(id, table + " line " + std::to_string(line) + ": unknown part id '" + id + "'");
        }
        return parts[it->second];
    };

    if (derating_in != nullptr) {
        const auto drows = detail::read_csv(*derating_in);
        if (!drows.empty()) {
            detail::require_header(drows.front(), kDeratingColumns, "derating");
            for (std::size_t r = 1; r < drows.size(); ++r) {
                const auto& row = drows[r];
                if (row.fields.size() != kDeratingColumns.size()) {
                    throw ParseError("derating line " + std::to_string(row.line) + ": expected 3 fields");
                }
                auto& part = lookup(row.fields[0], "derating", row.line);
                part.derating.points.push_back({parse_double(row.fields[1], "bias_V", row.line),
                                                parse_double(row.fields[2], "ceff_uF", row.line) * kMicro});
            }
        }
    }

    std::vector<bool> tabulated(parts.size(), false);
    if (impedance_in != nullptr) {
        const auto irows = detail::read_csv(*impedance_in);
        if (!irows.empty()) {
            detail::require_header(irows.front(), kImpedanceColumns, "impedance");
            for (std::size_t r = 1; r < irows.size(); ++r) {
                const auto& row = irows[r];
                if (row.fields.size() != kImpedanceColumns.size()) {
                    throw ParseError("impedance line " + std::to_string(row.line) + ": expected 3 fields");
                }
                auto& part = lookup(row.fields[0], "impedance", row.line);
                const std::size_t k = index.at(part.id);
                if (!tabulated[k]) {
                    part.impedance = TabulatedImpedance{};
                    tabulated[k] = true;
                }
                std::get<TabulatedImpedance>(part.impedance)
                    .points.push_back({parse_double(row.fields[1], "freq_Hz", row.line),
                                       parse_double(row.fields[2], "zmag_ohm", row.line)});
            }
        }
    }

    for (std::size_t k = 0; k < parts.size(); ++k) {
        auto& part = parts[k];
        if (!tabulated[k]) {
            const auto& [esr, esl] = rlc_text[k];
            part.impedance = SeriesRlc{parse_double(esr, "esr_ohm", lines[k]),
                                       parse_double(esl, "esl_nH", lines[k]) * kNano};
        }
        anchor_derating(part);
    }
    validate_library(parts);
    return parts;
}

PartLibrary load_library(std::istream& source, LibraryFormat format) {
    if (format == LibraryFormat::csv) return load_library_csv(source, nullptr, nullptr);
    std::stringstream buffer;
    buffer << source.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("library JSON: ") + e.what());
    }
    return library_from_json(j);
}

PartLibrary load_library_file(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& derating,
                              const std::optional<std::filesystem::path>& impedance) {
    auto open = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ParseError("cannot open '" + p.string() + "'");
        return in;
    };
    auto in = open(path);
    if (path.extension() == ".json") return load_library(in, LibraryFormat::json);
    if (path.extension() != ".csv") {
        throw ParseError("library '" + path.string() + "' must have a .csv or .json extension");
    }
    auto sidecar = [&](const std::optional<std::filesystem::path>& given, const char* suffix)
        -> std::optional<std::filesystem::path> {
        if (given) return given;
        auto p = path;
        p.replace_extension(std::string(suffix) + ".csv");
        if (std::filesystem::exists(p)) return p;
        return std::nullopt;
    };
    std::optional<std::ifstream> din;
    std::optional<std::ifstream> zin;
    if (auto p = sidecar(derating, ".derating")) din.emplace(open(*p));
    if (auto p = sidecar(impedance, ".impedance")) zin.emplace(open(*p));
    return load_library_csv(in, din ? &*din : nullptr, zin ? &*zin : nullptr);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

nlohmann::ordered_json part_to_json(const CapacitorPart& part) {
    nlohmann::ordered_json j;
    j["id"] = part.id;
    j["description"] = part.description;
    j["package"] = part.package;
    j["nominal_uF"] = round_sig(part.nominal_capacitance / kMicro);
    j["voltage_rating_V"] = round_sig(part.voltage_rating);
    j["height_mm"] = round_sig(part.height);
    j["area_mm2"] = round_sig(part.area);
    j["cost_cents"] = round_sig(part.cost.value());
    j["dielectric"] = part.dielectric;
    j["manufacturer"] = part.manufacturer;
    if (const auto* rlc = std::get_if<SeriesRlc>(&part.impedance)) {
        j["esr_ohm"] = round_sig(rlc->esr);
        j["esl_nH"] = round_sig(rlc->esl / kNano);
    }
    auto derating = nlohmann::ordered_json::array();
    for (const auto& p : part.derating.points) {
        derating.push_back({{"bias_V", round_sig(p.bias_voltage)}, {"ceff_uF", round_sig(p.effective_capacitance / kMicro)}});
    }
    j["derating"] = std::move(derating);
    if (const auto* tab = std::get_if<TabulatedImpedance>(&part.impedance)) {
        auto imp = nlohmann::ordered_json::array();
        for (const auto& p : tab->points) {
            imp.push_back({{"freq_Hz", round_sig(p.frequency)}, {"zmag_ohm", round_sig(p.magnitude)}});
        }
        j["impedance"] = std::move(imp);
    }
    return j;
}

CapacitorPart part_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("part entry must be an object");
    CapacitorPart p;
    p.id = string_at(j, "id");
    try {
        p.description = string_at(j, "description", false);
        p.package = string_at(j, "package", false);
        p.nominal_capacitance = number_at(j, "nominal_uF") * kMicro;
        p.voltage_rating = number_at(j, "voltage_rating_V");
        p.height = number_at(j, "height_mm");
        p.area = number_at(j, "area_mm2");
        p.cost = Cents::from_cents(number_at(j, "cost_cents"));
        p.dielectric = string_at(j, "dielectric", false);
        p.manufacturer = string_at(j, "manufacturer", false);
        if (j.contains("derating")) {
            if (!j.at("derating").is_array()) throw ParseError("field 'derating' must be an array");
            for (const auto& d : j.at("derating")) {
                p.derating.points.push_back({number_at(d, "bias_V"), number_at(d, "ceff_uF") * kMicro});
            }
        }
        if (j.contains("impedance")) {
            if (!j.at("impedance").is_array()) throw ParseError("field 'impedance' must be an array");
            TabulatedImpedance table;
            for (const auto& z : j.at("impedance")) {
                table.points.push_back({number_at(z, "freq_Hz"), number_at(z, "zmag_ohm")});
            }
            p.impedance = std::move(table);
        } else {
            p.impedance = SeriesRlc{number_at(j, "esr_ohm"), number_at(j, "esl_nH") * kNano};
        }
    } catch (const ParseError& e) {
        throw ParseError("part '" + p.id + "': " + e.what());
    }
    anchor_derating(p);
    return p;
}

nlohmann::ordered_json library_to_json(const PartLibrary& parts) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : parts) arr.push_back(part_to_json(p));
    return arr;
}

PartLibrary library_from_json(const nlohmann::json& j) {
    const nlohmann::json* list = &j;
    if (j.is_object() && j.contains("parts")) list = &j.at("parts");
    if (!list->is_array()) throw ParseError("library JSON must be an array of parts or an object with 'parts'");
    PartLibrary parts;
    parts.reserve(list->size());
    for (const auto& entry : *list) parts.push_back(part_from_json(entry));
    validate_library(parts);
    return parts;
}

nlohmann::json filter_to_json(const PartFilter& filter) {
    nlohmann::json j = nlohmann::json::object();
    if (filter.max_height) j["max_height"] = round_sig(*filter.max_height);
    if (filter.min_voltage_rating) j["min_voltage_rating"] = round_sig(*filter.min_voltage_rating);
    if (filter.allowed_dielectrics) j["allowed_dielectrics"] = *filter.allowed_dielectrics;
    if (filter.allowed_manufacturers) j["allowed_manufacturers"] = *filter.allowed_manufacturers;
    return j;
}

PartFilter filter_from_json(const nlohmann::json& j) {
    PartFilter f;
    if (j.is_null()) return f;
    if (!j.is_object()) throw ParseError("filter must be an object");
    if (j.contains("max_height")) f.max_height = number_at(j, "max_height");
    if (j.contains("min_voltage_rating")) f.min_voltage_rating = number_at(j, "min_voltage_rating");
    auto string_set = [&](const char* key) {
        const auto& v = j.at(key);
        if (!v.is_array()) throw ParseError(std::string("filter field '") + key + "' must be an array of strings");
        std::set<std::string> out;
        for (const auto& s : v) {
            if (!s.is_string()) throw ParseError(std::string("filter field '") + key + "' must be an array of strings");
            out.insert(s.get<std::string>());
        }
        return out;
    };
    if (j.contains("allowed_dielectrics")) f.allowed_dielectrics = string_set("allowed_dielectrics");
    if (j.contains("allowed_manufacturers")) f.allowed_manufacturers = string_set("allowed_manufacturers");
    validate_filter(f);
    return f;
}

// ---------------------------------------------------------------------------
// Filtering and evaluation
// ---------------------------------------------------------------------------

bool passes_filter(const CapacitorPart& part, const PartFilter& filter) {
    if (filter.max_height && part.height > *filter.max_height) return false;
    if (filter.min_voltage_rating && part.voltage_rating < *filter.min_voltage_rating) return false;
    if (filter.allowed_dielectrics && filter.allowed_dielectrics->count(part.dielectric) == 0) return false;
    if (filter.allowed_manufacturers && filter.allowed_manufacturers->count(part.manufacturer) == 0) return false;
    return true;
}

PartLibrary filter_parts(const PartLibrary& parts, const PartFilter& filter) {
    PartLibrary out;
    std::copy_if(parts.begin(), parts.end(), std::back_inserter(out),
                 [&](const CapacitorPart& p) { return passes_filter(p, filter); });
    return out;
}

double derated_capacitance(const CapacitorPart& part, double bias) {
    if (!(bias >= 0.0)) invalid(part, "bias", "must be >= 0");
    if (bias > part.voltage_rating) {
        invalid(part, "bias", "of " + format_number(bias) + " V exceeds the voltage rating " +
                                  format_number(part.voltage_rating) + " V");
    }
    const auto& pts = part.derating.points;
    if (bias > pts.back().bias_voltage) {
        invalid(part, "bias", "of " + format_number(bias) + " V lies beyond the derating table (last point " +
                                  format_number(pts.back().bias_voltage) + " V)");
    }
    const auto upper = std::lower_bound(pts.begin(), pts.end(), bias,
                                        [](const DeratingPoint& p, double v) { return p.bias_voltage < v; });
    if (upper->bias_voltage == bias) return upper->effective_capacitance;
    const auto lower = std::prev(upper);
    const double t = (bias - lower->bias_voltage) / (upper->bias_voltage - lower->bias_voltage);
    return lower->effective_capacitance + t * (upper->effective_capacitance - lower->effective_capacitance);
}

double impedance_magnitude(const CapacitorPart& part, double frequency, double bias) {
    if (!(frequency > 0.0)) invalid(part, "frequency", "must be > 0");
    if (const auto* rlc = std::get_if<SeriesRlc>(&part.impedance)) {
        const double c = derated_capacitance(part, bias);
        const double omega = 2.0 * std::numbers::pi * frequency;
        const double reactance = omega * rlc->esl - 1.0 / (omega * c);
        const double z = std::hypot(rlc->esr, reactance);
        if (!(z > 0.0)) invalid(part, "impedance", "is zero at " + format_number(frequency) + " Hz");
        return z;
    }
    const auto& pts = std::get<TabulatedImpedance>(part.impedance).points;
    if (frequency < pts.front().frequency || frequency > pts.back().frequency) {
        invalid(part, "frequency", format_number(frequency) + " Hz is outside the tabulated range [" +
                                       format_number(pts.front().frequency) + ", " +
                                       format_number(pts.back().frequency) + "] Hz");
    }
    const auto upper = std::lower_bound(pts.begin(), pts.end(), frequency,
                                        [](const ImpedancePoint& p, double f) { return p.frequency < f; });
    if (upper->frequency == frequency) return upper->magnitude;
    const auto lower = std::prev(upper);
    const double t = std::log(frequency / lower->frequency) / std::log(upper->frequency / lower->frequency);
    return std::exp(std::log(lower->magnitude) + t * std::log(upper->magnitude / lower->magnitude));
}

double admittance_magnitude(const CapacitorPart& part, double frequency, double bias) {
    return 1.0 / impedance_magnitude(part, frequency, bias);
}

// ---------------------------------------------------------------------------
// Synthetic catalogue
// ---------------------------------------------------------------------------

namespace {

struct PackageFamily {
    const char* code;
    double area;        // mm^2, including courtyard
    double height;      // mm
    double esl_nh;
    double max_uf;
    double base_cents;
};

constexpr std::array<PackageFamily, 7> kFamilies{{
    {"0201", 0.7, 0.33, 0.25, 4.7, 0.20},
    {"0402", 1.3, 0.55, 0.35, 22.0, 0.15},
    {"0603", 2.6, 0.90, 0.50, 47.0, 0.20},
    {"0805", 4.0, 1.35, 0.60, 100.0, 0.40},
    {"1206", 6.8, 1.70, 0.80, 220.0, 0.80},
    {"0204", 1.2, 0.35, 0.12, 4.7, 1.50},
    {"0402-3T", 1.6, 0.55, 0.05, 10.0, 2.50},
}};

constexpr std::array<double, 13> kValuesUf{0.01, 0.022, 0.047, 0.1, 0.22, 0.47, 1.0, 2.2, 4.7, 10.0, 22.0, 47.0, 100.0};
constexpr std::array<double, 5> kRatings{4.0, 6.3, 10.0, 16.0, 25.0};
constexpr std::array<const char*, 4> kMakers{"Acme", "Borealis", "Cygnus", "Deltron"};

// Nearest multiple of 1/scale, computed so the result is the correctly
// rounded decimal (survives a text round trip).
double round_to(double value, double scale) { return std::round(value * scale) / scale; }

double sig4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::strtod(buf, nullptr);
}

}  // namespace

PartLibrary synthesize_library(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PartLibrary parts;
    parts.reserve(count);
    while (parts.size() < count) {
        const auto& fam = kFamilies[rng() % kFamilies.size()];
        std::vector<double> values;
        for (double v : kValuesUf) {
            if (v <= fam.max_uf) values.push_back(v);
        }
        const double uf = values[rng() % values.size()];
        const double rating = kRatings[rng() % kRatings.size()];
        const double density = uf / fam.max_uf;  // 1.0 = densest in the family

        CapacitorPart p;
        char id[32];
        std::snprintf(id, sizeof id, "SYN-%05zu", parts.size() + 1);
        p.id = id;
        p.package = fam.code;
        p.nominal_capacitance = uf * kMicro;
        p.voltage_rating = rating;
        p.height = fam.height;
        p.area = fam.area;
        const double cents = fam.base_cents * (1.0 + 3.0 * density) * (1.0 + rating / 25.0) * (0.8 + 0.45 * unit(rng));
        p.cost = Cents::from_cents(round_to(cents, 1000.0));
        const bool class1 = uf < 0.1 && unit(rng) < 0.5;
        p.dielectric = class1 ? "C0G" : (unit(rng) < 0.7 ? "X5R" : "X7R");
        p.manufacturer = kMakers[rng() % kMakers.size()];
        p.description = format_number(uf) + "uF " + fam.code + " " + format_number(rating) + "V " + p.dielectric;

        // Dense class-II parts lose capacitance faster under bias.
        const double v_half = class1 ? 1e9 : rating * (0.25 + 0.5 * (1.0 - density)) * (0.8 + 0.4 * unit(rng));
        p.derating.points.push_back({0.0, p.nominal_capacitance});
        for (int k = 1; k <= 10; ++k) {
            const double v = round_to(rating * k / 10.0, 100.0);
            const double frac = 1.0 / (1.0 + std::pow(v / v_half, 1.6));
            const double c = std::min(uf, std::max(sig4(uf * frac), uf * 1e-3));
            p.derating.points.push_back({v, c * kMicro});
        }
        const double esr = round_to(0.003 + 0.02 * unit(rng) + 0.002 / std::sqrt(uf), 10000.0);
        const double esl = round_to(fam.esl_nh * (0.85 + 0.3 * unit(rng)), 1000.0);
        p.impedance = SeriesRlc{esr, esl * kNano};
        parts.push_back(std::move(p));
    }
    validate_library(parts);
    return parts;
}

}  // namespace capsel
