#pragma once

// Capacitor part library: loading, validation, application filters and the
// electrical evaluations (derated capacitance, impedance/admittance) used to
// build selection models.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace capsel {

/// Currency amount in cents, held as an integer number of micro-cents so
/// that decimal prices like 0.3 cents add up exactly.
class Cents {
public:
    static constexpr std::int64_t kMicroPerCent = 1'000'000;

    constexpr Cents() = default;
    static Cents from_micro(std::int64_t micro) { Cents c; c.micro_ = micro; return c; }
    static Cents from_cents(double cents);

    [[nodiscard]] constexpr std::int64_t micro() const { return micro_; }
    [[nodiscard]] double value() const { return static_cast<double>(micro_) / kMicroPerCent; }

    friend constexpr Cents operator+(Cents a, Cents b) { return from_micro_c(a.micro_ + b.micro_); }
    friend constexpr Cents operator*(Cents a, std::int64_t n) { return from_micro_c(a.micro_ * n); }
    friend constexpr auto operator<=>(Cents, Cents) = default;

private:
    static constexpr Cents from_micro_c(std::int64_t m) { Cents c; c.micro_ = m; return c; }
    std::int64_t micro_ = 0;
};

struct DeratingPoint {
    double bias_voltage;           // V
    double effective_capacitance;  // F
    friend bool operator==(const DeratingPoint&, const DeratingPoint&) = default;
};

/// Effective capacitance versus DC bias, ascending in bias, anchored at
/// (0 V, nominal).
struct DeratingTable {
    std::vector<DeratingPoint> points;
    friend bool operator==(const DeratingTable&, const DeratingTable&) = default;
};

struct SeriesRlc {
    double esr;  // ohm
    double esl;  // H
    friend bool operator==(const SeriesRlc&, const SeriesRlc&) = default;
};

struct ImpedancePoint {
    double frequency;  // Hz
    double magnitude;  // ohm
    friend bool operator==(const ImpedancePoint&, const ImpedancePoint&) = default;
};

struct TabulatedImpedance {
    std::vector<ImpedancePoint> points;
    friend bool operator==(const TabulatedImpedance&, const TabulatedImpedance&) = default;
};

using ImpedanceModel = std::variant<SeriesRlc, TabulatedImpedance>;

struct CapacitorPart {
    std::string id;
    std::string description;
    std::string package;
    double nominal_capacitance = 0.0;  // F
    double voltage_rating = 0.0;       // V
    double height = 0.0;               // mm
    double area = 0.0;                 // mm^2
    Cents cost;
    std::string dielectric;
    std::string manufacturer;
    DeratingTable derating;
    ImpedanceModel impedance = SeriesRlc{0.0, 0.0};

    friend bool operator==(const CapacitorPart&, const CapacitorPart&) = default;
};

using PartLibrary = std::vector<CapacitorPart>;

struct PartFilter {
    std::optional<double> max_height;          // mm
    std::optional<double> min_voltage_rating;  // V
    std::optional<std::set<std::string>> allowed_dielectrics;
    std::optional<std::set<std::string>> allowed_manufacturers;

    [[nodiscard]] bool empty() const {
        return !max_height && !min_voltage_rating && !allowed_dielectrics && !allowed_manufacturers;
    }
};

enum class LibraryFormat { csv, json };

/// Loads a library from a single stream. A CSV stream holds the part table
/// only; every part then gets the one-point derating table (0 V, nominal).
PartLibrary load_library(std::istream& source, LibraryFormat format);

/// Loads the three-table CSV form. `derating` and `impedance` may be null.
PartLibrary load_library_csv(std::istream& parts, std::istream* derating, std::istream* impedance);

/// Loads by extension. For `name.csv`, the sidecars `name.derating.csv` and
/// `name.impedance.csv` are picked up when present unless explicit paths are
/// given.
PartLibrary load_library_file(const std::filesystem::path& path,
                              const std::optional<std::filesystem::path>& derating = std::nullopt,
                              const std::optional<std::filesystem::path>& impedance = std::nullopt);

/// Throws ValidationError naming the field when a part breaks an invariant.
void validate_part(const CapacitorPart& part);
void validate_library(const PartLibrary& parts);
void validate_filter(const PartFilter& filter);

PartLibrary filter_parts(const PartLibrary& parts, const PartFilter& filter);
bool passes_filter(const CapacitorPart& part, const PartFilter& filter);

/// Linear interpolation of the derating table; no extrapolation.
double derated_capacitance(const CapacitorPart& part, double bias);

double impedance_magnitude(const CapacitorPart& part, double frequency, double bias);
double admittance_magnitude(const CapacitorPart& part, double frequency, double bias);

nlohmann::ordered_json part_to_json(const CapacitorPart& part);
CapacitorPart part_from_json(const nlohmann::json& j);
nlohmann::ordered_json library_to_json(const PartLibrary& parts);
PartLibrary library_from_json(const nlohmann::json& j);

nlohmann::json filter_to_json(const PartFilter& filter);
PartFilter filter_from_json(const nlohmann::json& j);

/// Deterministic synthetic MLCC catalogue with realistic package, derating
/// and parasitic spreads. Used for scale tests and demos.
PartLibrary synthesize_library(std::size_t count, std::uint64_t seed);

}  // namespace capsel
