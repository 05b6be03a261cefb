#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "capsel/capmodel.hpp"
#include "capsel/error.hpp"
#include "oracle.hpp"

using namespace capsel;
using Catch::Matchers::WithinRel;

namespace {

ProblemSpec table1_spec(double k) {
    ProblemSpec s;
    s.ceff_target = 4e-6;
    s.bias_voltage = 3.3;
    s.preference_k = k;
    return s;
}

}  // namespace

TEST_CASE("Table I model", "[capmodel]") {
    const auto parts = load_library_file(oracle::fixture("table1.csv"));
    const auto m = build_model(table1_spec(2.0), parts);
    REQUIRE(m.num_variables() == 8);
    REQUIRE(m.num_rows() == 1);
    CHECK(m.rows[0].label == "ceff");
    // K a_i + b_i with K = 2
    CHECK_THAT(m.objective[1], WithinRel(2 * 0.3 + 0.7, 1e-12));
    CHECK_THAT(m.objective[5], WithinRel(2 * 0.7 + 1.3, 1e-12));
    // ceil(4 / C_i): A 0.35 -> 12, B 0.85 -> 5, F 1.70 -> 3, H 1.95 -> 3
    CHECK(m.upper_bounds == std::vector<long>{12, 5, 9, 5, 5, 3, 4, 3});
}

TEST_CASE("target transform", "[capmodel]") {
    // 1 / (T - Z_L) = 1 / (0.2 - 0.1)
    CHECK_THAT(transform_mask({1e6, 0.2, 0.0, 0.1}), WithinRel(10.0, 1e-12));
    CHECK_THROWS_AS(transform_mask({1e6, 0.1, 0.0, 0.1}), InfeasibleMaskError);
    CHECK_THROWS_AS(transform_mask({1e6, 0.1, 0.0, 0.2}), InfeasibleMaskError);

    CapacitorPart p = load_library_file(oracle::fixture("table1.csv"))[0];
    p.impedance = TabulatedImpedance{{{1e5, 1.0}, {1e7, 1.0}}};
    // 1 / (|Z| + Z_m) = 1 / 1.01
    CHECK_THAT(part_mask_admittance(p, {1e6, 0.1, 0.01, 0.0}, 0.0), WithinRel(1.0 / 1.01, 1e-12));
}

TEST_CASE("zero path impedances reproduce the ideal model", "[capmodel][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> logf(4.0, 9.0);
    std::uniform_real_distribution<double> logt(-3.0, 0.0);
    const auto parts = synthesize_library(40, 5);
    for (int trial = 0; trial < 50; ++trial) {
        ProblemSpec s;
        s.bias_voltage = 1.0;
        s.preference_k = 1.0;
        double f = std::pow(10.0, logf(rng));
        for (int m = 0; m < 3; ++m) {
            s.mask.push_back({f, std::pow(10.0, logt(rng)), 0.0, 0.0});
            f *= 3.0;
        }
        const auto model = build_model(s, parts);
        for (std::size_t m = 0; m < s.mask.size(); ++m) {
            const auto& row = model.rows[m];
            CHECK(row.rhs == 1.0 / s.mask[m].impedance_target);
            for (const auto& e : row.entries) {
                CHECK(e.value == admittance_magnitude(parts[e.column], s.mask[m].frequency, s.bias_voltage));
            }
        }
    }
}

TEST_CASE("model construction errors", "[capmodel]") {
    const auto parts = load_library_file(oracle::fixture("table1.csv"));
    auto s = table1_spec(1.0);

    SECTION("no parts left") {
        s.filter.min_voltage_rating = 50.0;
        CHECK_THROWS_AS(build_model(s, parts), NoPartsError);
    }
    SECTION("mask frequencies out of order") {
        s.mask = {{1e6, 0.1}, {1e5, 0.1}};
        CHECK_THROWS_AS(build_model(s, parts), ValidationError);
    }
    SECTION("negative K") {
        s.preference_k = -1.0;
        CHECK_THROWS_AS(build_model(s, parts), ValidationError);
    }
    SECTION("infeasible mask wins over an empty library") {
        s.filter.min_voltage_rating = 50.0;
        s.mask = {{1e6, 0.01, 0.0, 0.02}};
        CHECK_THROWS_AS(build_model(s, parts), InfeasibleMaskError);
    }
    SECTION("zero ceff drops the row") {
        s.ceff_target = 0.0;
        s.mask = {{1e6, 0.1}};
        const auto m = build_model(s, parts);
        REQUIRE(m.num_rows() == 1);
        CHECK(m.rows[0].label == "mask@1000000");
    }
}

TEST_CASE("covering count tolerates representation error", "[capmodel]") {
    CHECK(covering_count(4.0, 0.8) == 5);
    CHECK(covering_count(0.3, 0.1) == 3);
    CHECK(covering_count(4.0, 0.85) == 5);
    CHECK(covering_count(1.0, 3.0) == 1);
}

TEST_CASE("spec JSON", "[capmodel]") {
    const auto j = nlohmann::json::parse(R"({"ceff_uF": 12, "bias_V": 1.15, "K_mm2_per_cent": 0.5,
        "mask": [{"freq_Hz": 1e5, "target_ohm": 0.1, "series_ohm": 0.001}],
        "filter": {"max_height": 0.6}})");
    const auto s = spec_from_json(j);
    CHECK_THAT(s.ceff_target, WithinRel(12e-6, 1e-12));
    CHECK(s.mask.at(0).series_impedance == 0.001);
    CHECK(s.filter.max_height == 0.6);
    const auto back = spec_from_json(nlohmann::json::parse(spec_to_json(s).dump()));
    CHECK(back.mask.size() == 1);
    CHECK(back.preference_k == 0.5);

    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"ceff_uF": 4})")), ParseError);
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"ceff_uF": "4", "K_mm2_per_cent": 1})")), ParseError);
}
