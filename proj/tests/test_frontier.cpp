#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "capsel/error.hpp"
#include "capsel/frontier.hpp"
#include "oracle.hpp"

using namespace capsel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ProblemSpec table1_spec() {
    ProblemSpec s;
    s.ceff_target = 4e-6;
    s.bias_voltage = 3.3;
    return s;
}

FrontierPoint point(double k, double cost, double area) {
    FrontierPoint p;
    p.k = k;
    p.counts = {static_cast<long>(cost * 10), static_cast<long>(area * 10)};
    p.total_cost = Cents::from_cents(cost);
    p.total_area = area;
    return p;
}

}  // namespace

TEST_CASE("K grid", "[frontier]") {
    const auto lg = k_grid(0.01, 100.0, 40, Spacing::log);
    REQUIRE(lg.size() == 40);
    CHECK(lg.front() == 0.01);
    CHECK(lg.back() == 100.0);
    CHECK_THAT(lg[1] / lg[0], WithinRel(std::pow(1e4, 1.0 / 39.0), 1e-12));

    const auto lin = k_grid(1.0, 2.0, 5, Spacing::linear);
    CHECK_THAT(lin[2], WithinRel(1.5, 1e-12));
    CHECK(k_grid(3.0, 7.0, 1, Spacing::log) == std::vector<double>{3.0});

    CHECK_THROWS_AS(k_grid(0.0, 1.0, 3, Spacing::log), ValidationError);
    CHECK_THROWS_AS(k_grid(2.0, 1.0, 3, Spacing::log), ValidationError);
    CHECK_THROWS_AS(k_grid(1.0, 2.0, 0, Spacing::log), ValidationError);
    CHECK_THROWS_AS(parse_spacing("cubic"), ValidationError);
}

TEST_CASE("Table I sweep at K = 0.5, 1, 2", "[frontier]") {
    const auto parts = load_library_file(oracle::fixture("table1.csv"));
    const auto sweep = sweep_k_values(table1_spec(), parts, {2.0, 0.5, 1.0});
    REQUIRE(sweep.log.size() == 3);
    CHECK_THAT(sweep.log[0].objective, WithinAbs(4.15, 1e-9));
    CHECK_THAT(sweep.log[1].objective, WithinAbs(5.0, 1e-9));
    CHECK_THAT(sweep.log[2].objective, WithinAbs(6.5, 1e-9));
    // K = 1 lands on the same counts as K = 0.5 under the tie-break.
    REQUIRE(sweep.points.size() == 2);
    CHECK(sweep.log[1].point == 0);
    CHECK(sweep.points[0].total_cost == Cents::from_cents(1.7));
    CHECK(sweep.points[1].total_cost == Cents::from_cents(1.5));
    CHECK_THAT(sweep.points[1].total_area, WithinRel(3.5, 1e-12));
    CHECK(sweep.points[1].total_parts == 5);
    CHECK(sweep.points[1].unique_parts == 1);
}

TEST_CASE("single-step sweep gives one point", "[frontier]") {
    const auto parts = load_library_file(oracle::fixture("table1.csv"));
    const auto sweep = sweep_k(table1_spec(), parts, 2.0, 2.0, 1);
    CHECK(sweep.points.size() == 1);
    CHECK(sweep.log.size() == 1);
}

TEST_CASE("infeasible mask stops the sweep", "[frontier]") {
    const auto parts = load_library_file(oracle::fixture("table1.csv"));
    auto s = table1_spec();
    s.mask = {{1e6, 1e-6, 0.0, 2e-6}};
    CHECK_THROWS_AS(sweep_k(s, parts, 1.0, 2.0, 2), InfeasibleMaskError);
}

TEST_CASE("cost falls and area rises with K", "[frontier][property]") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const auto parts = synthesize_library(30, 1000 + static_cast<std::uint64_t>(trial));
        ProblemSpec s;
        s.ceff_target = 5e-6;
        s.bias_voltage = 1.0;
        s.mask = {{1e6, 0.05}, {1e8, 0.1}};
        const auto sweep = sweep_k(s, parts, 0.01, 100.0, 12);
        for (std::size_t e = 1; e < sweep.log.size(); ++e) {
            const auto& prev = sweep.points[sweep.log[e - 1].point];
            const auto& cur = sweep.points[sweep.log[e].point];
            CHECK(cur.total_cost <= prev.total_cost);
            CHECK(cur.total_area >= prev.total_area - 1e-9 * prev.total_area);
        }
        const auto front = pareto_filter(sweep.points);
        for (const auto& a : front) {
            for (const auto& b : front) {
                const bool dom = a.total_cost <= b.total_cost && a.total_area <= b.total_area &&
                                 (a.total_cost < b.total_cost || a.total_area < b.total_area);
                CHECK_FALSE(dom);
            }
        }
    }
}

TEST_CASE("pareto filter", "[frontier]") {
    const std::vector<FrontierPoint> pts{point(2.0, 1.5, 3.5), point(1.0, 1.6, 3.4), point(0.5, 1.7, 3.3),
                                         point(0.7, 1.8, 3.4), point(0.9, 1.6, 3.4), point(0.3, 1.5, 3.6)};
    const auto front = pareto_filter(pts);
    REQUIRE(front.size() == 3);
    CHECK(front[0].total_cost == Cents::from_cents(1.5));
    CHECK(front[1].k == 0.9);  // exact twin of the K = 1 point, lower K kept
    CHECK(front[2].total_cost == Cents::from_cents(1.7));
}

TEST_CASE("tangency line", "[frontier]") {
    // K = 1 through (1.7, 3.3): K * cost + area = 5 at both intercepts.
    const auto line = tangency_line(point(1.0, 1.7, 3.3));
    CHECK(line.slope_area_per_cost == -1.0);
    CHECK_THAT(line.area_intercept, WithinRel(5.0, 1e-12));
    REQUIRE(line.cost_intercept);
    CHECK_THAT(*line.cost_intercept, WithinRel(5.0, 1e-12));

    const auto b5 = tangency_line(point(2.0, 1.5, 3.5));
    CHECK_THAT(b5.area_intercept, WithinRel(6.5, 1e-12));
    CHECK_THAT(*b5.cost_intercept, WithinRel(3.25, 1e-12));

    CHECK_FALSE(tangency_line(point(0.0, 1.5, 3.5)).cost_intercept);
}
