#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "capsel/demand.hpp"
#include "capsel/error.hpp"
#include "oracle.hpp"

using namespace capsel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ApplicationSet table1_apps(std::size_t copies = 1) {
    ApplicationSet apps;
    apps.parts = load_library_file(oracle::fixture("table1.csv"));
    ProblemSpec s;
    s.ceff_target = 4e-6;
    s.bias_voltage = 3.3;
    s.preference_k = 2.0;
    apps.applications.assign(copies, s);
    return apps;
}

/// Fewest units of `id` among all optimal selections, by enumeration.
long oracle_min_count(const ProblemSpec& spec, PartLibrary parts, const std::string& id, double price) {
    for (auto& p : parts) {
        if (p.id == id) p.cost = Cents::from_cents(price);
    }
    const auto m = build_model(spec, parts);
    const auto col = static_cast<std::size_t>(
        std::find(m.variable_ids.begin(), m.variable_ids.end(), id) - m.variable_ids.begin());
    long best = -1;
    for (const auto& n : oracle::all_optima(m)) {
        if (best < 0 || n[col] < best) best = n[col];
    }
    return best;
}

DemandCurve curve(std::vector<double> prices, std::vector<long> q) {
    DemandCurve d;
    d.part_id = "X";
    d.price_grid = std::move(prices);
    d.quantities = std::move(q);
    for (std::size_t g = 0; g < d.quantities.size(); ++g) {
        if (d.quantities[g] == 0 && !d.x_intercept) d.x_intercept = d.price_grid[g];
    }
    return d;
}

}  // namespace

TEST_CASE("part B demand on the Table I application", "[demand]") {
    const auto apps = table1_apps();
    const std::vector<double> grid{0.1, 0.3, 10000.0};
    const auto d = demand_curve(apps, "B", grid);
    CHECK(d.quantities == std::vector<long>{5, 5, 0});
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CHECK(d.quantities[g] == oracle_min_count(apps.applications[0], apps.parts, "B", grid[g]));
    }
    REQUIRE(d.x_intercept);
    CHECK(*d.x_intercept == 10000.0);
}

TEST_CASE("minimal-count tie-break agrees with enumeration", "[demand][property]") {
    // At K = 1 and B = 0.3 cents, A1 F1 H1 ties the B-based optima and uses no B.
    auto apps = table1_apps();
    apps.applications[0].preference_k = 1.0;
    CHECK(min_part_count(apps.applications[0], apps.parts, "B") == 0);
    CHECK(oracle_min_count(apps.applications[0], apps.parts, "B", 0.3) == 0);

    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> tenths(0, 12);
    for (int trial = 0; trial < 30; ++trial) {
        const double price = tenths(rng) / 10.0;
        const char id = static_cast<char>('A' + trial % 8);
        const std::string sid(1, id);
        auto priced = apps.parts;
        for (auto& p : priced) {
            if (p.id == sid) p.cost = Cents::from_cents(price);
        }
        INFO(sid << " at " << price);
        CHECK(min_part_count(apps.applications[0], priced, sid) ==
              oracle_min_count(apps.applications[0], apps.parts, sid, price));
    }
}

TEST_CASE("demand is weakly decreasing in price", "[demand][property]") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ApplicationSet apps;
        apps.parts = synthesize_library(25, seed);
        ProblemSpec s;
        s.ceff_target = 4e-6;
        s.bias_voltage = 1.0;
        s.preference_k = 1.0;
        s.mask = {{1e6, 0.05}};
        apps.applications = {s};
        s.preference_k = 5.0;
        apps.applications.push_back(s);
        const std::string id = apps.parts[seed].id;
        std::vector<double> grid;
        for (int g = 0; g <= 12; ++g) grid.push_back(0.05 * g);
        const auto d = demand_curve(apps, id, grid);
        for (std::size_t g = 1; g < grid.size(); ++g) CHECK(d.quantities[g] <= d.quantities[g - 1]);
        CHECK(d.quantities.front() == *std::max_element(d.quantities.begin(), d.quantities.end()));
    }
}

TEST_CASE("two identical applications double the curve", "[demand]") {
    const std::vector<double> grid{0.0, 0.2, 0.3, 0.4, 0.6, 1.0};
    const auto one = demand_curve(table1_apps(1), "F", grid);
    const auto two = demand_curve(table1_apps(2), "F", grid);
    for (std::size_t g = 0; g < grid.size(); ++g) CHECK(two.quantities[g] == 2 * one.quantities[g]);
    CHECK_THAT(savings_area(two, 0.2), WithinRel(2 * savings_area(one, 0.2), 1e-12));
}

TEST_CASE("demand errors", "[demand]") {
    auto apps = table1_apps();
    CHECK_THROWS_AS(demand_curve(apps, "Z", {0.1}), ValidationError);
    CHECK_THROWS_AS(demand_curve(apps, "B", {0.3, 0.1}), ValidationError);
    CHECK_THROWS_AS(demand_curve(apps, "B", {-1.0}), ValidationError);
    apps.applications[0].mask = {{1e6, 0.01, 0.0, 0.02}};
    CHECK_THROWS_AS(demand_curve(apps, "B", {0.1}), InfeasibleError);
    apps.applications.clear();
    CHECK_THROWS_AS(demand_curve(apps, "B", {0.1}), ValidationError);
}

TEST_CASE("supply intersection", "[demand]") {
    const auto d = curve({0.1, 0.3, 0.5, 0.8}, {20, 12, 6, 0});
    SECTION("two tiers") {
        const SupplyCurve s{{{0, 0.5}, {10, 0.3}}};
        const auto hit = intersect_supply(d, s);
        REQUIRE(hit);
        CHECK(hit->quantity == 12);
        CHECK(hit->unit_price == 0.3);
    }
    SECTION("flat below the x-intercept") {
        const SupplyCurve s{{{0, 0.5}}};
        const auto hit = intersect_supply(d, s);
        REQUIRE(hit);
        CHECK(hit->quantity == demand_at(d, 0.5));
    }
    SECTION("flat at or above the x-intercept") {
        CHECK_FALSE(intersect_supply(d, SupplyCurve{{{0, 0.8}}}));
        CHECK_FALSE(intersect_supply(d, SupplyCurve{{{0, 5.0}}}));
    }
    SECTION("bad supply") {
        CHECK_THROWS_AS(intersect_supply(d, SupplyCurve{{{1, 0.5}}}), ValidationError);
        CHECK_THROWS_AS(intersect_supply(d, SupplyCurve{{{0, 0.5}, {0, 0.3}}}), ValidationError);
    }
}

TEST_CASE("savings area", "[demand]") {
    // Q = 3 on [0.2, 0.6), 0 after: 3 * 0.4 = 1.2 cents.
    const auto d = curve({0.2, 0.6}, {3, 0});
    CHECK_THAT(savings_area(d, 0.2), WithinRel(1.2, 1e-12));
    CHECK_THAT(savings_area(d, 0.4), WithinRel(0.6, 1e-12));
    CHECK(savings_area(d, 0.6) == 0.0);
    CHECK(savings_area(d, 2.0) == 0.0);
    CHECK_THAT(savings_area(d, 0.0), WithinRel(1.2, 1e-12));

    const auto stepped = curve({0.1, 0.3, 0.5, 0.8}, {20, 12, 6, 0});
    double last = savings_area(stepped, 0.0);
    for (int p = 1; p <= 10; ++p) {
        const double s = savings_area(stepped, p * 0.1);
        CHECK(s <= last + 1e-12);
        last = s;
    }
    CHECK_THROWS_AS(savings_area(d, -1.0), ValidationError);
}

TEST_CASE("demand serialisation", "[demand]") {
    const auto d = curve({0.1, 0.3}, {5, 0});
    std::ostringstream csv;
    write_demand_csv(csv, d);
    CHECK(csv.str() == "price_cents,quantity\n0.1,5\n0.3,0\n");

    const auto back = demand_from_json(nlohmann::json::parse(demand_to_json(d).dump()));
    CHECK(back.price_grid == d.price_grid);
    CHECK(back.quantities == d.quantities);
    CHECK(back.x_intercept == d.x_intercept);

    const SupplyCurve s{{{0, 0.5}, {10, 0.3}}};
    const auto sback = supply_from_json(nlohmann::json::parse(supply_to_json(s).dump()));
    CHECK(sback.tiers.size() == 2);
    CHECK(sback.tiers[1].unit_price == 0.3);

    CHECK(parse_price_list("0.1,0.3, 1") == std::vector<double>{0.1, 0.3, 1.0});
    CHECK_THROWS_AS(parse_price_list("0.1,x"), ParseError);
}
