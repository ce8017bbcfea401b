#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "dhauds/tables.hpp"

using namespace dhauds;

TEST_CASE("shipped tables pass validation") {
    const auto rep = validate_config(CorruptionTables::defaults());
    for (const auto& v : rep.violations) UNSCOPED_INFO(v);
    REQUIRE(rep.pass);
}

TEST_CASE("default grids match the published settings") {
    const auto t = CorruptionTables::defaults();
    REQUIRE(t.grid(Family::WHN, Level::L1).values == std::vector<double>{6.0, 6.5, 7.0});
    REQUIRE(t.grid(Family::WHN, Level::L2).values ==
            std::vector<double>{5.0, 5.5, 6.0, 6.5, 7.0});
    REQUIRE(t.grid(Family::EN, Level::L1).values == std::vector<double>{5.0, 5.5, 6.0});
    REQUIRE(t.grid(Family::PSH, Level::L2).values == std::vector<double>{-7, -6, -5, 5, 6, 7});
    REQUIRE(t.grid(Family::TST, Level::L2).values ==
            std::vector<double>{-12, -11, -10, -9, -8, 8, 9, 10, 11, 12});
}

TEST_CASE("environmental pools grow strictly from L1 to L2") {
    const auto t = CorruptionTables::defaults();
    for (const std::string id : {"ENQ", "END1", "END2", "ENSC"}) {
        const auto& p1 = t.pool(id, Level::L1).noise_types;
        const auto& p2 = t.pool(id, Level::L2).noise_types;
        REQUIRE(p1.size() < p2.size());
        for (const auto& n : p1) REQUIRE(std::binary_search(p2.begin(), p2.end(), n));
    }
    // White noise keeps the same two generators at both levels.
    REQUIRE(t.pool("WHN", Level::L1).noise_types == t.pool("WHN", Level::L2).noise_types);
    REQUIRE(t.pool("WHN", Level::L1).noise_types ==
            std::vector<std::string>{"Gaussian", "Random"});
}

TEST_CASE("ENSC L2 carries all six short background clips") {
    const auto t = CorruptionTables::defaults();
    const std::set<std::string> expect{"exercise_bike", "running_tap",     "white_noise",
                                       "pink_noise",    "doing_the_dishes", "dude_miaowing"};
    const auto& p2 = t.pool("ENSC", Level::L2).noise_types;
    REQUIRE(std::set<std::string>(p2.begin(), p2.end()) == expect);
}

TEST_CASE("sample_severity draws only grid values and covers the grid") {
    const auto t = CorruptionTables::defaults();
    const auto& grid = t.grid(Family::WHN, Level::L1);
    Rng rng(11);
    std::set<double> seen;
    for (int i = 0; i < 3000; ++i) {
        const double v = sample_severity(grid, rng);
        REQUIRE((v == 6.0 || v == 6.5 || v == 7.0));
        seen.insert(v);
    }
    REQUIRE(seen.size() == 3);

    SeverityGrid single{Family::EN, Level::L1, {5.5}};
    for (int i = 0; i < 10; ++i) REQUIRE(sample_severity(single, rng) == 5.5);

    SeverityGrid empty{Family::EN, Level::L1, {}};
    REQUIRE_THROWS_AS(sample_severity(empty, rng), ConfigError);
}

TEST_CASE("severity draws are uniform within 3 sigma") {
    const auto t = CorruptionTables::defaults();
    const auto& grid = t.grid(Family::PSH, Level::L2);  // 6 values
    Rng rng(17);
    std::map<double, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) counts[sample_severity(grid, rng)]++;
    const double p = 1.0 / static_cast<double>(grid.values.size());
    const double sigma = std::sqrt(n * p * (1 - p));
    for (const double v : grid.values)
        REQUIRE(std::abs(counts[v] - n * p) <= 3.0 * sigma);
}

TEST_CASE("validation names specific violations") {
    auto t = CorruptionTables::defaults();
    t.set_grid(Family::TST, Level::L1, {-2, 0, 2});
    auto rep = validate_config(t);
    REQUIRE_FALSE(rep.pass);
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.find("TST-L1") != std::string::npos && v.find("zero") != std::string::npos)
            found = true;
    REQUIRE(found);

    t = CorruptionTables::defaults();
    t.set_pool("ENQ", Level::L1, {"HOME", "AIRPORT"});  // AIRPORT not in L2
    rep = validate_config(t);
    REQUIRE_FALSE(rep.pass);
    found = false;
    for (const auto& v : rep.violations)
        if (v.find("ENQ") != std::string::npos && v.find("AIRPORT") != std::string::npos)
            found = true;
    REQUIRE(found);

    t = CorruptionTables::defaults();
    t.set_grid(Family::WHN, Level::L1, {6.0, -1.0, 7.0});
    rep = validate_config(t);
    REQUIRE_FALSE(rep.pass);
}

TEST_CASE("tables survive a config file round trip") {
    const auto t = CorruptionTables::defaults();
    const std::string text = t.serialize();
    const auto back = CorruptionTables::parse(split(text, '\n'));
    REQUIRE(back.serialize() == text);
    REQUIRE(back.grid(Family::WHN, Level::L1).values == t.grid(Family::WHN, Level::L1).values);
    REQUIRE(back.pool("ENSC", Level::L2).noise_types == t.pool("ENSC", Level::L2).noise_types);
}
