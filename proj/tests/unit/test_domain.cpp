#include <doctest.h>

#include <random>
#include <set>
#include <string>

#include "loadrank/domain.hpp"
#include "loadrank/error.hpp"

using namespace loadrank;

namespace {

Building one_plug_building() {
    Building b;
    b.id = "b";
    Zone z;
    z.id = "Z";
    z.floor_id = "F";
    z.appliances.push_back({"Z/pc", "Z", ApplianceKind::PlugLoad, 60.0, plug_settings()});
    b.floors.push_back({"F", {z}});
    return b;
}

std::string message_of(const Building& b) {
    try {
        validate_building(b);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::string message_of(const CriteriaConfig& c) {
    try {
        validate_criteria(c);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("domain") {

TEST_CASE("setting grids") {
    const auto hvac = hvac_offset_settings();
    REQUIRE(hvac.size() == 11);
    CHECK(hvac.front().value == -5.0);
    CHECK(hvac.back().value == 5.0);
    CHECK(hvac[5].baseline);
    CHECK(hvac[5].value == 0.0);

    const auto light = dimming_settings();
    REQUIRE(light.size() == 6);
    CHECK(light[1].value == doctest::Approx(0.2));
    CHECK(light.back().baseline);

    const auto plug = plug_settings();
    REQUIRE(plug.size() == 2);
    CHECK(plug[1].baseline);
}

TEST_CASE("enumeration counts") {
    CHECK(enumerate_alternatives(one_plug_building()).size() == 2);

    const Building ref = make_reference_building();
    CHECK(ref.zone_count() == 15);
    CHECK(enumerate_alternatives(ref).size() == 285);
    CHECK(enumerate_alternatives(ref, {.exclude_baseline = true}).size() == 240);

    Building empty = one_plug_building();
    empty.floors[0].zones[0].appliances.clear();
    CHECK(enumerate_alternatives(empty).empty());
}

TEST_CASE("enumeration order and labels") {
    const auto alts = enumerate_alternatives(make_reference_building());
    CHECK(alts.front().appliance_id == "F1-N/hvac");
    CHECK(alts.front().setting_index == 0);
    CHECK(alts.front().label() == "F1-N/hvac=-5C");
    CHECK(alts[7].label() == "F1-N/hvac=+2C");
    CHECK(alts[11].label() == "F1-N/light=0%");
    CHECK(alts[16].label() == "F1-N/light=100%");
    CHECK(alts[17].label() == "F1-N/pc=off");
    CHECK(alts[19].zone_id == "F1-E");
    CHECK(alts.back().label() == "F3-C/pc=on");
    CHECK(enumerate_alternatives(make_reference_building()) == alts);

    std::set<std::pair<std::string, std::size_t>> seen;
    for (const auto& a : alts) CHECK(seen.insert({a.appliance_id, a.setting_index}).second);
}

TEST_CASE("alternative count equals the sum of setting counts") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Building b;
        b.id = "rand";
        std::size_t expected = 0;
        std::size_t expected_no_base = 0;
        const int floors = 1 + static_cast<int>(rng() % 3);
        for (int f = 0; f < floors; ++f) {
            Floor floor{"F" + std::to_string(f), {}};
            const int zones = 1 + static_cast<int>(rng() % 4);
            for (int zi = 0; zi < zones; ++zi) {
                Zone z;
                z.id = floor.id + "Z" + std::to_string(zi);
                z.floor_id = floor.id;
                if (rng() % 2) {
                    const double max_off = 1.0 + static_cast<double>(rng() % 5);
                    z.appliances.push_back(
                        {z.id + "/hvac", z.id, ApplianceKind::HvacSetpoint, 0.0, hvac_offset_settings(max_off)});
                }
                const int lights = static_cast<int>(rng() % 3);
                for (int l = 0; l < lights; ++l) {
                    std::vector<ControlSetting> levels;
                    for (int k = 0; k < 5; ++k) {
                        if (rng() % 2) levels.push_back({0.2 * k, false});
                    }
                    levels.push_back({1.0, true});
                    z.appliances.push_back(
                        {z.id + "/l" + std::to_string(l), z.id, ApplianceKind::DimmableLight, 100.0 + 50.0 * l, levels});
                }
                const int plugs = static_cast<int>(rng() % 3);
                for (int p = 0; p < plugs; ++p) {
                    z.appliances.push_back(
                        {z.id + "/p" + std::to_string(p), z.id, ApplianceKind::PlugLoad, 60.0, plug_settings()});
                }
                for (const auto& a : z.appliances) {
                    expected += a.settings.size();
                    expected_no_base += a.settings.size() - 1;
                }
                floor.zones.push_back(z);
            }
            b.floors.push_back(floor);
        }
        CHECK(enumerate_alternatives(b).size() == expected);
        CHECK(enumerate_alternatives(b, {.exclude_baseline = true}).size() == expected_no_base);
    }
}

TEST_CASE("appliance power") {
    const Building b = make_reference_building();
    const Appliance* light = b.find_appliance("F2-S/light");
    REQUIRE(light != nullptr);
    CHECK(light->power_at(4) == doctest::Approx(320.0));
    CHECK(light->baseline_index() == 5);
    const Appliance* hvac = b.find_appliance("F2-S/hvac");
    REQUIRE(hvac != nullptr);
    CHECK(hvac->power_at(8) == 0.0);
    CHECK_THROWS_AS(light->power_at(6), ValidationError);
    CHECK(b.find_appliance("nope") == nullptr);
    CHECK(b.find_zone("F3-W") != nullptr);
}

TEST_CASE("building validation names the offender") {
    Building b = one_plug_building();
    CHECK(message_of(b).empty());

    SUBCASE("duplicate zone") {
        b.floors[0].zones.push_back(b.floors[0].zones[0]);
        b.floors[0].zones[1].appliances[0].id = "other";
        CHECK(message_of(b).find("duplicate zone id 'Z'") != std::string::npos);
    }
    SUBCASE("no floors") {
        b.floors.clear();
        CHECK_THROWS_AS(validate_building(b), ValidationError);
    }
    SUBCASE("empty floor") {
        b.floors[0].zones.clear();
        CHECK(message_of(b).find("floor 'F'") != std::string::npos);
    }
    SUBCASE("comfort alpha") {
        b.floors[0].zones[0].comfort_alpha = 1.0;
        CHECK(message_of(b).find("zone 'Z'") != std::string::npos);
    }
    SUBCASE("comfort delta") {
        b.floors[0].zones[0].comfort_delta_C = 0.0;
        CHECK(message_of(b).find("comfort_delta_C") != std::string::npos);
    }
    SUBCASE("two baselines") {
        b.floors[0].zones[0].appliances[0].settings[0].baseline = true;
        CHECK(message_of(b).find("Z/pc") != std::string::npos);
    }
    SUBCASE("plug with a third setting") {
        b.floors[0].zones[0].appliances[0].settings.push_back({0.5, false});
        CHECK(message_of(b).find("Z/pc") != std::string::npos);
    }
    SUBCASE("hvac offset off the grid") {
        b.floors[0].zones[0].appliances.push_back(
            {"Z/hvac", "Z", ApplianceKind::HvacSetpoint, 0.0, {{0.0, true}, {6.0, false}}});
        CHECK(message_of(b).find("Z/hvac") != std::string::npos);
        b.floors[0].zones[0].appliances.back().settings[1].value = 1.5;
        CHECK(message_of(b).find("Z/hvac") != std::string::npos);
    }
    SUBCASE("light level off the grid") {
        b.floors[0].zones[0].appliances.push_back(
            {"Z/light", "Z", ApplianceKind::DimmableLight, 100.0, {{0.5, false}, {1.0, true}}});
        CHECK(message_of(b).find("Z/light") != std::string::npos);
    }
    SUBCASE("rated power") {
        b.floors[0].zones[0].appliances[0].rated_power_W = 0.0;
        CHECK(message_of(b).find("rated_power_W") != std::string::npos);
    }
    SUBCASE("appliance in the wrong zone") {
        b.floors[0].zones[0].appliances[0].zone_id = "Q";
        CHECK(message_of(b).find("Z/pc") != std::string::npos);
    }
    SUBCASE("enumeration validates") {
        b.floors[0].zones[0].appliances[0].settings.clear();
        CHECK_THROWS_AS(enumerate_alternatives(b), ValidationError);
    }
}

TEST_CASE("criteria validation") {
    CHECK_NOTHROW(validate_criteria(CriteriaConfig{}));
    CHECK_NOTHROW(validate_criteria({{"comfort", "curtailment"}, {0.6, 0.4}, 0.75}));

    const auto sum = message_of(CriteriaConfig{{"comfort", "curtailment"}, {0.7, 0.4}, 0.75});
    CHECK(sum.find("sum to 1") != std::string::npos);
    CHECK(sum.find("1.1") != std::string::npos);

    const auto lo = message_of(CriteriaConfig{{"comfort", "curtailment"}, {0.6, 0.4}, 0.5});
    CHECK(lo.find("(0.5, 1)") != std::string::npos);
    CHECK_THROWS_AS(validate_criteria({{"comfort", "curtailment"}, {0.6, 0.4}, 1.0}), ValidationError);
    CHECK_THROWS_AS(validate_criteria({{"comfort", "curtailment"}, {1.2, -0.2}, 0.75}), ValidationError);
    CHECK_THROWS_AS(validate_criteria({{"comfort"}, {0.6, 0.4}, 0.75}), ValidationError);
    CHECK_THROWS_AS(validate_criteria({{}, {}, 0.75}), ValidationError);
    CHECK_THROWS_AS(validate_criteria({{}, std::vector<double>(33, 1.0 / 33), 0.75}), ValidationError);
    CHECK_NOTHROW(validate_criteria({{}, {1.0, 0.0}, 0.75}));
}

TEST_CASE("appliance kind strings") {
    for (auto k : {ApplianceKind::HvacSetpoint, ApplianceKind::DimmableLight, ApplianceKind::PlugLoad}) {
        CHECK(appliance_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(appliance_kind_from_string("toaster"), ValidationError);
}

}
