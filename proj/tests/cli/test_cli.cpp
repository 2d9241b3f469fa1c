#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "loadrank/serialization.hpp"

namespace fs = std::filesystem;
using loadrank::Json;

namespace {

const fs::path kData = LOADRANK_TEST_DATA_DIR;
const fs::path kWork = LOADRANK_TEST_WORK_DIR;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run cli(const std::string& args) {
    fs::create_directories(kWork);
    const auto out = kWork / "stdout.txt";
    const auto err = kWork / "stderr.txt";
    const std::string cmd = std::string("\"") + LOADRANK_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string data(const char* name) { return "\"" + (kData / name).string() + "\""; }
std::string work(const std::string& name) { return "\"" + (kWork / name).string() + "\""; }

}  // namespace

TEST_CASE("rank orders a dominance chain") {
    const auto r = cli("rank --config " + data("dominance_building.json") +
                       " --exclude-baseline --occupied-prob A=0 B=1 C=1");
    REQUIRE(r.code == 0);
    const Json j = loadrank::parse_json(r.out);
    const auto& alts = j.at("alternatives");
    REQUIRE(alts.size() == 3);
    CHECK(alts[0].at("label") == "A/plug=off");
    CHECK(alts[1].at("label") == "B/light=60%");
    CHECK(alts[2].at("label") == "C/light=20%");
    CHECK(alts[0].at("fitness").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(alts[1].at("fitness").get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(alts[2].at("fitness").get<double>() == doctest::Approx(0.0));
    CHECK(alts[0].at("rank") == 1);
    CHECK(alts[0].at("reduction_W") == 1000.0);
    CHECK(j.at("scale").at("p_min_W") == 160.0);
}

TEST_CASE("rank on the reference building") {
    const auto r = cli("rank --time 10:00 --weights 0.6,0.4 --nu 0.8");
    REQUIRE(r.code == 0);
    const Json j = loadrank::parse_json(r.out);
    CHECK(j.at("alternatives").size() == 285);
    CHECK(j.at("time") == "2021-07-05T10:00:00");
    CHECK(j.at("chiller_source") == "plant");
    CHECK(j.at("criteria").at("nu") == 0.8);
    CHECK(cli("rank --time 10:00").out == cli("rank --time 10:00").out);
}

TEST_CASE("argument errors") {
    auto r = cli("rank --weights 0.7,0.4");
    CHECK(r.code != 0);
    CHECK(r.err.find("weights must sum to 1") != std::string::npos);
    CHECK(cli("rank --weights a,b").code != 0);
    CHECK(cli("rank --nu 0.5").code != 0);
    CHECK(cli("rank --occupied-prob F1-N=2").code != 0);
    CHECK(cli("rank --occupied-prob nowhere=0.5").code != 0);
    CHECK(cli("rank --config " + data("missing.json")).code != 0);
    r = cli("generate-data --days 0 --out " + work("never"));
    CHECK(r.code != 0);
    CHECK(r.err.find("--days") != std::string::npos);
    CHECK_FALSE(fs::exists(kWork / "never"));
    CHECK(cli("fit").code != 0);
    CHECK(cli("run-event --target lots").code != 0);
    CHECK(cli("run-event --start 10:00 --end 09:00").code != 0);
    CHECK(cli("").code != 0);
}

TEST_CASE("generate, fit, rank and run an event") {
    const std::string building = " --config " + data("two_zone_building.json");
    fs::remove_all(kWork / "gen");
    auto r = cli("generate-data --days 8 --seed 3 --out " + work("gen") + building);
    REQUIRE(r.code == 0);
    CHECK(fs::file_size(kWork / "gen" / "measurements.csv") > 0);
    CHECK(fs::file_size(kWork / "gen" / "occupancy.csv") > 0);

    r = cli("fit --data " + work("gen") + " --out " + work("models") + building);
    REQUIRE(r.code == 0);
    const Json summary = loadrank::parse_json(r.out);
    CHECK(summary.at("occupancy_zones") == 2);
    CHECK(summary.at("chiller_fit").at("solver") == "normal_equations");
    const auto chiller = loadrank::chiller_model_from_json(loadrank::parse_json(slurp(kWork / "models" / "chiller.json")));
    CHECK(chiller.beta_z[0] == doctest::Approx(-142.857).epsilon(0.1));
    CHECK(cli("fit --data " + work("gen") + " --min-days 30 --out " + work("models_short") + building).code != 0);

    r = cli("rank --models " + work("models") + " --time 11:00" + building);
    REQUIRE(r.code == 0);
    CHECK(loadrank::parse_json(r.out).at("chiller_source") == "fitted");

    const std::string event = "run-event --models " + work("models") +
                              " --start 09:00 --end 11:00 --target 600 --seed 5" + building;
    REQUIRE(cli(event + " --out " + work("report_a.json")).code == 0);
    REQUIRE(cli(event + " --out " + work("report_b.json")).code == 0);
    const auto a = slurp(kWork / "report_a.json");
    CHECK(a == slurp(kWork / "report_b.json"));
    const Json report = loadrank::parse_json(a);
    CHECK(report.at("status") == "completed");
    CHECK(report.at("plans").size() == 24);
    CHECK(report.at("event").at("target_reduction_W") == 600.0);
    CHECK(report.at("restore").at("restored") == true);
}

TEST_CASE("run-event trains its own models when none are given") {
    const auto r = cli("run-event --config " + data("two_zone_building.json") +
                       " --start 10:00 --end 10:30 --train-days 8");
    REQUIRE(r.code == 0);
    CHECK(loadrank::parse_json(r.out).at("plans").size() == 6);
    CHECK(r.err.find("restored=yes") != std::string::npos);
}
