#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "loadrank/chiller.hpp"
#include "loadrank/error.hpp"

using namespace loadrank;

namespace {

struct Truth {
    double beta0 = 5000.0;
    double beta_out = 200.0;
    std::vector<double> beta_z;

    double power(double tout, const std::vector<double>& sp) const {
        double p = beta0 + beta_out * tout;
        for (std::size_t z = 0; z < sp.size(); ++z) p += beta_z[z] * sp[z];
        return p;
    }
};

std::vector<std::string> zone_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("Z" + std::to_string(i));
    return out;
}

std::vector<ChillerObservation> synth(const Truth& truth, std::size_t samples, double noise_sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tout(24.0, 38.0), sp(19.0, 27.0);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
    std::vector<ChillerObservation> out;
    for (std::size_t k = 0; k < samples; ++k) {
        ChillerObservation o;
        o.timestamp = SimTime::from_minutes(static_cast<std::int64_t>(k) * 5);
        o.outdoor_temp_C = tout(rng);
        for (std::size_t z = 0; z < truth.beta_z.size(); ++z) o.setpoints_C.push_back(sp(rng));
        o.chiller_power_W = truth.power(o.outdoor_temp_C, o.setpoints_C) + (noise_sigma > 0 ? noise(rng) : 0.0);
        out.push_back(o);
    }
    return out;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_SUITE("chiller") {

TEST_CASE("noiseless data is recovered exactly") {
    const Truth truth{5000.0, 200.0, std::vector<double>(4, -150.0)};
    const auto obs = synth(truth, 500, 0.0, 1);
    const auto model = fit_chiller(zone_names(4), obs);
    CHECK(rel(model.beta0, 5000.0) < 1e-6);
    CHECK(rel(model.beta_out, 200.0) < 1e-6);
    for (double b : model.beta_z) CHECK(rel(b, -150.0) < 1e-6);
    CHECK(model.fit_stats.rmse_W < 1e-6);
    CHECK(model.fit_stats.solver == "normal_equations");
    CHECK(model.fit_stats.samples_used == 500);
    CHECK(model.fit_stats.fraction_within_10pct == 1.0);
    for (std::size_t k = 0; k < 20; ++k) {
        CHECK(std::abs(predict_power(model, obs[k].outdoor_temp_C, obs[k].setpoints_C) - obs[k].chiller_power_W) <
              1e-6);
    }
}

TEST_CASE("noisy data within five percent") {
    const Truth truth{5000.0, 200.0, std::vector<double>(3, -150.0)};
    const auto model = fit_chiller(zone_names(3), synth(truth, 2000, 100.0, 2));
    CHECK(rel(model.beta0, 5000.0) < 0.05);
    CHECK(rel(model.beta_out, 200.0) < 0.05);
    for (double b : model.beta_z) CHECK(rel(b, -150.0) < 0.05);
    CHECK(model.fit_stats.rmse_W == doctest::Approx(100.0).epsilon(0.1));
    CHECK(model.fit_stats.rel_error_p05 <= model.fit_stats.rel_error_p50);
    CHECK(model.fit_stats.rel_error_p50 <= model.fit_stats.rel_error_p95);
}

TEST_CASE("residuals are orthogonal to the design") {
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const Truth truth{8000.0, 350.0, {-90.0, -120.0, -200.0, -60.0, -140.0}};
        const auto obs = synth(truth, 1000, 300.0, seed);
        const auto model = fit_chiller(zone_names(5), obs);
        std::vector<double> xtr(7, 0.0);
        double scale = 0.0;
        for (const auto& o : obs) {
            const double r = o.chiller_power_W - predict_power(model, o.outdoor_temp_C, o.setpoints_C);
            xtr[0] += r;
            xtr[1] += r * o.outdoor_temp_C;
            for (std::size_t z = 0; z < 5; ++z) xtr[2 + z] += r * o.setpoints_C[z];
            scale += std::abs(o.chiller_power_W) * o.outdoor_temp_C;
        }
        for (double v : xtr) CHECK(std::abs(v) / scale < 1e-6);
    }
}

TEST_CASE("collinear design is rejected") {
    const Truth truth{5000.0, 200.0, {-150.0, -150.0}};
    auto obs = synth(truth, 200, 0.0, 3);
    SUBCASE("constant set-point") {
        for (auto& o : obs) o.setpoints_C[1] = 22.0;
        try {
            fit_chiller(zone_names(2), obs);
            FAIL("expected IdentifiabilityError");
        } catch (const IdentifiabilityError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("intercept") != std::string::npos);
            CHECK(msg.find("setpoint_Z1_C") != std::string::npos);
            CHECK(msg.find("setpoint_Z0_C") == std::string::npos);
        }
    }
    SUBCASE("two zones moving together") {
        for (auto& o : obs) o.setpoints_C[1] = o.setpoints_C[0];
        CHECK_THROWS_AS(fit_chiller(zone_names(2), obs), IdentifiabilityError);
    }
}

TEST_CASE("ill conditioned but full rank falls back to QR") {
    const Truth truth{5000.0, 200.0, {-150.0, -100.0}};
    auto obs = synth(truth, 400, 0.0, 4);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> tiny(-1e-3, 1e-3);
    for (auto& o : obs) {
        o.setpoints_C[1] = o.setpoints_C[0] + tiny(rng);
        o.chiller_power_W = truth.power(o.outdoor_temp_C, o.setpoints_C);
    }
    const auto model = fit_chiller(zone_names(2), obs);
    CHECK(model.fit_stats.solver == "column_pivoted_qr");
    CHECK(model.fit_stats.condition_number > 1e8);
    CHECK(rel(model.beta_z[0], -150.0) < 1e-4);
    CHECK(rel(model.beta_z[1], -100.0) < 1e-4);
}

TEST_CASE("temperature filter and sample count") {
    const Truth truth{5000.0, 200.0, {-150.0}};
    auto obs = synth(truth, 100, 0.0, 5);
    for (std::size_t k = 0; k < 40; ++k) obs[k].outdoor_temp_C = 15.0;
    const auto model = fit_chiller(zone_names(1), obs);
    CHECK(model.fit_stats.samples_used == 60);
    CHECK(model.fit_stats.samples_filtered == 40);
    REQUIRE(model.fit_stats.min_outdoor_temp_C.has_value());
    CHECK(*model.fit_stats.min_outdoor_temp_C == 24.0);

    obs.resize(25);
    ChillerFitOptions keep_all;
    keep_all.min_outdoor_temp_C.reset();
    CHECK_THROWS_AS(fit_chiller(zone_names(1), obs), ValidationError);
    CHECK_NOTHROW(fit_chiller(zone_names(1), synth(truth, 30, 0.0, 6), keep_all));
    CHECK_THROWS_AS(fit_chiller(zone_names(2), synth(truth, 30, 0.0, 6)), ValidationError);
}

TEST_CASE("prediction and set-point deltas") {
    ChillerModel zero;
    zero.zone_ids = {"A", "B"};
    zero.beta_z = {0.0, 0.0};
    CHECK(predict_power(zero, 33.0, {21.0, 24.0}) == 0.0);

    ChillerModel m = zero;
    m.beta0 = 1000.0;
    CHECK(predict_power(m, -5.0, {30.0, 10.0}) == 1000.0);
    CHECK_THROWS_AS(predict_power(m, 30.0, {22.0}), ValidationError);

    m.beta_z = {-150.0, -80.0};
    CHECK(setpoint_power_delta(m, "A", 0.0) == 0.0);
    CHECK(setpoint_power_delta(m, "A", 2.0) == -300.0);
    CHECK(setpoint_power_delta(m, "B", 3.0) == 2 * setpoint_power_delta(m, "B", 1.5));
    CHECK_THROWS_AS(setpoint_power_delta(m, "C", 1.0), ValidationError);
}

TEST_CASE("csv round trip") {
    const Truth truth{5000.0, 200.0, {-150.0, -120.0}};
    const auto obs = synth(truth, 30, 0.0, 7);
    std::stringstream ss;
    write_chiller_csv(ss, zone_names(2), obs);
    const auto back = read_chiller_csv(ss, zone_names(2));
    REQUIRE(back.size() == obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
        CHECK(back[k].timestamp == obs[k].timestamp);
        CHECK(back[k].chiller_power_W == doctest::Approx(obs[k].chiller_power_W).epsilon(1e-12));
        CHECK(back[k].outdoor_temp_C == doctest::Approx(obs[k].outdoor_temp_C).epsilon(1e-12));
        CHECK(back[k].setpoints_C[1] == doctest::Approx(obs[k].setpoints_C[1]).epsilon(1e-12));
    }

    std::stringstream extra("timestamp,outdoor_temp_C,chiller_power_W,temp_Z0_C,setpoint_Z0_C\n"
                            "2021-07-05T00:00:00,30,9000,23.5,22\n");
    const auto e = read_chiller_csv(extra, {"Z0"});
    REQUIRE(e.size() == 1);
    CHECK(e[0].setpoints_C[0] == 22.0);
    std::stringstream missing("timestamp,outdoor_temp_C,chiller_power_W\n");
    CHECK_THROWS_AS(read_chiller_csv(missing, {"Z0"}), ValidationError);
}

}
