// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loadrank/chiller.hpp"
#include "loadrank/controller.hpp"
#include "loadrank/mcdm.hpp"
#include "loadrank/occupancy.hpp"
#include "loadrank/scoring.hpp"
#include "loadrank/serialization.hpp"

using namespace loadrank;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s [%s] (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1

Outcome scoring_conformance() {
    const double at_set = comfort_hvac(22, 22, 3, 10);
    const double cold = comfort_hvac(19, 22, 3, 10);
    const double warm = comfort_hvac(25, 22, 3, 10);
    bool ok = std::abs(at_set - 1.0) <= 1e-6 && std::abs(cold - 0.59901) <= 1e-6 && std::abs(warm - 0.59901) <= 1e-6 &&
              std::abs(cold - warm) <= 1e-12;
    double worst_endpoint = 0.0;
    for (double alpha2 : {1.5, 2.0, 4.0, 10.0}) {
        for (auto [lo, hi] : {std::pair{80.0, 2857.0}, std::pair{1.0, 1e6}, std::pair{150.0, 151.0}}) {
            const CurtailmentScaleParams scale{alpha2, hi, lo};
            worst_endpoint = std::max(worst_endpoint, std::abs(curtailment_score(hi, scale).value - 1.0));
            worst_endpoint = std::max(worst_endpoint, std::abs(curtailment_score(lo, scale).value - 1.0 / alpha2));
        }
    }
    ok = ok && worst_endpoint <= 1e-12;
    return {ok, fmt("C(22)=%.9f C(19)=%.9f C(25)=%.9f, worst endpoint error %.1e", at_set, cold, warm, worst_endpoint)};
}

// ---- 2, 3

ScoreDistribution random_distribution(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(1, 4);
    std::uniform_int_distribution<int> value(0, 20);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::vector<ScoreAtom> atoms(static_cast<std::size_t>(size(rng)));
    double total = 0.0;
    for (auto& a : atoms) {
        a = {value(rng) / 20.0, weight(rng)};
        total += a.prob;
    }
    for (auto& a : atoms) a.prob /= total;
    return ScoreDistribution::from_atoms(atoms);
}

std::vector<CriterionScores> random_instance(std::mt19937_64& rng, std::size_t n, std::size_t criteria) {
    std::vector<CriterionScores> out(n);
    for (auto& alt : out) {
        for (std::size_t a = 0; a < criteria; ++a) alt.push_back(random_distribution(rng));
    }
    return out;
}

CriteriaConfig random_config(std::mt19937_64& rng, std::size_t criteria) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    CriteriaConfig c;
    c.criteria.clear();
    c.weights.clear();
    for (std::size_t a = 0; a < criteria; ++a) {
        c.criteria.push_back("c" + std::to_string(a));
        c.weights.push_back(u(rng));
    }
    const double total = std::accumulate(c.weights.begin(), c.weights.end(), 0.0);
    for (auto& w : c.weights) w /= total;
    c.threshold = std::uniform_real_distribution<double>(0.55, 0.95)(rng);
    return c;
}

struct Instance {
    std::vector<CriterionScores> scores;
    CriteriaConfig config;
};

std::vector<Instance> enumerable_instances() {
    std::mt19937_64 rng(20210705);
    std::vector<Instance> out;
    for (int i = 0; i < 200; ++i) {
        const auto n = static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 6)(rng));
        const std::size_t a = i % 2 == 0 ? 2 : 3;
        auto config = random_config(rng, a);
        out.push_back({random_instance(rng, n, a), std::move(config)});
    }
    return out;
}

Outcome oracle_equivalence(const std::vector<Instance>& instances) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    bool order_ok = true;
    for (const auto& in : instances) {
        const auto fast = rank(in.scores, in.config);
        const auto slow = brute_force_rank(in.scores, in.config);
        for (std::size_t n = 0; n < in.scores.size(); ++n) {
            worst = std::max(worst, std::abs(fast.fitness[n] - slow.fitness[n]));
            for (std::size_t m = 0; m < in.scores.size(); ++m) {
                worst = std::max(worst, std::abs(fast.superiority[n][m] - slow.superiority[n][m]));
            }
        }
        for (std::size_t k = 1; k < fast.order.size(); ++k) {
            if (fast.fitness[fast.order[k - 1]] < fast.fitness[fast.order[k]] - 1e-12) order_ok = false;
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && order_ok && secs < 10.0,
            fmt("%.0f instances, max |rank - brute force| = %.2e, %.3f s", static_cast<double>(instances.size()), worst,
                secs)};
}

Outcome fitness_bound(const std::vector<Instance>& instances) {
    double worst = -1.0;
    std::size_t checked = 0;
    for (const auto& in : instances) {
        const auto f = rank(in.scores, in.config).fitness;
        const auto sim = simultaneous_win_probability(in.scores, in.config);
        for (std::size_t n = 0; n < f.size(); ++n) {
            worst = std::max(worst, sim[n] - f[n]);
            ++checked;
        }
    }
    return {worst <= 1e-9, fmt("%.0f alternatives, max (P(simultaneous win) - f) = %.3e", static_cast<double>(checked),
                               worst)};
}

// ---- 4

Outcome hand_classification() {
    const CriteriaConfig config{{"comfort", "curtailment"}, {0.6, 0.4}, 0.75};
    const auto c = classify_outcomes({0, 1, {0.5, 0.5}}, config);
    bool ok = c.p_most_preferable == 0.25 && c.p_indifferent == 0.5 && c.p_not_preferable == 0.25 &&
              c.superiority() == 0.5;
    // Same numbers through the full ranking: identical score distributions.
    const auto d = ScoreDistribution::from_atoms({{0.2, 0.5}, {0.8, 0.5}});
    const auto r = rank({{d, d}, {d, d}}, config);
    ok = ok && r.superiority[0][1] == 0.5 && r.fitness[0] == 0.5 && r.fitness[1] == 0.5;
    return {ok, fmt("S1=%.17g S2=%.17g S3=%.17g r=%.17g", c.p_most_preferable, c.p_indifferent, c.p_not_preferable,
                    c.superiority())};
}

// ---- 5

Outcome ranking_performance() {
    std::mt19937_64 rng(5);
    const auto scores = random_instance(rng, 120, 2);
    const CriteriaConfig config{{"comfort", "curtailment"}, {0.6, 0.4}, 0.75};
    std::vector<double> ms;
    for (int i = 0; i < 20; ++i) {
        const auto t0 = Clock::now();
        const auto r = rank(scores, config);
        ms.push_back(seconds_since(t0) * 1e3);
        if (r.order.size() != 120) return {false, "wrong ranking size"};
    }
    std::sort(ms.begin(), ms.end());
    const double median = 0.5 * (ms[9] + ms[10]);
    return {median <= 100.0, fmt("N=120 A=2: median %.3f ms, max %.3f ms over 20 runs", median, ms.back())};
}

// ---- 6

struct SyntheticChiller {
    std::vector<std::string> zones;
    double beta0 = 0.0;
    double beta_out = 0.0;
    std::vector<double> beta_z;
};

SyntheticChiller truth(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SyntheticChiller t;
    t.beta0 = 40000.0;
    t.beta_out = 1000.0;
    std::uniform_real_distribution<double> bz(-180.0, -120.0);
    for (int z = 0; z < 15; ++z) {
        t.zones.push_back("Z" + std::to_string(z + 1));
        t.beta_z.push_back(bz(rng));
    }
    return t;
}

std::vector<ChillerObservation> observations(const SyntheticChiller& t, std::uint64_t seed, std::size_t count,
                                             double noise) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> outdoor(24.0, 38.0);
    std::uniform_real_distribution<double> setpoint(20.0, 26.0);
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<ChillerObservation> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto& o = out[i];
        o.timestamp = SimTime{static_cast<std::int64_t>(i) * 300};
        o.outdoor_temp_C = outdoor(rng);
        double p = t.beta0 + t.beta_out * o.outdoor_temp_C;
        for (double b : t.beta_z) {
            o.setpoints_C.push_back(setpoint(rng));
            p += b * o.setpoints_C.back();
        }
        o.chiller_power_W = p * (1.0 + noise * eps(rng));
    }
    return out;
}

std::vector<double> relative_errors(const SyntheticChiller& t, const ChillerModel& m) {
    std::vector<double> e{(m.beta0 - t.beta0) / t.beta0, (m.beta_out - t.beta_out) / t.beta_out};
    for (std::size_t z = 0; z < t.beta_z.size(); ++z) e.push_back((m.beta_z[z] - t.beta_z[z]) / t.beta_z[z]);
    return e;
}

Outcome chiller_recovery() {
    double noiseless = 0.0;
    {
        const auto t = truth(1);
        const auto m = fit_chiller(t.zones, observations(t, 2, 2000, 0.0));
        for (double e : relative_errors(t, m)) noiseless = std::max(noiseless, std::abs(e));
    }
    double worst = 0.0;
    double worst_within = 1.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto t = truth(100 + seed);
        const auto m = fit_chiller(t.zones, observations(t, seed, 100000, 0.05));
        for (double e : relative_errors(t, m)) worst = std::max(worst, std::abs(e));
        worst_within = std::min(worst_within, m.fit_stats.fraction_within_10pct);
    }
    return {noiseless <= 1e-6 && worst <= 0.05 && worst_within >= 0.9,
            fmt("noiseless max rel err %.2e; 5%% noise, 20 seeds: max coefficient rel err %.4f, "
                "min share of predictions within 10%% %.4f",
                noiseless, worst, worst_within)};
}

// ---- 7

OccupancyModel known_chain() {
    OccupancyModel m;
    m.zone_id = "Z";
    m.duration_buckets = {};
    for (int w = 0; w < 48; ++w) {
        const double phase = 2.0 * 3.14159265358979 * w / 48.0;
        const double p01 = 0.03 + 0.05 * (0.5 + 0.5 * std::sin(phase));
        const double p10 = 0.03 + 0.05 * (0.5 + 0.5 * std::cos(phase));
        TransitionMatrix t(2);
        t(0, 0) = 1.0 - p01;
        t(0, 1) = p01;
        t(1, 0) = p10;
        t(1, 1) = 1.0 - p10;
        m.windows.push_back(t);
    }
    return m;
}

Outcome occupancy_round_trip() {
    const auto t0 = Clock::now();
    const auto chain = known_chain();
    OccupancyFitOptions two_state;
    two_state.duration_buckets = {};
    const auto fitted = fit_occupancy(simulate(chain, 7, 200), two_state);
    double worst_entry = 0.0;
    for (std::size_t w = 0; w < chain.windows.size(); ++w) {
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                worst_entry = std::max(worst_entry, std::abs(fitted.windows[w](i, j) - chain.windows[w](i, j)));
            }
        }
    }

    const auto training = generate_office_trace("Z", {}, 11, 200);
    const auto replay = simulate(fit_occupancy(training), 12, 200);
    const auto a = daily_occupancy_profile(training);
    const auto b = daily_occupancy_profile(replay);
    double mae = 0.0;
    for (std::size_t w = 0; w < a.size(); ++w) mae += std::abs(a[w] - b[w]);
    mae /= static_cast<double>(a.size());
    const double secs = seconds_since(t0);
    return {worst_entry <= 0.05 && mae <= 0.05 && secs < 30.0,
            fmt("max transition entry error %.4f; office trace daily-profile MAE %.4f; %.2f s", worst_entry, mae,
                secs)};
}

// ---- 8, 9

struct ClosedLoop {
    Building building;
    ScenarioConfig scenario;
    ControllerModels models;
    CurtailmentEvent event;
    CriteriaConfig criteria{{"comfort", "curtailment"}, {0.6, 0.4}, 0.75};
};

ClosedLoop closed_loop_setup() {
    ClosedLoop c;
    c.building = make_reference_building();
    c.scenario.seed = 2021;
    // Models are fitted on two weeks of data from a separately seeded run.
    ScenarioConfig train = c.scenario;
    train.seed = 77;
    Emulator trainer(c.building, train);
    HistoryOptions h;
    h.days = 14;
    c.models = fit_models(c.building, generate_history(trainer, h));
    c.event.id = "dr";
    c.event.start = SimTime::at(0, 8);
    c.event.end = SimTime::at(0, 16);
    c.event.target_reduction_W = kUnlimitedTarget;
    c.event.min_fitness = 0.5;
    return c;
}

EventReport run_closed_loop(const ClosedLoop& c) {
    Emulator e(c.building, c.scenario);
    return run_event(e, c.event, c.models, c.criteria);
}

// Runs under comfort-only weights and checks each decision against the live
// occupancy it was made on.
std::string occupied_pc_violations(const ClosedLoop& c, std::size_t& decisions, std::size_t& occupied_decisions) {
    CriteriaConfig comfort_only = c.criteria;
    comfort_only.weights = {1.0, 0.0};
    Emulator e(c.building, c.scenario);
    while (e.state().sim_clock < c.event.start) e.step();
    EventRun run(c.event, e, c.models, comfort_only);
    std::ostringstream problems;
    while (!run.finished()) {
        const auto snap = e.snapshot();
        const auto before = run.report().plans.size();
        run.before_step(e);
        if (run.report().plans.size() > before) {
            const auto& plan = run.report().plans.back();
            std::set<std::string> occupied;
            for (const auto& z : snap.zones) {
                if (z.occupied) occupied.insert(z.zone_id);
            }
            if (plan.reason == "ok") ++decisions;
            if (!occupied.empty()) ++occupied_decisions;
            std::set<std::string> claimed;
            for (const auto& sel : plan.selected) claimed.insert(sel.alternative.appliance_id);
            bool unoccupied_left = false;
            for (std::size_t k = 0; k < plan.ranking.ranked.size(); ++k) {
                const auto& ra = plan.ranking.ranked[k];
                if (occupied.contains(ra.alternative.zone_id) || ra.reduction_W <= 0.0) continue;
                if (plan.status[k] != SelectionStatus::Selected && !claimed.contains(ra.alternative.appliance_id)) {
                    unoccupied_left = true;
                }
            }
            for (const auto& sel : plan.selected) {
                const auto& a = sel.alternative;
                if (a.kind == ApplianceKind::PlugLoad && a.setting_value == 0.0 && occupied.contains(a.zone_id) &&
                    unoccupied_left) {
                    problems << ' ' << a.label() << '@' << to_iso8601(plan.step_time);
                }
            }
        }
        e.step();
        run.after_step(e);
    }
    return problems.str();
}

Outcome closed_loop(const ClosedLoop& c, const EventReport& r) {
    const auto t0 = Clock::now();
    if (r.status != "completed") return {false, "event status " + r.status};

    // (a)
    double worst_excess = -1e300;
    for (const auto& p : r.series) {
        worst_excess = std::max(worst_excess, p.total_power_W - p.baseline_power_W);
    }
    const bool a = worst_excess <= 2.0 * r.noise_sigma_W;

    // (b) split event hours at the median hourly occupancy
    std::map<std::int64_t, std::pair<double, double>> hourly;  // hour -> (occupancy sum, reduction sum)
    std::map<std::int64_t, int> counts;
    for (const auto& p : r.series) {
        if (p.time <= c.event.start || c.event.end < p.time) continue;
        const auto hour = (p.time.seconds - 1 - c.event.start.seconds) / 3600;
        hourly[hour].first += p.occupied_fraction;
        hourly[hour].second += p.achieved_reduction_W();
        ++counts[hour];
    }
    std::vector<double> occ;
    for (auto& [h, v] : hourly) {
        v.first /= counts[h];
        v.second /= counts[h];
        occ.push_back(v.first);
    }
    std::sort(occ.begin(), occ.end());
    const double median = occ.size() % 2 ? occ[occ.size() / 2] : 0.5 * (occ[occ.size() / 2 - 1] + occ[occ.size() / 2]);
    double low = 0.0, high = 0.0;
    int n_low = 0, n_high = 0;
    for (const auto& [h, v] : hourly) {
        if (v.first < median) {
            low += v.second;
            ++n_low;
        } else if (v.first > median) {
            high += v.second;
            ++n_high;
        }
    }
    low /= std::max(n_low, 1);
    high /= std::max(n_high, 1);
    const bool b = n_low > 0 && n_high > 0 && low >= high;

    // (c)
    std::size_t decisions = 0, occupied_decisions = 0;
    const auto violations = occupied_pc_violations(c, decisions, occupied_decisions);
    const bool cc = violations.empty() && occupied_decisions > 0;

    // (d)
    const bool d = r.restored && r.restore_checked_at.has_value() &&
                   *r.restore_checked_at <= c.event.end + 5 * kSecondsPerMinute;

    const double secs = seconds_since(t0);
    std::string detail =
        fmt("(a) max excess over baseline %.1f W vs 2 sigma %.1f W; (b) low-occupancy hours %.0f W, high %.0f W",
            worst_excess, 2.0 * r.noise_sigma_W, low, high) +
        fmt("; (c) %.0f decisions, %.0f with occupied zones", static_cast<double>(decisions),
            static_cast<double>(occupied_decisions)) +
        (violations.empty() ? std::string(", no violations") : ", violations:" + violations) +
        "; (d) restored=" + (r.restored ? "yes" : "no") + fmt("; mean reduction %.0f W", r.mean_achieved_reduction_W());
    return {a && b && cc && d, detail};
}

}  // namespace

int main() {
    report(1, "scoring conformance", scoring_conformance);
    const auto instances = enumerable_instances();
    report(2, "MCDM oracle equivalence", [&] { return oracle_equivalence(instances); });
    report(3, "fitness bound", [&] { return fitness_bound(instances); });
    report(4, "hand-derived classification", hand_classification);
    report(5, "ranking performance", ranking_performance);
    report(6, "chiller regression recovery", chiller_recovery);
    report(7, "occupancy round trip", occupancy_round_trip);

    const auto loop_start = Clock::now();
    std::optional<ClosedLoop> setup;
    std::optional<EventReport> first;
    report(8, "closed-loop scenario", [&] {
        setup = closed_loop_setup();
        first = run_closed_loop(*setup);
        auto o = closed_loop(*setup, *first);
        const double secs = seconds_since(loop_start);
        o.detail += fmt("; %.1f s", secs);
        o.pass = o.pass && secs < 120.0;
        return o;
    });
    report(9, "determinism", [&]() -> Outcome {
        if (!setup || !first) return {false, "closed-loop setup failed"};
        const auto a = to_json(*first).dump();
        const auto b = to_json(run_closed_loop(*setup)).dump();
        return {a == b, fmt("report size %.0f bytes, identical=%.0f", static_cast<double>(a.size()), a == b ? 1 : 0)};
    });
    return failures == 0 ? 0 : 1;
}
