// loadrank: data generation, model fitting, ranking, closed-loop runs and the HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "loadrank/chiller.hpp"
#include "loadrank/controller.hpp"
#include "loadrank/emulator.hpp"
#include "loadrank/error.hpp"
#include "loadrank/occupancy.hpp"
#include "loadrank/serialization.hpp"
#include "loadrank/service.hpp"

namespace fs = std::filesystem;
using namespace loadrank;

namespace {

struct Common {
    std::string config;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string weights;
    std::optional<double> nu;
    std::string out;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << text;
}

Building load_building(const Common& c) {
    return c.config.empty() ? make_reference_building() : building_from_json(parse_json(read_file(c.config)));
}

ScenarioConfig load_scenario(const Common& c) {
    ScenarioConfig s = c.scenario.empty() ? ScenarioConfig{} : scenario_from_json(parse_json(read_file(c.scenario)));
    if (c.seed) s.seed = *c.seed;
    return s;
}

CriteriaConfig load_criteria(const Common& c) {
    Json j = Json::object();
    if (!c.weights.empty()) {
        std::vector<double> w;
        std::stringstream ss(c.weights);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                w.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::logic_error&) {
                throw ValidationError("--weights expects comma-separated numbers, got '" + c.weights + "'");
            }
        }
        j["weights"] = w;
    }
    if (c.nu) j["nu"] = *c.nu;
    return criteria_from_json(j);
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text << '\n';
    } else {
        write_file(c.out, text + "\n");
    }
}

ControllerModels load_models(const std::string& dir, const Building& building) {
    ControllerModels m;
    m.occupancy = occupancy_models_from_json(parse_json(read_file((fs::path(dir) / "occupancy.json").string())));
    const auto chiller_path = fs::path(dir) / "chiller.json";
    if (fs::exists(chiller_path)) m.chiller = chiller_model_from_json(parse_json(read_file(chiller_path.string())));
    m.check_covers(building);
    return m;
}

// Trains models on a separate emulator run so commands on the live one never see them.
ControllerModels bootstrap_models(const Building& building, const ScenarioConfig& scenario, int days) {
    ScenarioConfig train = scenario;
    train.seed = scenario.seed ^ 0x9E3779B97F4A7C15ull;
    train.start = SimTime{};
    train.weather = {};
    Emulator em(building, train);
    HistoryOptions h;
    h.days = days;
    ModelFitOptions fit;
    fit.occupancy.min_days = std::min(7.0, static_cast<double>(days));
    return fit_models(building, generate_history(em, h), fit);
}

SimTime parse_when(const std::string& text, std::int64_t day) {
    if (text.size() <= 5) return parse_clock(text, day);
    return parse_iso8601(text);
}

int run_generate(const Common& c, int days) {
    if (days <= 0) throw ValidationError("--days must be positive");
    if (c.out.empty()) throw ValidationError("--out <dir> is required");
    const Building b = load_building(c);
    Emulator em(b, load_scenario(c));
    HistoryOptions h;
    h.days = days;
    const auto records = generate_history(em, h);
    fs::create_directories(c.out);
    {
        std::ofstream out(fs::path(c.out) / "measurements.csv", std::ios::binary);
        write_snapshot_csv_header(out, records.front());
        for (const auto& r : records) write_snapshot_csv_row(out, r);
    }
    {
        std::ofstream out(fs::path(c.out) / "occupancy.csv", std::ios::binary);
        write_occupancy_csv(out, occupancy_traces(records, 5));
    }
    std::cerr << "wrote " << records.size() << " rows per zone to " << c.out << '\n';
    return 0;
}

int run_fit(const Common& c, const std::string& data, double min_days, std::optional<double> min_temp) {
    if (c.out.empty()) throw ValidationError("--out <dir> is required");
    const Building b = load_building(c);
    std::ifstream occ_in(fs::path(data) / "occupancy.csv");
    std::ifstream meas_in(fs::path(data) / "measurements.csv");
    if (!occ_in || !meas_in) throw ValidationError("'" + data + "' must contain occupancy.csv and measurements.csv");
    std::vector<OccupancyTrace> traces;
    for (auto& [id, t] : read_occupancy_csv(occ_in)) traces.push_back(std::move(t));
    ModelFitOptions opts;
    opts.occupancy.min_days = min_days;
    opts.chiller.min_outdoor_temp_C = min_temp;
    const auto models = fit_models(b, traces, read_chiller_csv(meas_in, b.zone_ids()), opts);
    write_file(fs::path(c.out) / "occupancy.json", occupancy_models_to_json(models.occupancy).dump(2) + "\n");
    Json summary = {{"occupancy_zones", models.occupancy.size()}};
    if (models.chiller) {
        write_file(fs::path(c.out) / "chiller.json", to_json(*models.chiller).dump(2) + "\n");
        summary["chiller_fit"] = to_json(models.chiller->fit_stats);
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int run_rank(const Common& c, const std::string& models_dir, const std::string& when,
             const std::vector<std::string>& occupied_prob, int horizon, bool exclude_baseline) {
    const Building b = load_building(c);
    const CriteriaConfig criteria = load_criteria(c);
    const ScenarioConfig scenario = load_scenario(c);
    const SimTime t = when.empty() ? scenario.start : parse_when(when, scenario.start.day());
    const MeasurementRecord snap = nominal_snapshot(b, t);

    FleetInputs in;
    ControllerModels models;
    ChillerModel stand_in;
    std::string chiller_source = "none";
    if (!models_dir.empty()) {
        models = load_models(models_dir, b);
        in = fleet_inputs(b, snap, models, horizon);
        if (models.chiller) chiller_source = "fitted";
    } else {
        for (const Zone* z : b.zones()) {
            in.occupied_prob[z->id] = 1.0;
            for (const auto& a : z->appliances) {
                in.references[a.id] = {a.kind == ApplianceKind::HvacSetpoint ? 0.0 : a.power_at(a.baseline_index()),
                                       a.kind == ApplianceKind::HvacSetpoint ? a.baseline().value : 0.0};
            }
        }
        stand_in = plant_chiller_model(b, scenario);
        in.chiller = &stand_in;
        chiller_source = "plant";
    }
    for (const auto& kv : occupied_prob) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--occupied-prob expects ZONE=P, got '" + kv + "'");
        const auto zone = kv.substr(0, eq);
        if (!b.find_zone(zone)) throw ValidationError("--occupied-prob names unknown zone '" + zone + "'");
        double p = 0.0;
        try {
            p = std::stod(kv.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw ValidationError("--occupied-prob value for '" + zone + "' is not a number");
        }
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("occupied probability must lie in [0, 1]");
        in.occupied_prob[zone] = p;
    }
    const FleetRanking ranking = rank_fleet(b, in, criteria, {exclude_baseline});
    Json j = to_json(ranking);
    j["time"] = to_iso8601(t);
    j["horizon_min"] = horizon;
    j["chiller_source"] = chiller_source;
    emit(c, j.dump(2));
    return 0;
}

CurtailmentEvent make_event(const Common& c, const ScenarioConfig& s, const std::string& start, const std::string& end,
                            const std::string& target, double min_fitness) {
    CurtailmentEvent e;
    e.id = "cli";
    const auto day = s.start.day();
    e.start = parse_when(start, day);
    e.end = parse_when(end, day);
    if (target == "unlimited") {
        e.target_reduction_W = kUnlimitedTarget;
    } else {
        try {
            e.target_reduction_W = std::stod(target);
        } catch (const std::logic_error&) {
            throw ValidationError("--target expects watts or 'unlimited'");
        }
    }
    e.min_fitness = min_fitness;
    if (!c.weights.empty() || c.nu) e.criteria = load_criteria(c);
    e.validate();
    return e;
}

int run_event_cmd(const Common& c, const std::string& models_dir, int train_days, const std::string& start,
                  const std::string& end, const std::string& target, double min_fitness) {
    const Building b = load_building(c);
    const ScenarioConfig s = load_scenario(c);
    const CurtailmentEvent e = make_event(c, s, start, end, target, min_fitness);
    const ControllerModels models =
        models_dir.empty() ? bootstrap_models(b, s, train_days) : load_models(models_dir, b);
    Emulator em(b, s);
    const auto report = run_event(em, e, models, load_criteria(c));
    emit(c, to_json(report).dump(2));
    std::cerr << "event " << e.id << ": mean achieved reduction " << report.mean_achieved_reduction_W()
              << " W, restored=" << (report.restored ? "yes" : "no") << '\n';
    return 0;
}

Service* g_service = nullptr;

int run_serve(const Common& c, const std::string& models_dir, int train_days, const std::string& host, int port,
              int step_ms, const std::string& log_path) {
    ServiceConfig cfg;
    cfg.building = load_building(c);
    cfg.scenario = load_scenario(c);
    cfg.criteria = load_criteria(c);
    cfg.step_interval_ms = step_ms;
    cfg.log_path = log_path;
    if (models_dir.empty()) {
        std::cerr << "no --models given; fitting models on " << train_days << " generated days\n";
        cfg.models = bootstrap_models(cfg.building, cfg.scenario, train_days);
    } else {
        cfg.models = load_models(models_dir, cfg.building);
    }
    Service service(std::move(cfg));
    g_service = &service;
    std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop_http();
    });
    std::cerr << "listening on http://" << host << ':' << port << '\n';
    service.serve_blocking(host, port);
    g_service = nullptr;
    return 0;
}

void add_common(CLI::App* app, Common& c, bool criteria) {
    app->add_option("--config", c.config, "Building JSON (default: 3-floor reference office)");
    app->add_option("--scenario", c.scenario, "Emulator scenario JSON");
    app->add_option("--seed", c.seed, "Random seed (overrides the scenario)");
    app->add_option("--out", c.out, "Output path");
    if (criteria) {
        app->add_option("--weights", c.weights, "Criteria weights, e.g. 0.6,0.4");
        app->add_option("--nu", c.nu, "Classification threshold in (0.5, 1)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Occupancy-aware ranking and curtailment of building loads"};
    app.require_subcommand(1);
    Common c;

    auto* gen = app.add_subcommand("generate-data", "Run the emulator and write training CSVs");
    add_common(gen, c, false);
    int days = 14;
    gen->add_option("--days", days, "Days to simulate");

    auto* fit = app.add_subcommand("fit", "Fit occupancy and chiller models from CSVs");
    add_common(fit, c, false);
    std::string data_dir;
    double min_days = 7.0;
    std::optional<double> min_temp = 24.0;
    bool no_temp_filter = false;
    fit->add_option("--data", data_dir, "Directory holding occupancy.csv and measurements.csv")->required();
    fit->add_option("--min-days", min_days, "Minimum days of occupancy data");
    fit->add_option("--min-outdoor-temp", min_temp, "Drop chiller samples below this outdoor temperature");
    fit->add_flag("--no-temp-filter", no_temp_filter, "Keep all chiller samples");

    auto* rank_cmd = app.add_subcommand("rank", "Rank every control alternative and print JSON");
    add_common(rank_cmd, c, true);
    std::string models_dir;
    std::string when;
    std::vector<std::string> occupied_prob;
    int horizon = 5;
    bool exclude_baseline = false;
    rank_cmd->add_option("--models", models_dir, "Directory with occupancy.json and chiller.json");
    rank_cmd->add_option("--time", when, "Ranking time, HH:MM or ISO-8601");
    rank_cmd->add_option("--occupied-prob", occupied_prob, "Override a zone's occupancy probability, ZONE=P");
    rank_cmd->add_option("--horizon-min", horizon, "Occupancy forecast horizon in minutes")->check(CLI::Range(1, 1440));
    rank_cmd->add_flag("--exclude-baseline", exclude_baseline, "Leave out the do-nothing settings");

    auto* ev = app.add_subcommand("run-event", "Run a curtailment event in closed loop and write its report");
    add_common(ev, c, true);
    std::string start = "08:00";
    std::string end = "16:00";
    std::string target = "unlimited";
    double min_fitness = 0.5;
    int train_days = 14;
    ev->add_option("--models", models_dir, "Directory with occupancy.json and chiller.json");
    ev->add_option("--start", start, "Event start, HH:MM or ISO-8601");
    ev->add_option("--end", end, "Event end, HH:MM or ISO-8601");
    ev->add_option("--target", target, "Reduction target in W, or 'unlimited'");
    ev->add_option("--min-fitness", min_fitness, "Lowest fitness the controller dispatches");
    ev->add_option("--train-days", train_days, "Days generated to fit models when --models is absent");

    auto* serve = app.add_subcommand("serve", "Start the HTTP API");
    add_common(serve, c, true);
    std::string host = "127.0.0.1";
    int port = 8080;
    int step_ms = 200;
    std::string log_path;
    serve->add_option("--models", models_dir, "Directory with occupancy.json and chiller.json");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--step-ms", step_ms, "Wall-clock milliseconds per emulator step");
    serve->add_option("--log", log_path, "Append measurements to this NDJSON file");
    serve->add_option("--train-days", train_days, "Days generated to fit models when --models is absent");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(c, days);
        if (fit->parsed()) return run_fit(c, data_dir, min_days, no_temp_filter ? std::nullopt : min_temp);
        if (rank_cmd->parsed()) return run_rank(c, models_dir, when, occupied_prob, horizon, exclude_baseline);
        if (ev->parsed()) return run_event_cmd(c, models_dir, train_days, start, end, target, min_fitness);
        if (serve->parsed()) return run_serve(c, models_dir, train_days, host, port, step_ms, log_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
