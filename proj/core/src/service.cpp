#include "loadrank/service.hpp"

#include <httplib.h>

#include <charconv>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stop_token>
#include <thread>

#include "csv.hpp"
#include "loadrank/chiller.hpp"
#include "loadrank/error.hpp"
#include "loadrank/occupancy.hpp"
#include "loadrank/serialization.hpp"

namespace loadrank {
namespace {

struct HttpError : Error {
    HttpError(int code, const std::string& msg) : Error(msg), status(code) {}
    int status;
};

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
    return json_response(status, {{"error", message}, {"status", status}});
}

Json body_json(const HttpRequest& req) {
    if (req.body.empty()) return Json::object();
    auto j = parse_json(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

int int_param(const HttpRequest& req, const std::string& key, int fallback, int lo, int hi) {
    auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return fallback;
    int v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < lo || v > hi) {
        throw ValidationError(key + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

std::vector<std::string> split_fields(const std::string& text) {
    std::vector<std::string> out;
    for (auto& f : csv::split(text)) {
        if (!f.empty()) out.push_back(std::move(f));
    }
    return out;
}

// Value of one timeseries column in a snapshot; nullopt for unknown names.
std::optional<double> field_value(const MeasurementRecord& r, const std::string& field) {
    if (field == "outdoor_temp_C") return r.outdoor_temp_C;
    if (field == "chiller_power_W") return r.chiller_power_W;
    if (field == "total_power_W") return r.total_power_W;
    auto strip = [&](std::string_view prefix, std::string_view suffix) -> std::optional<std::string> {
        if (field.size() <= prefix.size() + suffix.size()) return std::nullopt;
        if (!field.starts_with(prefix) || !field.ends_with(suffix)) return std::nullopt;
        return field.substr(prefix.size(), field.size() - prefix.size() - suffix.size());
    };
    if (auto z = strip("temp_", "_C")) {
        if (const auto* zr = r.zone(*z)) return zr->temp_C;
    }
    if (auto z = strip("setpoint_", "_C")) {
        if (const auto* zr = r.zone(*z)) return zr->setpoint_C;
    }
    if (auto z = strip("occupied_", "")) {
        if (const auto* zr = r.zone(*z)) return zr->occupied ? 1.0 : 0.0;
    }
    if (auto a = strip("power_", "_W")) {
        if (const auto* ar = r.appliance(*a)) return ar->power_W;
    }
    return std::nullopt;
}

}  // namespace

MeasurementRecord nominal_snapshot(const Building& building, SimTime time) {
    validate_building(building);
    MeasurementRecord r;
    r.time = time;
    for (const Zone* z : building.zones()) {
        ZoneRecord zr;
        zr.zone_id = z->id;
        zr.temp_C = z->desired_temp_C;
        zr.setpoint_C = z->desired_temp_C;
        zr.occupancy_duration_min = 600;
        for (const auto& a : z->appliances) {
            if (a.kind == ApplianceKind::HvacSetpoint) {
                zr.setpoint_offset_C = a.baseline().value;
                zr.setpoint_C = z->desired_temp_C + zr.setpoint_offset_C;
                continue;
            }
            const double p = a.power_at(a.baseline_index());
            r.appliances.push_back({a.id, z->id, a.kind, p, a.baseline().value, false});
            r.total_power_W += p;
        }
        r.zones.push_back(std::move(zr));
    }
    return r;
}

struct EventEntry {
    CurtailmentEvent event;
    std::optional<EventRun> run;
    std::string status = "scheduled";
};

struct Service::Impl {
    std::mutex mu;
    ServiceConfig cfg;
    std::optional<Emulator> emulator;
    bool running = false;
    bool manual = false;
    int step_interval_ms = 200;
    std::string last_error;
    std::size_t steps = 0;
    std::vector<MeasurementRecord> log;
    std::ofstream log_file;
    std::vector<std::string> event_order;
    std::map<std::string, EventEntry> events;
    std::jthread stepper;
    std::condition_variable_any cv;
    std::unique_ptr<httplib::Server> http;
    std::thread http_thread;

    explicit Impl(ServiceConfig c) : cfg(std::move(c)) {
        validate_building(cfg.building);
        validate_criteria(cfg.criteria);
        step_interval_ms = cfg.step_interval_ms;
        if (!cfg.log_path.empty()) {
            log_file.open(cfg.log_path, std::ios::app);
            if (!log_file) throw ValidationError("cannot open measurement log '" + cfg.log_path + "'");
        }
    }

    void append(MeasurementRecord r) {
        if (log_file.is_open()) log_file << to_json(r).dump() << '\n' << std::flush;
        log.push_back(std::move(r));
    }

    EventEntry* active_event() {
        for (auto& [id, e] : events) {
            if (e.status == "running") return &e;
        }
        return nullptr;
    }

    void step_locked() {
        Emulator& em = *emulator;
        const SimTime t = em.state().sim_clock;
        for (const auto& id : event_order) {
            auto& e = events.at(id);
            if (e.status != "scheduled") continue;
            if (e.event.start < t) {
                e.status = "missed";
            } else if (e.event.start == t) {
                if (e.event.start == e.event.end) {
                    e.status = "empty";
                } else {
                    e.run.emplace(e.event, em, cfg.models, cfg.criteria, cfg.controller);
                    e.status = "running";
                }
            }
        }
        EventEntry* active = active_event();
        if (active) active->run->before_step(em);
        em.step();
        if (active) {
            active->run->after_step(em);
            if (active->run->finished()) active->status = active->run->report().status;
        }
        ++steps;
        append(em.snapshot());
    }

    void abort_events() {
        for (auto& [id, e] : events) {
            if (e.status == "running") {
                e.run->abort();
                e.status = "aborted";
            }
        }
    }

    void launch_stepper() {
        stepper = std::jthread([this](std::stop_token st) {
            std::unique_lock lk(mu);
            while (!st.stop_requested()) {
                cv.wait_for(lk, st, std::chrono::milliseconds(step_interval_ms), [] { return false; });
                if (st.stop_requested()) break;
                try {
                    step_locked();
                } catch (const std::exception& ex) {
                    last_error = ex.what();
                    running = false;
                    abort_events();
                    break;
                }
            }
        });
    }

    Json state_json() const {
        Json j = {{"running", running}, {"manual", manual}, {"steps", steps}, {"log_size", log.size()}};
        j["snapshot"] = emulator ? to_json(emulator->snapshot()) : Json(nullptr);
        j["last_error"] = last_error.empty() ? Json(nullptr) : Json(last_error);
        Json active = nullptr;
        for (const auto& [id, e] : events) {
            if (e.status == "running") active = id;
        }
        j["active_event"] = active;
        return j;
    }

    HttpResponse route(const HttpRequest& req, std::unique_lock<std::mutex>& lk) {
        const auto& m = req.method;
        const auto& p = req.path;
        if (p == "/api/building") {
            if (m == "GET") return json_response(200, to_json(cfg.building));
            if (m == "POST") return post_building(req);
        } else if (p == "/api/criteria") {
            if (m == "GET") return json_response(200, to_json(cfg.criteria));
            if (m == "PUT") {
                cfg.criteria = criteria_from_json(body_json(req), cfg.criteria);
                return json_response(200, to_json(cfg.criteria));
            }
        } else if (p == "/api/models/fit") {
            if (m == "POST") return fit(req);
        } else if (p == "/api/models") {
            if (m == "GET") return models_json();
        } else if (p == "/api/ranking") {
            if (m == "GET") return ranking(req);
        } else if (p == "/api/simulation/start") {
            if (m == "POST") return start(req);
        } else if (p == "/api/simulation/stop") {
            if (m == "POST") return stop(lk);
        } else if (p == "/api/simulation/step") {
            if (m == "POST") return manual_step(req);
        } else if (p == "/api/simulation/state") {
            if (m == "GET") return json_response(200, state_json());
        } else if (p == "/api/events") {
            if (m == "POST") return post_event(req);
            if (m == "GET") return list_events();
        } else if (p.starts_with("/api/events/") && p.ends_with("/report")) {
            if (m == "GET") {
                const auto id = p.substr(12, p.size() - 12 - 7);
                return event_report(id);
            }
        } else if (p == "/api/timeseries") {
            if (m == "GET") return timeseries(req);
        } else {
            throw HttpError(404, "no such endpoint: " + p);
        }
        throw HttpError(405, "method " + m + " not allowed on " + p);
    }

    HttpResponse post_building(const HttpRequest& req) {
        if (running) throw HttpError(409, "stop the simulation before replacing the building");
        Building b = building_from_json(body_json(req));
        const bool same_zones = b.zone_ids() == cfg.building.zone_ids();
        cfg.building = std::move(b);
        emulator.reset();
        if (!same_zones) {
            cfg.models = {};
        }
        return json_response(200, to_json(cfg.building));
    }

    HttpResponse fit(const HttpRequest& req) {
        const Json j = body_json(req);
        ModelFitOptions opts;
        opts.occupancy.min_days = j.value("min_days", opts.occupancy.min_days);
        opts.occupancy.laplace = j.value("laplace", opts.occupancy.laplace);
        if (j.contains("min_outdoor_temp_C")) {
            const auto& t = j.at("min_outdoor_temp_C");
            opts.chiller.min_outdoor_temp_C = t.is_null() ? std::nullopt : std::optional<double>(t.get<double>());
        }
        ControllerModels fitted;
        if (j.contains("measurements_csv") || j.contains("occupancy_csv")) {
            std::istringstream occ(j.value("occupancy_csv", std::string{}));
            std::istringstream meas(j.value("measurements_csv", std::string{}));
            std::vector<OccupancyTrace> traces;
            for (auto& [id, t] : read_occupancy_csv(occ)) traces.push_back(std::move(t));
            fitted = fit_models(cfg.building, traces, read_chiller_csv(meas, cfg.building.zone_ids()), opts);
        } else {
            if (log.empty()) throw ValidationError("measurement log is empty; run a simulation or upload CSV data");
            fitted = fit_models(cfg.building, log, opts);
        }
        cfg.models = std::move(fitted);
        return models_json();
    }

    HttpResponse models_json() const {
        Json occ = Json::object();
        for (const auto& [id, m] : cfg.models.occupancy) {
            occ[id] = {{"windows", m.windows.size()}, {"duration_buckets", m.duration_buckets}};
        }
        Json j = {{"occupancy", occ}};
        j["chiller"] = cfg.models.chiller ? to_json(*cfg.models.chiller) : Json(nullptr);
        return json_response(200, j);
    }

    HttpResponse ranking(const HttpRequest& req) {
        const int horizon = int_param(req, "horizon_min", cfg.controller.horizon(), 1, kMinutesPerDay);
        const auto snap = emulator ? emulator->snapshot() : nominal_snapshot(cfg.building, cfg.scenario.start);
        const auto fleet = rank_fleet(cfg.building, fleet_inputs(cfg.building, snap, cfg.models, horizon), cfg.criteria);
        Json j = to_json(fleet);
        j["time"] = to_iso8601(snap.time);
        j["horizon_min"] = horizon;
        return json_response(200, j);
    }

    HttpResponse start(const HttpRequest& req) {
        if (running) throw HttpError(409, "simulation is already running");
        const Json j = body_json(req);
        const bool reset = j.value("reset", false);
        if (j.contains("scenario") && emulator && !reset) {
            throw HttpError(409, "a stopped emulation exists; pass reset=true to start a new scenario");
        }
        const int interval = j.value("step_interval_ms", step_interval_ms);
        if (interval < 1 || interval > 60000) throw ValidationError("step_interval_ms must lie in [1, 60000]");
        if (reset) {
            abort_events();
            emulator.reset();
            log.clear();
            steps = 0;
        }
        if (!emulator) {
            if (j.contains("scenario")) cfg.scenario = scenario_from_json(j.at("scenario"));
            emulator.emplace(cfg.building, cfg.scenario);
            append(emulator->snapshot());
        }
        step_interval_ms = interval;
        manual = j.value("manual", false);
        running = true;
        last_error.clear();
        if (!manual) launch_stepper();
        return json_response(200, state_json());
    }

    HttpResponse stop(std::unique_lock<std::mutex>& lk) {
        if (!running) throw HttpError(409, "simulation is not running");
        running = false;
        std::jthread t = std::move(stepper);
        if (t.joinable()) {
            lk.unlock();
            t.request_stop();
            t.join();
            lk.lock();
        }
        abort_events();
        return json_response(200, state_json());
    }

    HttpResponse manual_step(const HttpRequest& req) {
        if (!running || !manual) throw HttpError(409, "manual stepping needs a simulation started with manual=true");
        const Json j = body_json(req);
        const int n = j.value("steps", 1);
        if (n < 1 || n > 1000000) throw ValidationError("steps must lie in [1, 1000000]");
        for (int i = 0; i < n; ++i) step_locked();
        return json_response(200, state_json());
    }

    HttpResponse post_event(const HttpRequest& req) {
        CurtailmentEvent e = event_from_json(body_json(req));
        if (events.contains(e.id)) throw HttpError(409, "event '" + e.id + "' already exists");
        if (!emulator) throw HttpError(409, "start a simulation before scheduling events");
        cfg.models.check_covers(cfg.building);
        const SimTime now = emulator->state().sim_clock;
        if (e.start < now) throw HttpError(409, "event start " + to_iso8601(e.start) + " has already passed");
        const auto dt = static_cast<std::int64_t>(std::llround(emulator->scenario().dt_seconds));
        if ((e.start - now) % dt != 0) throw ValidationError("event start must fall on an emulator step boundary");
        for (const auto& [id, other] : events) {
            if (other.status != "scheduled" && other.status != "running") continue;
            const SimTime other_tail = other.event.end + cfg.controller.decision_interval_minutes * kSecondsPerMinute;
            const SimTime tail = e.end + cfg.controller.decision_interval_minutes * kSecondsPerMinute;
            if (e.start < other_tail && other.event.start < tail) {
                throw HttpError(409, "event overlaps event '" + id + "'");
            }
        }
        const auto id = e.id;
        event_order.push_back(id);
        events.emplace(id, EventEntry{std::move(e), std::nullopt, "scheduled"});
        return json_response(201, {{"id", id}, {"status", "scheduled"}});
    }

    HttpResponse list_events() const {
        Json arr = Json::array();
        for (const auto& id : event_order) {
            const auto& e = events.at(id);
            arr.push_back({{"id", id}, {"status", e.status}, {"event", to_json(e.event)}});
        }
        return json_response(200, arr);
    }

    HttpResponse event_report(const std::string& id) const {
        auto it = events.find(id);
        if (it == events.end()) throw HttpError(404, "unknown event '" + id + "'");
        const auto& e = it->second;
        Json j;
        if (e.run) {
            j = to_json(e.run->report());
        } else {
            EventReport r;
            r.event = e.event;
            r.zone_ids = cfg.building.zone_ids();
            j = to_json(r);
        }
        j["status"] = e.status;
        return json_response(200, j);
    }

    HttpResponse timeseries(const HttpRequest& req) const {
        std::optional<SimTime> from;
        std::optional<SimTime> to;
        if (auto it = req.query.find("from"); it != req.query.end() && !it->second.empty()) from = parse_iso8601(it->second);
        if (auto it = req.query.find("to"); it != req.query.end() && !it->second.empty()) to = parse_iso8601(it->second);
        std::vector<std::string> fields{"outdoor_temp_C", "chiller_power_W", "total_power_W"};
        if (auto it = req.query.find("fields"); it != req.query.end() && !it->second.empty()) {
            fields = split_fields(it->second);
        }
        const MeasurementRecord probe =
            log.empty() ? nominal_snapshot(cfg.building, cfg.scenario.start) : log.front();
        for (const auto& f : fields) {
            if (!field_value(probe, f)) throw ValidationError("unknown timeseries field '" + f + "'");
        }
        std::vector<const MeasurementRecord*> rows;
        for (const auto& r : log) {
            if (from && r.time < *from) continue;
            if (to && *to < r.time) continue;
            rows.push_back(&r);
        }
        auto fmt_it = req.query.find("format");
        const bool as_csv = req.accept.find("text/csv") != std::string::npos ||
                            (fmt_it != req.query.end() && fmt_it->second == "csv");
        if (as_csv) {
            std::ostringstream out;
            out << "timestamp";
            for (const auto& f : fields) out << ',' << f;
            out << '\n';
            for (const auto* r : rows) {
                out << to_iso8601(r->time);
                for (const auto& f : fields) out << ',' << csv::fmt(field_value(*r, f).value_or(0.0));
                out << '\n';
            }
            return {200, "text/csv", out.str()};
        }
        Json arr = Json::array();
        for (const auto* r : rows) {
            Json row = {{"time", to_iso8601(r->time)}};
            for (const auto& f : fields) row[f] = field_value(*r, f).value_or(0.0);
            arr.push_back(std::move(row));
        }
        return json_response(200, {{"fields", fields}, {"rows", std::move(arr)}});
    }

    void setup_http() {
        http = std::make_unique<httplib::Server>();
        auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
            HttpRequest r{req.method, req.path, {}, req.body, req.get_header_value("Accept")};
            for (const auto& [k, v] : req.params) r.query.emplace(k, v);
            const auto out = owner->handle(r);
            res.status = out.status;
            res.set_content(out.body, out.content_type);
        };
        http->Get(R"(/api/.*)", bridge);
        http->Post(R"(/api/.*)", bridge);
        http->Put(R"(/api/.*)", bridge);
        http->Delete(R"(/api/.*)", bridge);
    }

    Service* owner = nullptr;
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) { impl_->owner = this; }

Service::~Service() {
    stop_http();
    std::jthread t;
    {
        std::lock_guard lk(impl_->mu);
        impl_->running = false;
        t = std::move(impl_->stepper);
    }
    if (t.joinable()) {
        t.request_stop();
        t.join();
    }
}

HttpResponse Service::handle(const HttpRequest& request) {
    std::unique_lock lk(impl_->mu);
    try {
        return impl_->route(request, lk);
    } catch (const HttpError& e) {
        return error_response(e.status, e.what());
    } catch (const ConfigError& e) {
        return error_response(409, e.what());
    } catch (const Error& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

int Service::start_http(const std::string& host, int port) {
    impl_->setup_http();
    int bound = port;
    if (port == 0) {
        bound = impl_->http->bind_to_any_port(host);
    } else if (!impl_->http->bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    impl_->http_thread = std::thread([this] { impl_->http->listen_after_bind(); });
    impl_->http->wait_until_ready();
    return bound;
}

void Service::serve_blocking(const std::string& host, int port) {
    impl_->setup_http();
    if (!impl_->http->listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

void Service::stop_http() {
    if (impl_->http) impl_->http->stop();
    if (impl_->http_thread.joinable()) impl_->http_thread.join();
}

}  // namespace loadrank
