#include "loadrank/serialization.hpp"

#include <cmath>

#include "loadrank/error.hpp"

namespace loadrank {
namespace {

template <class T>
T value_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("invalid ") + what + ": " + e.what());
    }
}

Json time_json(SimTime t) { return to_iso8601(t); }

SimTime time_from(const Json& j) {
    if (j.is_number_integer()) return SimTime{j.get<std::int64_t>()};
    return parse_iso8601(j.get<std::string>());
}

Json alternative_json(const ControlAlternative& a) {
    return {{"label", a.label()},
            {"zone_id", a.zone_id},
            {"appliance_id", a.appliance_id},
            {"kind", to_string(a.kind)},
            {"setting_index", a.setting_index},
            {"setting_value", a.setting_value}};
}

Json thermal_json(const ZoneThermalParams& t) {
    return {{"capacitance_J_per_K", t.capacitance_J_per_K}, {"resistance_K_per_W", t.resistance_K_per_W},
            {"base_gain_W", t.base_gain_W},                 {"occupant_gain_W", t.occupant_gain_W},
            {"cooling_gain_W_per_K", t.cooling_gain_W_per_K}, {"cooling_capacity_W", t.cooling_capacity_W}};
}

ZoneThermalParams thermal_from(const Json& j, ZoneThermalParams t) {
    t.capacitance_J_per_K = value_or(j, "capacitance_J_per_K", t.capacitance_J_per_K);
    t.resistance_K_per_W = value_or(j, "resistance_K_per_W", t.resistance_K_per_W);
    t.base_gain_W = value_or(j, "base_gain_W", t.base_gain_W);
    t.occupant_gain_W = value_or(j, "occupant_gain_W", t.occupant_gain_W);
    t.cooling_gain_W_per_K = value_or(j, "cooling_gain_W_per_K", t.cooling_gain_W_per_K);
    t.cooling_capacity_W = value_or(j, "cooling_capacity_W", t.cooling_capacity_W);
    return t;
}

Json profile_json(const OfficeProfile& p) {
    return {{"arrival_mean_h", p.arrival_mean_h},
            {"arrival_std_h", p.arrival_std_h},
            {"departure_mean_h", p.departure_mean_h},
            {"departure_std_h", p.departure_std_h},
            {"attendance_prob", p.attendance_prob},
            {"lunch_prob", p.lunch_prob},
            {"lunch_mean_h", p.lunch_mean_h},
            {"lunch_std_h", p.lunch_std_h},
            {"lunch_minutes", p.lunch_minutes},
            {"meeting_rate_per_h", p.meeting_rate_per_h},
            {"meeting_mean_minutes", p.meeting_mean_minutes},
            {"days_off", p.days_off}};
}

OfficeProfile profile_from(const Json& j, OfficeProfile p) {
    p.arrival_mean_h = value_or(j, "arrival_mean_h", p.arrival_mean_h);
    p.arrival_std_h = value_or(j, "arrival_std_h", p.arrival_std_h);
    p.departure_mean_h = value_or(j, "departure_mean_h", p.departure_mean_h);
    p.departure_std_h = value_or(j, "departure_std_h", p.departure_std_h);
    p.attendance_prob = value_or(j, "attendance_prob", p.attendance_prob);
    p.lunch_prob = value_or(j, "lunch_prob", p.lunch_prob);
    p.lunch_mean_h = value_or(j, "lunch_mean_h", p.lunch_mean_h);
    p.lunch_std_h = value_or(j, "lunch_std_h", p.lunch_std_h);
    p.lunch_minutes = value_or(j, "lunch_minutes", p.lunch_minutes);
    p.meeting_rate_per_h = value_or(j, "meeting_rate_per_h", p.meeting_rate_per_h);
    p.meeting_mean_minutes = value_or(j, "meeting_mean_minutes", p.meeting_mean_minutes);
    p.days_off = value_or(j, "days_off", p.days_off);
    p.validate();
    return p;
}

}  // namespace

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

Json to_json(const Building& b) {
    Json floors = Json::array();
    for (const auto& f : b.floors) {
        Json zones = Json::array();
        for (const auto& z : f.zones) {
            Json apps = Json::array();
            for (const auto& a : z.appliances) {
                Json settings = Json::array();
                for (const auto& s : a.settings) settings.push_back({{"value", s.value}, {"baseline", s.baseline}});
                apps.push_back({{"id", a.id},
                                {"kind", to_string(a.kind)},
                                {"rated_power_W", a.rated_power_W},
                                {"settings", std::move(settings)}});
            }
            zones.push_back({{"id", z.id},
                             {"desired_temp_C", z.desired_temp_C},
                             {"comfort_alpha", z.comfort_alpha},
                             {"comfort_delta_C", z.comfort_delta_C},
                             {"curtailment_alpha", z.curtailment_alpha},
                             {"appliances", std::move(apps)}});
        }
        floors.push_back({{"id", f.id}, {"zones", std::move(zones)}});
    }
    return {{"schema", kBuildingSchema}, {"id", b.id}, {"floor_area_m2", b.floor_area_m2}, {"floors", std::move(floors)}};
}

Building building_from_json(const Json& j) {
    Building b = guarded("building", [&] {
        Building out;
        if (j.contains("schema") && j.at("schema").get<std::string>() != kBuildingSchema) {
            throw ValidationError("unsupported building schema '" + j.at("schema").get<std::string>() + "'");
        }
        out.id = value_or<std::string>(j, "id", "building");
        out.floor_area_m2 = value_or(j, "floor_area_m2", 1.0);
        for (const auto& fj : j.at("floors")) {
            Floor f;
            f.id = fj.at("id").get<std::string>();
            for (const auto& zj : fj.at("zones")) {
                Zone z;
                z.id = zj.at("id").get<std::string>();
                z.floor_id = f.id;
                z.desired_temp_C = value_or(zj, "desired_temp_C", z.desired_temp_C);
                z.comfort_alpha = value_or(zj, "comfort_alpha", z.comfort_alpha);
                z.comfort_delta_C = value_or(zj, "comfort_delta_C", z.comfort_delta_C);
                z.curtailment_alpha = value_or(zj, "curtailment_alpha", z.curtailment_alpha);
                for (const auto& aj : value_or(zj, "appliances", Json::array())) {
                    Appliance a;
                    a.id = aj.at("id").get<std::string>();
                    a.zone_id = z.id;
                    a.kind = appliance_kind_from_string(aj.at("kind").get<std::string>());
                    a.rated_power_W = value_or(aj, "rated_power_W", 0.0);
                    if (aj.contains("settings")) {
                        for (const auto& sj : aj.at("settings")) {
                            a.settings.push_back({sj.at("value").get<double>(), value_or(sj, "baseline", false)});
                        }
                    } else {
                        const auto preset = value_or<std::string>(aj, "preset", "");
                        if (preset == "hvac_offsets") {
                            a.settings = hvac_offset_settings();
                        } else if (preset == "dimming") {
                            a.settings = dimming_settings();
                        } else if (preset == "plug") {
                            a.settings = plug_settings();
                        } else {
                            throw ValidationError("appliance '" + a.id + "' needs settings or a known preset");
                        }
                    }
                    z.appliances.push_back(std::move(a));
                }
                f.zones.push_back(std::move(z));
            }
            out.floors.push_back(std::move(f));
        }
        return out;
    });
    validate_building(b);
    return b;
}

Json to_json(const CriteriaConfig& c) {
    return {{"criteria", c.criteria}, {"weights", c.weights}, {"nu", c.threshold}};
}

CriteriaConfig criteria_from_json(const Json& j, const CriteriaConfig& base) {
    CriteriaConfig c = guarded("criteria", [&] {
        if (!j.is_object()) throw ValidationError("criteria must be a JSON object");
        CriteriaConfig out = base;
        if (j.contains("weights")) {
            out.weights = j.at("weights").get<std::vector<double>>();
            if (!j.contains("criteria") && out.weights.size() != out.criteria.size()) {
                out.criteria.clear();
                for (std::size_t i = 0; i < out.weights.size(); ++i) out.criteria.push_back("c" + std::to_string(i));
            }
        }
        if (j.contains("criteria")) out.criteria = j.at("criteria").get<std::vector<std::string>>();
        if (j.contains("nu")) out.threshold = j.at("nu").get<double>();
        return out;
    });
    validate_criteria(c);
    return c;
}

Json to_json(const OccupancyModel& m) {
    Json windows = Json::array();
    for (const auto& w : m.windows) {
        Json rows = Json::array();
        for (std::size_t i = 0; i < w.size(); ++i) {
            Json row = Json::array();
            for (std::size_t k = 0; k < w.size(); ++k) row.push_back(w(i, k));
            rows.push_back(std::move(row));
        }
        windows.push_back(std::move(rows));
    }
    return {{"zone_id", m.zone_id},
            {"window_minutes", m.window_minutes},
            {"sample_minutes", m.sample_minutes},
            {"duration_buckets", m.duration_buckets},
            {"windows", std::move(windows)}};
}

OccupancyModel occupancy_model_from_json(const Json& j) {
    OccupancyModel m = guarded("occupancy model", [&] {
        OccupancyModel out;
        out.zone_id = j.at("zone_id").get<std::string>();
        out.window_minutes = j.at("window_minutes").get<int>();
        out.sample_minutes = j.at("sample_minutes").get<int>();
        out.duration_buckets = j.at("duration_buckets").get<std::vector<int>>();
        for (const auto& wj : j.at("windows")) {
            const auto rows = wj.get<std::vector<std::vector<double>>>();
            TransitionMatrix t(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows.size()) throw ValidationError("transition matrix is not square");
                for (std::size_t k = 0; k < rows.size(); ++k) t(i, k) = rows[i][k];
            }
            out.windows.push_back(std::move(t));
        }
        return out;
    });
    m.validate();
    return m;
}

Json occupancy_models_to_json(const std::map<std::string, OccupancyModel>& models) {
    Json arr = Json::array();
    for (const auto& [id, m] : models) arr.push_back(to_json(m));
    return {{"schema", kOccupancyModelsSchema}, {"models", std::move(arr)}};
}

std::map<std::string, OccupancyModel> occupancy_models_from_json(const Json& j) {
    std::map<std::string, OccupancyModel> out;
    const Json& arr = guarded("occupancy models", [&]() -> const Json& { return j.at("models"); });
    for (const auto& mj : arr) {
        auto m = occupancy_model_from_json(mj);
        auto id = m.zone_id;
        if (!out.emplace(id, std::move(m)).second) throw ValidationError("duplicate occupancy model for '" + id + "'");
    }
    return out;
}

Json to_json(const ChillerFitStats& s) {
    Json j = {{"rmse_W", s.rmse_W},
              {"samples_used", s.samples_used},
              {"samples_filtered", s.samples_filtered},
              {"fraction_within_10pct", s.fraction_within_10pct},
              {"rel_error_p05", s.rel_error_p05},
              {"rel_error_p50", s.rel_error_p50},
              {"rel_error_p95", s.rel_error_p95},
              {"condition_number", s.condition_number},
              {"solver", s.solver}};
    j["min_outdoor_temp_C"] = s.min_outdoor_temp_C ? Json(*s.min_outdoor_temp_C) : Json(nullptr);
    return j;
}

Json to_json(const ChillerModel& m) {
    return {{"schema", kChillerModelSchema}, {"zone_ids", m.zone_ids}, {"beta0", m.beta0},
            {"beta_out", m.beta_out},         {"beta_z", m.beta_z},     {"fit_stats", to_json(m.fit_stats)}};
}

ChillerModel chiller_model_from_json(const Json& j) {
    return guarded("chiller model", [&] {
        ChillerModel m;
        m.zone_ids = j.at("zone_ids").get<std::vector<std::string>>();
        m.beta0 = j.at("beta0").get<double>();
        m.beta_out = j.at("beta_out").get<double>();
        m.beta_z = j.at("beta_z").get<std::vector<double>>();
        if (m.beta_z.size() != m.zone_ids.size()) throw ValidationError("beta_z and zone_ids differ in length");
        if (j.contains("fit_stats")) {
            const auto& s = j.at("fit_stats");
            m.fit_stats.rmse_W = value_or(s, "rmse_W", 0.0);
            m.fit_stats.samples_used = value_or<std::size_t>(s, "samples_used", 0);
            m.fit_stats.samples_filtered = value_or<std::size_t>(s, "samples_filtered", 0);
            if (s.contains("min_outdoor_temp_C") && !s.at("min_outdoor_temp_C").is_null()) {
                m.fit_stats.min_outdoor_temp_C = s.at("min_outdoor_temp_C").get<double>();
            }
            m.fit_stats.fraction_within_10pct = value_or(s, "fraction_within_10pct", 0.0);
            m.fit_stats.rel_error_p05 = value_or(s, "rel_error_p05", 0.0);
            m.fit_stats.rel_error_p50 = value_or(s, "rel_error_p50", 0.0);
            m.fit_stats.rel_error_p95 = value_or(s, "rel_error_p95", 0.0);
            m.fit_stats.condition_number = value_or(s, "condition_number", 0.0);
            m.fit_stats.solver = value_or<std::string>(s, "solver", "");
        }
        return m;
    });
}

Json to_json(const ScoreDistribution& d) {
    Json arr = Json::array();
    for (const auto& a : d.support()) arr.push_back({{"value", a.value}, {"prob", a.prob}});
    return arr;
}

Json to_json(const CurtailmentEvent& e) {
    Json j = {{"id", e.id},
              {"start", time_json(e.start)},
              {"end", time_json(e.end)},
              {"min_fitness", e.min_fitness}};
    j["target_reduction_W"] = e.unlimited() ? Json("unlimited") : Json(e.target_reduction_W);
    if (e.criteria) j["criteria"] = to_json(*e.criteria);
    return j;
}

CurtailmentEvent event_from_json(const Json& j) {
    CurtailmentEvent e = guarded("event", [&] {
        CurtailmentEvent out;
        out.id = value_or<std::string>(j, "id", out.id);
        if (j.contains("start")) out.start = time_from(j.at("start"));
        if (j.contains("end")) out.end = time_from(j.at("end"));
        if (j.contains("target_reduction_W")) {
            const auto& t = j.at("target_reduction_W");
            if (t.is_string()) {
                if (t.get<std::string>() != "unlimited") throw ValidationError("target must be a number or \"unlimited\"");
                out.target_reduction_W = kUnlimitedTarget;
            } else {
                out.target_reduction_W = t.get<double>();
            }
        }
        out.min_fitness = value_or(j, "min_fitness", out.min_fitness);
        if (j.contains("criteria") && !j.at("criteria").is_null()) out.criteria = criteria_from_json(j.at("criteria"));
        return out;
    });
    e.validate();
    return e;
}

Json to_json(const ScenarioConfig& s) {
    Json j = {{"seed", s.seed},
              {"dt_seconds", s.dt_seconds},
              {"start", time_json(s.start)},
              {"thermal", thermal_json(s.thermal)},
              {"chiller_cop", s.chiller_cop},
              {"chiller_noise_fraction", s.chiller_noise_fraction},
              {"design_outdoor_temp_C", s.design_outdoor_temp_C},
              {"operating_hours", {s.operating_start_h, s.operating_end_h}},
              {"occupancy_profile", profile_json(s.occupancy_profile)},
              {"occupancy_training_days", s.occupancy_training_days},
              {"initially_occupied", s.initially_occupied}};
    Json zt = Json::object();
    for (const auto& [id, t] : s.zone_thermal) zt[id] = thermal_json(t);
    j["zone_thermal"] = std::move(zt);
    if (s.weather.empty()) {
        j["weather"] = {{"min_C", s.weather_min_C}, {"max_C", s.weather_max_C}, {"peak_hour", s.weather_peak_hour}};
    } else {
        Json knots = Json::array();
        for (const auto& [t, v] : s.weather.knots()) knots.push_back({time_json(t), v});
        j["weather"] = {{"knots", std::move(knots)}};
    }
    return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
    return guarded("scenario", [&] {
        ScenarioConfig s;
        s.seed = value_or<std::uint64_t>(j, "seed", s.seed);
        s.dt_seconds = value_or(j, "dt_seconds", s.dt_seconds);
        if (j.contains("start")) s.start = time_from(j.at("start"));
        if (j.contains("thermal")) s.thermal = thermal_from(j.at("thermal"), s.thermal);
        if (j.contains("zone_thermal")) {
            for (const auto& [id, tj] : j.at("zone_thermal").items()) s.zone_thermal[id] = thermal_from(tj, s.thermal);
        }
        s.chiller_cop = value_or(j, "chiller_cop", s.chiller_cop);
        s.chiller_noise_fraction = value_or(j, "chiller_noise_fraction", s.chiller_noise_fraction);
        s.design_outdoor_temp_C = value_or(j, "design_outdoor_temp_C", s.design_outdoor_temp_C);
        if (j.contains("operating_hours")) {
            const auto h = j.at("operating_hours").get<std::vector<double>>();
            if (h.size() != 2) throw ValidationError("operating_hours must be [start_h, end_h]");
            s.operating_start_h = h[0];
            s.operating_end_h = h[1];
        }
        if (j.contains("weather")) {
            const auto& w = j.at("weather");
            if (w.contains("knots")) {
                std::vector<std::pair<SimTime, double>> knots;
                for (const auto& k : w.at("knots")) knots.emplace_back(time_from(k.at(0)), k.at(1).get<double>());
                if (knots.empty()) throw ValidationError("weather profile is empty");
                s.weather = WeatherProfile(std::move(knots));
            } else if (w.contains("constant_C")) {
                s.weather_min_C = s.weather_max_C = w.at("constant_C").get<double>();
            } else {
                s.weather_min_C = value_or(w, "min_C", s.weather_min_C);
                s.weather_max_C = value_or(w, "max_C", s.weather_max_C);
                s.weather_peak_hour = value_or(w, "peak_hour", s.weather_peak_hour);
            }
        }
        if (j.contains("occupancy_profile")) s.occupancy_profile = profile_from(j.at("occupancy_profile"), s.occupancy_profile);
        s.occupancy_training_days = value_or(j, "occupancy_training_days", s.occupancy_training_days);
        s.initially_occupied = value_or(j, "initially_occupied", s.initially_occupied);
        return s;
    });
}

Json to_json(const MeasurementRecord& r) {
    Json zones = Json::array();
    for (const auto& z : r.zones) {
        zones.push_back({{"zone_id", z.zone_id},
                         {"temp_C", z.temp_C},
                         {"setpoint_C", z.setpoint_C},
                         {"setpoint_offset_C", z.setpoint_offset_C},
                         {"hvac_commanded", z.hvac_commanded},
                         {"occupied", z.occupied},
                         {"occupancy_duration_min", z.occupancy_duration_min}});
    }
    Json apps = Json::array();
    for (const auto& a : r.appliances) {
        apps.push_back({{"appliance_id", a.appliance_id},
                        {"zone_id", a.zone_id},
                        {"kind", to_string(a.kind)},
                        {"power_W", a.power_W},
                        {"level", a.level},
                        {"commanded", a.commanded}});
    }
    return {{"time", time_json(r.time)},
            {"outdoor_temp_C", r.outdoor_temp_C},
            {"chiller_power_W", r.chiller_power_W},
            {"total_power_W", r.total_power_W},
            {"zones", std::move(zones)},
            {"appliances", std::move(apps)}};
}

Json to_json(const FleetRanking& r) {
    Json alts = Json::array();
    for (const auto& ra : r.ranked) {
        Json a = alternative_json(ra.alternative);
        a["rank"] = ra.rank;
        a["fitness"] = ra.fitness;
        a["occupied_prob"] = ra.occupied_prob;
        a["reduction_W"] = ra.reduction_W;
        a["curtailment_clamped"] = ra.curtailment_clamped;
        Json expected = Json::object();
        Json win = Json::object();
        Json dists = Json::object();
        for (std::size_t c = 0; c < r.criteria.criteria.size() && c < ra.scores.size(); ++c) {
            const auto& name = r.criteria.criteria[c];
            dists[name] = to_json(ra.scores[c]);
            if (c < ra.rationale.size()) {
                expected[name] = ra.rationale[c].expected_score;
                win[name] = ra.rationale[c].mean_win_prob;
            }
        }
        a["expected_scores"] = std::move(expected);
        a["mean_win_prob"] = std::move(win);
        a["scores"] = std::move(dists);
        alts.push_back(std::move(a));
    }
    return {{"criteria", to_json(r.criteria)},
            {"scale", {{"p_max_W", r.scale.p_max_W}, {"p_min_W", r.scale.p_min_W}}},
            {"occupied_prob", r.occupied_prob},
            {"alternatives", std::move(alts)}};
}

Json to_json(const DispatchPlan& p) {
    Json selected = Json::array();
    for (const auto& e : p.selected) {
        Json s = alternative_json(e.alternative);
        s["rank"] = e.rank;
        s["fitness"] = e.fitness;
        s["reduction_W"] = e.reduction_W;
        selected.push_back(std::move(s));
    }
    std::map<std::string, std::size_t> counts;
    for (auto s : p.status) ++counts[to_string(s)];
    return {{"step_time", time_json(p.step_time)},
            {"reason", p.reason},
            {"estimated_total_W", p.estimated_total_W},
            {"target_unmet", p.target_unmet},
            {"ranking_size", p.ranking.ranked.size()},
            {"status_counts", counts},
            {"selected", std::move(selected)}};
}

Json to_json(const EventReport& r) {
    Json plans = Json::array();
    for (const auto& p : r.plans) plans.push_back(to_json(p));
    Json series = Json::array();
    for (const auto& s : r.series) {
        Json occ = Json::array();
        for (bool b : s.zone_occupied) occ.push_back(b ? 1 : 0);
        series.push_back({{"time", time_json(s.time)},
                          {"total_power_W", s.total_power_W},
                          {"baseline_power_W", s.baseline_power_W},
                          {"achieved_reduction_W", s.achieved_reduction_W()},
                          {"estimated_reduction_W", s.estimated_reduction_W},
                          {"occupied_fraction", s.occupied_fraction},
                          {"zone_comfort", s.zone_comfort},
                          {"zone_occupied", std::move(occ)}});
    }
    Json restore = {{"restored", r.restored}, {"unrestored", r.unrestored}};
    restore["checked_at"] = r.restore_checked_at ? time_json(*r.restore_checked_at) : Json(nullptr);
    return {{"schema", kEventReportSchema},
            {"event", to_json(r.event)},
            {"status", r.status},
            {"zone_ids", r.zone_ids},
            {"noise_sigma_W", r.noise_sigma_W},
            {"summary",
             {{"decisions", r.plans.size()},
              {"mean_achieved_reduction_W", r.mean_achieved_reduction_W()},
              {"mean_estimated_reduction_W", r.mean_estimated_reduction_W()}}},
            {"plans", std::move(plans)},
            {"series", std::move(series)},
            {"restore", std::move(restore)}};
}

}  // namespace loadrank
