#include "loadrank/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "csv.hpp"
#include "loadrank/error.hpp"

namespace loadrank {
namespace {

constexpr std::int64_t kOccupancyStepSeconds = 5 * kSecondsPerMinute;

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
}

// Occupants of different zones keep slightly different hours.
OfficeProfile zone_profile(const OfficeProfile& base, std::size_t zone_index) {
    OfficeProfile p = base;
    const auto i = static_cast<int>(zone_index);
    p.arrival_mean_h += 0.25 * static_cast<double>((i * 7) % 5 - 2);
    p.departure_mean_h += 0.3 * static_cast<double>((i * 3) % 5 - 2);
    p.meeting_rate_per_h *= 0.6 + 0.2 * static_cast<double>(i % 5);
    return p;
}

}  // namespace

double diurnal_temperature(double min_C, double max_C, double peak_hour, SimTime t) {
    const double h = t.hour_of_day();
    const double span = max_C - min_C;
    if (h <= peak_hour) return min_C + span * 0.5 * (1.0 - std::cos(std::numbers::pi * h / peak_hour));
    return min_C + span * 0.5 * (1.0 + std::cos(std::numbers::pi * (h - peak_hour) / (24.0 - peak_hour)));
}

WeatherProfile::WeatherProfile(std::vector<std::pair<SimTime, double>> knots) : knots_(std::move(knots)) {
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!(knots_[i - 1].first < knots_[i].first)) throw ValidationError("weather knots must be strictly increasing");
    }
    for (const auto& [t, v] : knots_) {
        if (!std::isfinite(v)) throw ValidationError("weather temperature must be finite");
    }
}

WeatherProfile WeatherProfile::constant(double temp_C, SimTime from, SimTime to) {
    if (!(from < to)) return WeatherProfile({{from, temp_C}});
    return WeatherProfile({{from, temp_C}, {to, temp_C}});
}

WeatherProfile WeatherProfile::diurnal(double min_C, double max_C, double peak_hour, int days, int step_minutes) {
    if (days < 1 || step_minutes < 1) throw ValidationError("diurnal weather needs days >= 1 and step >= 1 minute");
    if (!(peak_hour > 0.0 && peak_hour < 24.0)) throw ValidationError("peak hour must lie in (0, 24)");
    std::vector<std::pair<SimTime, double>> knots;
    const std::int64_t end = days * kSecondsPerDay;
    for (std::int64_t s = 0; s <= end; s += step_minutes * kSecondsPerMinute) {
        knots.emplace_back(SimTime{s}, diurnal_temperature(min_C, max_C, peak_hour, SimTime{s}));
    }
    return WeatherProfile(std::move(knots));
}

bool WeatherProfile::covers(SimTime from, SimTime to) const {
    return !knots_.empty() && knots_.front().first <= from && to <= knots_.back().first;
}

double WeatherProfile::at(SimTime t) const {
    if (knots_.empty()) throw ValidationError("weather profile is empty");
    if (t < knots_.front().first || knots_.back().first < t) {
        throw ValidationError("weather profile does not cover " + to_iso8601(t));
    }
    auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                               [](const auto& knot, SimTime x) { return knot.first < x; });
    if (it->first == t) return it->second;
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    const double w = static_cast<double>(t - t0) / static_cast<double>(t1 - t0);
    return v0 + w * (v1 - v0);
}

const ZoneThermalParams& ScenarioConfig::thermal_for(const std::string& zone_id) const {
    auto it = zone_thermal.find(zone_id);
    return it == zone_thermal.end() ? thermal : it->second;
}

const ZoneRecord* MeasurementRecord::zone(const std::string& zone_id) const {
    for (const auto& z : zones) {
        if (z.zone_id == zone_id) return &z;
    }
    return nullptr;
}

const ApplianceRecord* MeasurementRecord::appliance(const std::string& appliance_id) const {
    for (const auto& a : appliances) {
        if (a.appliance_id == appliance_id) return &a;
    }
    return nullptr;
}

ChillerModel plant_chiller_model(const Building& building, const ScenarioConfig& scenario) {
    if (!(scenario.chiller_cop > 0)) throw ValidationError("chiller COP must be positive");
    ChillerModel m;
    for (const Zone* z : building.zones()) {
        const auto& th = scenario.thermal_for(z->id);
        const double conductance = 1.0 / th.resistance_K_per_W;
        m.zone_ids.push_back(z->id);
        m.beta_z.push_back(-conductance / scenario.chiller_cop);
        m.beta_out += conductance / scenario.chiller_cop;
        m.beta0 += th.base_gain_W / scenario.chiller_cop;
    }
    m.fit_stats.solver = "plant";
    return m;
}

Emulator::Emulator(Building building, ScenarioConfig scenario)
    : building_(std::move(building)), scenario_(std::move(scenario)) {
    validate_building(building_);
    if (!(scenario_.dt_seconds >= 10.0 && scenario_.dt_seconds <= 900.0)) {
        throw ValidationError("dt_seconds must lie in [10, 900]");
    }
    if (!(scenario_.operating_start_h <= scenario_.operating_end_h)) {
        throw ValidationError("operating hours must not be reversed");
    }
    if (scenario_.chiller_noise_fraction < 0) throw ValidationError("chiller noise fraction must be non-negative");
    for (const auto& [zone_id, th] : scenario_.zone_thermal) {
        if (!building_.find_zone(zone_id)) throw ValidationError("thermal parameters for unknown zone '" + zone_id + "'");
    }
    plant_ = plant_chiller_model(building_, scenario_);

    const auto zones = building_.zones();
    std::vector<double> design_setpoints;
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const Zone& z = *zones[i];
        const auto& th = scenario_.thermal_for(z.id);
        if (!(th.capacitance_J_per_K > 0 && th.resistance_K_per_W > 0)) {
            throw ValidationError("zone '" + z.id + "' needs positive capacitance and resistance");
        }
        if (th.cooling_gain_W_per_K < 0 || th.cooling_capacity_W < 0) {
            throw ValidationError("zone '" + z.id + "' has negative cooling parameters");
        }
        design_setpoints.push_back(z.desired_temp_C);

        auto given = scenario_.occupancy_models.find(z.id);
        OccupancyModel model;
        if (given != scenario_.occupancy_models.end()) {
            model = given->second;
            model.validate();
            if (model.sample_minutes != 5) throw ValidationError("true occupancy models must use 5-minute samples");
        } else {
            auto rng = derived_rng(scenario_.seed, i, 0x0CC0);
            const auto trace = generate_office_trace(z.id, zone_profile(scenario_.occupancy_profile, i), rng(),
                                                     scenario_.occupancy_training_days);
            OccupancyFitOptions fit;
            fit.min_days = 1.0;
            fit.laplace = 0.0;
            model = fit_occupancy(trace, fit);
        }
        model.zone_id = z.id;
        occupancy_models_.emplace(z.id, std::move(model));
        occupancy_rngs_.emplace(z.id, derived_rng(scenario_.seed, i, 0x5A3F));

        const bool occ = std::find(scenario_.initially_occupied.begin(), scenario_.initially_occupied.end(), z.id) !=
                         scenario_.initially_occupied.end();
        state_.occupancy[z.id] = occ;
        state_.occupancy_duration_min[z.id] = occ ? 5 : 600;
        ZoneThermalState zs;
        zs.temp_C = z.desired_temp_C;
        zs.setpoint_C = z.desired_temp_C;
        zs.thermal_capacitance_J_per_K = th.capacitance_J_per_K;
        zs.envelope_resistance_K_per_W = th.resistance_K_per_W;
        state_.zones.emplace(z.id, zs);
    }
    nominal_chiller_W_ = std::max(0.0, predict_power(plant_, scenario_.design_outdoor_temp_C, design_setpoints));
    if (!scenario_.weather.empty() && !scenario_.weather.covers(scenario_.start, scenario_.start)) {
        throw ValidationError("weather profile does not cover the scenario start");
    }
    noise_rng_ = derived_rng(scenario_.seed, 0, 0xC41E);
    state_.sim_clock = scenario_.start;
    noise_draw_ = std::normal_distribution<double>(0.0, 1.0)(noise_rng_);
    refresh_outputs();
}

const OccupancyModel& Emulator::true_occupancy_model(const std::string& zone_id) const {
    auto it = occupancy_models_.find(zone_id);
    if (it == occupancy_models_.end()) throw ValidationError("unknown zone '" + zone_id + "'");
    return it->second;
}

double Emulator::noise_sigma_W() const { return scenario_.chiller_noise_fraction * nominal_chiller_W_; }

double Emulator::reference_level(const Appliance& appliance, bool occupied, SimTime t) const {
    if (appliance.kind == ApplianceKind::HvacSetpoint) return appliance.baseline().value;
    const double h = t.hour_of_day();
    const bool hours = h >= scenario_.operating_start_h && h < scenario_.operating_end_h;
    return (occupied || hours) ? appliance.baseline().value : 0.0;
}

void Emulator::enqueue(std::span<const ControlCommand> commands) {
    for (const auto& c : commands) {
        const Appliance* a = building_.find_appliance(c.appliance_id);
        if (!a) throw ValidationError("command for unknown appliance '" + c.appliance_id + "'");
        if (c.setting_index && *c.setting_index >= a->settings.size()) {
            throw ValidationError("setting index out of range for '" + c.appliance_id + "'");
        }
    }
    inbox_.insert(inbox_.end(), commands.begin(), commands.end());
}

void Emulator::apply_command(const ControlCommand& command) {
    if (command.setting_index) {
        state_.commands[command.appliance_id] = ActiveCommand{*command.setting_index, command.expires_at};
    } else {
        state_.commands.erase(command.appliance_id);
    }
}

void Emulator::inject_weather(WeatherProfile profile, SimTime until) {
    if (profile.empty()) throw ValidationError("weather profile is empty");
    if (!profile.covers(state_.sim_clock, until)) {
        throw ValidationError("weather profile must cover " + to_iso8601(state_.sim_clock) + " to " +
                              to_iso8601(until));
    }
    scenario_.weather = std::move(profile);
    refresh_outputs();
}

const EmulatorState& Emulator::step(std::span<const ControlCommand> controls, double dt_seconds) {
    if (!(dt_seconds >= 10.0 && dt_seconds <= 900.0)) throw ValidationError("step dt must lie in [10, 900] s");
    const auto dt = static_cast<std::int64_t>(std::llround(dt_seconds));
    for (const auto& [id, zs] : state_.zones) {
        if (!(static_cast<double>(dt) < 0.5 * zs.thermal_capacitance_J_per_K * zs.envelope_resistance_K_per_W)) {
            throw ValidationError("step dt too large for the thermal time constant of zone '" + id + "'");
        }
    }
    enqueue(controls);
    for (const auto& c : inbox_) apply_command(c);
    inbox_.clear();
    std::erase_if(state_.commands, [&](const auto& kv) {
        return kv.second.expires_at && *kv.second.expires_at <= state_.sim_clock;
    });
    refresh_outputs();

    for (const Zone* z : building_.zones()) {
        const auto& th = scenario_.thermal_for(z->id);
        auto& zs = state_.zones.at(z->id);
        const double conductance = 1.0 / th.resistance_K_per_W;
        const double h_max = 0.5 * th.capacitance_J_per_K / (conductance + th.cooling_gain_W_per_K);
        const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(static_cast<double>(dt) / h_max)));
        const double h = static_cast<double>(dt) / static_cast<double>(n);
        for (std::int64_t k = 0; k < n; ++k) {
            const double q_cool =
                std::clamp(th.cooling_gain_W_per_K * (zs.temp_C - zs.setpoint_C), 0.0, th.cooling_capacity_W);
            zs.temp_C += h / th.capacitance_J_per_K *
                         ((state_.outdoor_temp_C - zs.temp_C) * conductance + zs.internal_gain_W - q_cool);
        }
    }

    const SimTime t0 = state_.sim_clock;
    const SimTime t1 = t0 + dt;
    std::int64_t b = (t0.seconds / kOccupancyStepSeconds + 1) * kOccupancyStepSeconds;
    if (t0.seconds < 0 && t0.seconds % kOccupancyStepSeconds != 0) b -= kOccupancyStepSeconds;
    for (; b <= t1.seconds; b += kOccupancyStepSeconds) {
        for (auto& [zone_id, model] : occupancy_models_) {
            OccupancySampler sampler(model, {state_.occupancy[zone_id], state_.occupancy_duration_min[zone_id]});
            const auto& next = sampler.advance(SimTime{b - kOccupancyStepSeconds}, occupancy_rngs_.at(zone_id));
            state_.occupancy[zone_id] = next.occupied;
            state_.occupancy_duration_min[zone_id] = next.duration_minutes;
        }
    }

    state_.sim_clock = t1;
    std::erase_if(state_.commands,
                  [&](const auto& kv) { return kv.second.expires_at && *kv.second.expires_at <= t1; });
    // Drawn every step, whether or not anything is commanded, so that runs
    // sharing a seed see identical noise.
    noise_draw_ = std::normal_distribution<double>(0.0, 1.0)(noise_rng_);
    refresh_outputs();
    return state_;
}

void Emulator::refresh_outputs() {
    const SimTime t = state_.sim_clock;
    state_.outdoor_temp_C = scenario_.weather.empty()
                                ? diurnal_temperature(scenario_.weather_min_C, scenario_.weather_max_C,
                                                      scenario_.weather_peak_hour, t)
                                : scenario_.weather.at(t);
    std::vector<double> setpoints;
    double appliance_total = 0.0;
    for (const Zone* z : building_.zones()) {
        const auto& th = scenario_.thermal_for(z->id);
        const bool occ = state_.occupancy.at(z->id);
        auto& zs = state_.zones.at(z->id);
        double offset = 0.0;
        double zone_load = 0.0;
        for (const auto& a : z->appliances) {
            auto cmd = state_.commands.find(a.id);
            const double level = cmd != state_.commands.end() ? a.settings[cmd->second.setting_index].value
                                                              : reference_level(a, occ, t);
            if (a.kind == ApplianceKind::HvacSetpoint) {
                offset = level;
            } else {
                const double p = level * a.rated_power_W;
                state_.appliance_powers_W[a.id] = p;
                zone_load += p;
            }
        }
        zs.setpoint_C = z->desired_temp_C + offset;
        zs.internal_gain_W = th.base_gain_W + (occ ? th.occupant_gain_W : 0.0) + zone_load;
        setpoints.push_back(zs.setpoint_C);
        appliance_total += zone_load;
    }
    state_.chiller_power_W =
        std::max(0.0, predict_power(plant_, state_.outdoor_temp_C, setpoints) + noise_draw_ * noise_sigma_W());
    state_.total_power_W = state_.chiller_power_W + appliance_total;
}

MeasurementRecord Emulator::snapshot() const {
    MeasurementRecord r;
    r.time = state_.sim_clock;
    r.outdoor_temp_C = state_.outdoor_temp_C;
    r.chiller_power_W = state_.chiller_power_W;
    r.total_power_W = state_.total_power_W;
    for (const Zone* z : building_.zones()) {
        const auto& zs = state_.zones.at(z->id);
        ZoneRecord zr;
        zr.zone_id = z->id;
        zr.temp_C = zs.temp_C;
        zr.setpoint_C = zs.setpoint_C;
        zr.setpoint_offset_C = zs.setpoint_C - z->desired_temp_C;
        zr.occupied = state_.occupancy.at(z->id);
        zr.occupancy_duration_min = state_.occupancy_duration_min.at(z->id);
        for (const auto& a : z->appliances) {
            const bool commanded = state_.commands.contains(a.id);
            if (a.kind == ApplianceKind::HvacSetpoint) {
                zr.hvac_commanded = zr.hvac_commanded || commanded;
                continue;
            }
            const double p = state_.appliance_powers_W.at(a.id);
            r.appliances.push_back({a.id, z->id, a.kind, p, p / a.rated_power_W, commanded});
        }
        r.zones.push_back(std::move(zr));
    }
    return r;
}

std::vector<MeasurementRecord> generate_history(Emulator& emulator, const HistoryOptions& options) {
    if (options.days <= 0) throw ValidationError("days must be positive");
    if (options.record_interval_minutes < 1 || options.excitation_period_minutes < 1) {
        throw ValidationError("record and excitation intervals must be at least one minute");
    }
    if (options.excitation_min_C > options.excitation_max_C) throw ValidationError("excitation range is reversed");
    const auto record_every = options.record_interval_minutes * kSecondsPerMinute;
    const auto excite_every = options.excitation_period_minutes * kSecondsPerMinute;
    const SimTime begin = emulator.state().sim_clock;
    const SimTime end = begin + options.days * kSecondsPerDay;
    auto rng = derived_rng(emulator.scenario().seed, 0, 0xE7C1);

    std::vector<MeasurementRecord> out;
    out.reserve(static_cast<std::size_t>((end - begin) / record_every) + 1);
    out.push_back(emulator.snapshot());
    SimTime next_record = begin + record_every;
    SimTime next_excite = begin;
    while (emulator.state().sim_clock < end) {
        const SimTime now = emulator.state().sim_clock;
        std::vector<ControlCommand> commands;
        if (options.excite_setpoints && now >= next_excite) {
            for (const Zone* z : emulator.building().zones()) {
                for (const auto& a : z->appliances) {
                    if (a.kind != ApplianceKind::HvacSetpoint) continue;
                    std::vector<std::size_t> allowed;
                    for (std::size_t i = 0; i < a.settings.size(); ++i) {
                        const double v = a.settings[i].value;
                        if (v >= options.excitation_min_C && v <= options.excitation_max_C) allowed.push_back(i);
                    }
                    if (allowed.empty()) continue;
                    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
                    commands.push_back({a.id, allowed[pick(rng)], std::nullopt});
                }
            }
            next_excite = next_excite + excite_every;
        }
        const double dt = std::min(emulator.scenario().dt_seconds, static_cast<double>(next_record - now));
        emulator.step(commands, std::max(10.0, dt));
        if (emulator.state().sim_clock >= next_record) {
            out.push_back(emulator.snapshot());
            next_record = next_record + record_every;
        }
    }
    return out;
}

void write_snapshot_csv_header(std::ostream& out, const MeasurementRecord& layout) {
    out << "timestamp,outdoor_temp_C,chiller_power_W,total_power_W";
    for (const auto& z : layout.zones) {
        out << ",temp_" << z.zone_id << "_C,setpoint_" << z.zone_id << "_C,occupied_" << z.zone_id;
    }
    for (const auto& a : layout.appliances) out << ",power_" << a.appliance_id << "_W";
    out << '\n';
}

void write_snapshot_csv_row(std::ostream& out, const MeasurementRecord& r) {
    out << to_iso8601(r.time) << ',' << csv::fmt(r.outdoor_temp_C) << ',' << csv::fmt(r.chiller_power_W) << ','
        << csv::fmt(r.total_power_W);
    for (const auto& z : r.zones) {
        out << ',' << csv::fmt(z.temp_C) << ',' << csv::fmt(z.setpoint_C) << ',' << (z.occupied ? 1 : 0);
    }
    for (const auto& a : r.appliances) out << ',' << csv::fmt(a.power_W);
    out << '\n';
}

std::vector<OccupancyTrace> occupancy_traces(const std::vector<MeasurementRecord>& records, int interval_minutes) {
    std::vector<OccupancyTrace> out;
    if (records.empty()) return out;
    for (const auto& z : records.front().zones) {
        std::vector<OccupancySample> events;
        events.reserve(records.size());
        for (const auto& r : records) {
            const ZoneRecord* zr = r.zone(z.zone_id);
            if (!zr) throw ValidationError("snapshot series lacks zone '" + z.zone_id + "'");
            events.push_back({r.time, zr->occupied});
        }
        out.push_back(resample_events(z.zone_id, std::move(events), interval_minutes, records.back().time));
    }
    return out;
}

std::vector<ChillerObservation> chiller_observations(const std::vector<MeasurementRecord>& records) {
    std::vector<ChillerObservation> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        ChillerObservation o{r.time, r.chiller_power_W, r.outdoor_temp_C, {}};
        for (const auto& z : r.zones) o.setpoints_C.push_back(z.setpoint_C);
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace loadrank
