#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loadrank/chiller.hpp"
#include "loadrank/domain.hpp"
#include "loadrank/occupancy.hpp"
#include "loadrank/time.hpp"

namespace loadrank {

/// Daily cycle with its minimum at midnight and maximum at `peak_hour`: a
/// rising half-cosine up to the peak, a falling one back down to midnight.
double diurnal_temperature(double min_C, double max_C, double peak_hour, SimTime t);

/// Piecewise-linear outdoor temperature over time.
class WeatherProfile {
public:
    WeatherProfile() = default;
    explicit WeatherProfile(std::vector<std::pair<SimTime, double>> knots);

    static WeatherProfile constant(double temp_C, SimTime from, SimTime to);
    /// Samples diurnal_temperature every `step_minutes` over days [0, days].
    static WeatherProfile diurnal(double min_C, double max_C, double peak_hour, int days, int step_minutes = 10);

    bool empty() const { return knots_.empty(); }
    bool covers(SimTime from, SimTime to) const;
    double at(SimTime t) const;
    const std::vector<std::pair<SimTime, double>>& knots() const { return knots_; }

private:
    std::vector<std::pair<SimTime, double>> knots_;
};

struct ZoneThermalParams {
    double capacitance_J_per_K = 5e6;
    double resistance_K_per_W = 2e-3;
    /// Equipment and envelope gains present at all times.
    double base_gain_W = 1500.0;
    double occupant_gain_W = 600.0;
    /// Proportional HVAC: cooling = gain * (T - T_set), saturated at capacity.
    double cooling_gain_W_per_K = 1e5;
    double cooling_capacity_W = 30000.0;

    bool operator==(const ZoneThermalParams&) const = default;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double dt_seconds = 60.0;
    SimTime start{};
    ZoneThermalParams thermal;
    std::map<std::string, ZoneThermalParams> zone_thermal;
    double chiller_cop = 3.5;
    /// Standard deviation of chiller noise as a fraction of design-day power.
    double chiller_noise_fraction = 0.02;
    double design_outdoor_temp_C = 35.0;
    /// Lights and PCs are on during these hours even without occupants.
    double operating_start_h = 7.0;
    double operating_end_h = 19.0;
    /// Used when `weather` is empty.
    double weather_min_C = 28.0;
    double weather_max_C = 38.0;
    double weather_peak_hour = 15.0;
    WeatherProfile weather;
    /// True occupancy chains; zones without one get a model fitted to a
    /// synthetic office trace from `occupancy_profile`.
    std::map<std::string, OccupancyModel> occupancy_models;
    OfficeProfile occupancy_profile;
    int occupancy_training_days = 60;
    /// Zones listed here start occupied at `start`.
    std::vector<std::string> initially_occupied;

    const ZoneThermalParams& thermal_for(const std::string& zone_id) const;
};

/// Set (setting_index) or release (nullopt) one appliance's curtailment command.
struct ControlCommand {
    std::string appliance_id;
    std::optional<std::size_t> setting_index;
    std::optional<SimTime> expires_at;

    bool operator==(const ControlCommand&) const = default;
};

struct ActiveCommand {
    std::size_t setting_index = 0;
    std::optional<SimTime> expires_at;
};

struct ZoneThermalState {
    double temp_C = 22.0;
    double setpoint_C = 22.0;
    double thermal_capacitance_J_per_K = 5e6;
    double envelope_resistance_K_per_W = 2e-3;
    double internal_gain_W = 0.0;
};

struct EmulatorState {
    SimTime sim_clock;
    std::map<std::string, ZoneThermalState> zones;
    /// Lights and plug loads; HVAC draw is part of the chiller power.
    std::map<std::string, double> appliance_powers_W;
    std::map<std::string, bool> occupancy;
    std::map<std::string, int> occupancy_duration_min;
    std::map<std::string, ActiveCommand> commands;
    double outdoor_temp_C = 0.0;
    double chiller_power_W = 0.0;
    double total_power_W = 0.0;
};

struct ZoneRecord {
    std::string zone_id;
    double temp_C = 0.0;
    double setpoint_C = 0.0;
    double setpoint_offset_C = 0.0;
    bool hvac_commanded = false;
    bool occupied = false;
    int occupancy_duration_min = 0;

    bool operator==(const ZoneRecord&) const = default;
};

struct ApplianceRecord {
    std::string appliance_id;
    std::string zone_id;
    ApplianceKind kind = ApplianceKind::PlugLoad;
    double power_W = 0.0;
    /// Power fraction (lights) or on/off (plugs).
    double level = 0.0;
    bool commanded = false;

    bool operator==(const ApplianceRecord&) const = default;
};

/// Immutable measurement row: the historical-data format of the learning modules.
struct MeasurementRecord {
    SimTime time;
    double outdoor_temp_C = 0.0;
    double chiller_power_W = 0.0;
    double total_power_W = 0.0;
    std::vector<ZoneRecord> zones;
    std::vector<ApplianceRecord> appliances;

    const ZoneRecord* zone(const std::string& zone_id) const;
    const ApplianceRecord* appliance(const std::string& appliance_id) const;
    bool operator==(const MeasurementRecord&) const = default;
};

/// Affine chiller the emulator uses as its plant: steady-state envelope load
/// of every zone divided by the chiller COP.
ChillerModel plant_chiller_model(const Building& building, const ScenarioConfig& scenario);

/// Lumped-parameter digital twin of a multi-zone office.
///
/// Single owner: one caller steps it; everyone else reads snapshots. Commands
/// queue in an inbox and take effect at the next step boundary. Copying an
/// emulator copies its random streams, so a copy replays the same noise.
class Emulator {
public:
    Emulator(Building building, ScenarioConfig scenario);

    void enqueue(std::span<const ControlCommand> commands);
    const EmulatorState& step(std::span<const ControlCommand> controls, double dt_seconds);
    const EmulatorState& step() { return step({}, scenario_.dt_seconds); }

    /// Replaces the outdoor temperature source; must cover [now, until].
    void inject_weather(WeatherProfile profile, SimTime until);

    MeasurementRecord snapshot() const;
    const EmulatorState& state() const { return state_; }
    const Building& building() const { return building_; }
    const ScenarioConfig& scenario() const { return scenario_; }
    const ChillerModel& plant() const { return plant_; }
    const OccupancyModel& true_occupancy_model(const std::string& zone_id) const;

    /// Level an appliance would run at with no command in force.
    double reference_level(const Appliance& appliance, bool occupied, SimTime t) const;

private:
    void apply_command(const ControlCommand& command);
    void refresh_outputs();
    double noise_sigma_W() const;

    Building building_;
    ScenarioConfig scenario_;
    ChillerModel plant_;
    double nominal_chiller_W_ = 0.0;
    std::map<std::string, OccupancyModel> occupancy_models_;
    std::map<std::string, std::mt19937_64> occupancy_rngs_;
    std::mt19937_64 noise_rng_;
    double noise_draw_ = 0.0;
    std::vector<ControlCommand> inbox_;
    EmulatorState state_;
};

struct HistoryOptions {
    int days = 14;
    int record_interval_minutes = 5;
    /// Random per-zone set-point offsets held for `excitation_period_minutes`,
    /// so that the chiller regression can separate the zones.
    bool excite_setpoints = true;
    double excitation_min_C = -2.0;
    double excitation_max_C = 3.0;
    int excitation_period_minutes = 60;
};

/// Runs the emulator forward and records a snapshot every record interval,
/// starting with the current state.
std::vector<MeasurementRecord> generate_history(Emulator& emulator, const HistoryOptions& options = {});

/// timestamp,outdoor_temp_C,chiller_power_W,total_power_W, then per zone
/// temp_<z>_C,setpoint_<z>_C,occupied_<z>, then power_<appliance>_W.
void write_snapshot_csv_header(std::ostream& out, const MeasurementRecord& layout);
void write_snapshot_csv_row(std::ostream& out, const MeasurementRecord& record);

/// Per-zone occupancy traces recovered from a snapshot series.
std::vector<OccupancyTrace> occupancy_traces(const std::vector<MeasurementRecord>& records, int interval_minutes);
/// Chiller observations recovered from a snapshot series.
std::vector<ChillerObservation> chiller_observations(const std::vector<MeasurementRecord>& records);

}  // namespace loadrank
