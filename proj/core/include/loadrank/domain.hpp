#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace loadrank {

enum class ApplianceKind { HvacSetpoint, DimmableLight, PlugLoad };

std::string to_string(ApplianceKind kind);
ApplianceKind appliance_kind_from_string(const std::string& text);

/// One discrete setting of a control knob.
///
/// The meaning of `value` depends on the owning appliance:
///  - HvacSetpoint: set-point offset in degC from the zone's desired temperature
///  - DimmableLight: power fraction of rated power in [0, 1]
///  - PlugLoad: 1 for on, 0 for off
struct ControlSetting {
    double value = 0.0;
    bool baseline = false;

    bool operator==(const ControlSetting&) const = default;
};

struct Appliance {
    std::string id;
    std::string zone_id;
    ApplianceKind kind = ApplianceKind::PlugLoad;
    /// Unused for HvacSetpoint (power effect comes from the chiller model).
    double rated_power_W = 0.0;
    std::vector<ControlSetting> settings;

    std::size_t baseline_index() const;
    const ControlSetting& baseline() const { return settings[baseline_index()]; }
    /// Electrical draw of this appliance at `setting_index` (0 for HVAC).
    double power_at(std::size_t setting_index) const;

    bool operator==(const Appliance&) const = default;
};

struct Zone {
    std::string id;
    std::string floor_id;
    double desired_temp_C = 22.0;
    double comfort_alpha = 10.0;
    double comfort_delta_C = 3.0;
    /// Curtailment-score spread; scores range over [1/alpha, 1].
    double curtailment_alpha = 10.0;
    std::vector<Appliance> appliances;

    bool operator==(const Zone&) const = default;
};

struct Floor {
    std::string id;
    std::vector<Zone> zones;

    bool operator==(const Floor&) const = default;
};

struct Building {
    std::string id;
    double floor_area_m2 = 1.0;
    std::vector<Floor> floors;

    std::vector<const Zone*> zones() const;
    std::vector<std::string> zone_ids() const;
    const Zone* find_zone(const std::string& zone_id) const;
    const Appliance* find_appliance(const std::string& appliance_id) const;
    std::size_t zone_count() const;

    bool operator==(const Building&) const = default;
};

/// Throws ValidationError naming the offending floor/zone/appliance.
void validate_building(const Building& building);

/// A (knob, setting) pair. Settings are indexed from 0 in the knob's order.
struct ControlAlternative {
    std::string zone_id;
    std::string appliance_id;
    ApplianceKind kind = ApplianceKind::PlugLoad;
    std::size_t setting_index = 0;
    double setting_value = 0.0;

    std::string label() const;
    bool operator==(const ControlAlternative&) const = default;
};

struct EnumerateOptions {
    bool exclude_baseline = false;
};

/// Every (appliance, setting) pair, ordered by floor, zone, appliance, setting.
/// Validates the building first.
std::vector<ControlAlternative> enumerate_alternatives(const Building& building, EnumerateOptions options = {});

struct CriteriaConfig {
    std::vector<std::string> criteria{"comfort", "curtailment"};
    std::vector<double> weights{0.6, 0.4};
    double threshold = 0.75;

    bool operator==(const CriteriaConfig&) const = default;
};

inline constexpr std::size_t kComfortCriterion = 0;
inline constexpr std::size_t kCurtailmentCriterion = 1;
inline constexpr std::size_t kMaxCriteria = 32;

/// Weights non-negative and summing to 1 (1e-9), threshold in (0.5, 1).
void validate_criteria(const CriteriaConfig& config);

/// Setting grids used by the reference office building.
std::vector<ControlSetting> hvac_offset_settings(double max_offset_C = 5.0, double step_C = 1.0);
std::vector<ControlSetting> dimming_settings(double step = 0.2);
std::vector<ControlSetting> plug_settings();

struct ReferenceBuildingOptions {
    int floors = 3;
    std::vector<std::string> zone_names{"N", "E", "S", "W", "C"};
    double light_rated_W = 400.0;
    double pc_rated_W = 150.0;
    double floor_area_m2 = 46320.0;
};

/// Multi-floor office: every zone carries an HVAC set-point knob (11 offsets),
/// a dimmable light (6 levels) and a PC plug load (on/off).
Building make_reference_building(const ReferenceBuildingOptions& options = {});

}  // namespace loadrank
