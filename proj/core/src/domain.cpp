#include "loadrank/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "loadrank/error.hpp"

namespace loadrank {
namespace {

constexpr double kGridTolerance = 1e-9;

bool on_grid(double value, double step) {
    const double k = value / step;
    return std::abs(k - std::round(k)) < kGridTolerance;
}

void validate_settings(const Zone& zone, const Appliance& appliance) {
    const auto where = "zone '" + zone.id + "' appliance '" + appliance.id + "'";
    if (appliance.settings.empty()) {
        throw ValidationError(where + ": settings must be non-empty");
    }
    const auto baselines = std::count_if(appliance.settings.begin(), appliance.settings.end(),
                                         [](const ControlSetting& s) { return s.baseline; });
    if (baselines != 1) {
        throw ValidationError(where + ": exactly one baseline setting required, found " + std::to_string(baselines));
    }
    std::set<long long> seen;
    for (const auto& s : appliance.settings) {
        if (!std::isfinite(s.value)) throw ValidationError(where + ": non-finite setting value");
        switch (appliance.kind) {
            case ApplianceKind::HvacSetpoint:
                if (s.value < -5.0 - kGridTolerance || s.value > 5.0 + kGridTolerance || !on_grid(s.value, 1.0)) {
                    throw ValidationError(where + ": HVAC offset " + std::to_string(s.value) +
                                          " must be a whole degree within [-5, +5]");
                }
                break;
            case ApplianceKind::DimmableLight:
                if (s.value < -kGridTolerance || s.value > 1.0 + kGridTolerance || !on_grid(s.value, 0.2)) {
                    throw ValidationError(where + ": light level " + std::to_string(s.value) +
                                          " must be a multiple of 0.2 within [0, 1]");
                }
                break;
            case ApplianceKind::PlugLoad:
                if (s.value != 0.0 && s.value != 1.0) {
                    throw ValidationError(where + ": plug-load setting must be 0 (off) or 1 (on)");
                }
                break;
        }
        if (!seen.insert(std::llround(s.value * 1e6)).second) {
            throw ValidationError(where + ": duplicate setting value " + std::to_string(s.value));
        }
    }
    if (appliance.kind == ApplianceKind::PlugLoad && appliance.settings.size() != 2) {
        throw ValidationError(where + ": plug load must offer exactly {on, off}");
    }
    if (appliance.kind != ApplianceKind::HvacSetpoint && !(appliance.rated_power_W > 0.0)) {
        throw ValidationError(where + ": rated_power_W must be positive");
    }
}

}  // namespace

std::string to_string(ApplianceKind kind) {
    switch (kind) {
        case ApplianceKind::HvacSetpoint: return "hvac_setpoint";
        case ApplianceKind::DimmableLight: return "dimmable_light";
        case ApplianceKind::PlugLoad: return "plug_load";
    }
    return "unknown";
}

ApplianceKind appliance_kind_from_string(const std::string& text) {
    if (text == "hvac_setpoint") return ApplianceKind::HvacSetpoint;
    if (text == "dimmable_light") return ApplianceKind::DimmableLight;
    if (text == "plug_load") return ApplianceKind::PlugLoad;
    throw ValidationError("unknown appliance kind '" + text + "'");
}

std::size_t Appliance::baseline_index() const {
    for (std::size_t i = 0; i < settings.size(); ++i) {
        if (settings[i].baseline) return i;
    }
    throw ValidationError("appliance '" + id + "' has no baseline setting");
}

double Appliance::power_at(std::size_t setting_index) const {
    if (setting_index >= settings.size()) {
        throw ValidationError("appliance '" + id + "': setting index " + std::to_string(setting_index) +
                              " out of range");
    }
    switch (kind) {
        case ApplianceKind::HvacSetpoint: return 0.0;
        case ApplianceKind::DimmableLight:
        case ApplianceKind::PlugLoad: return settings[setting_index].value * rated_power_W;
    }
    return 0.0;
}

std::vector<const Zone*> Building::zones() const {
    std::vector<const Zone*> out;
    for (const auto& f : floors) {
        for (const auto& z : f.zones) out.push_back(&z);
    }
    return out;
}

std::vector<std::string> Building::zone_ids() const {
    std::vector<std::string> out;
    for (const auto* z : zones()) out.push_back(z->id);
    return out;
}

const Zone* Building::find_zone(const std::string& zone_id) const {
    for (const auto* z : zones()) {
        if (z->id == zone_id) return z;
    }
    return nullptr;
}

const Appliance* Building::find_appliance(const std::string& appliance_id) const {
    for (const auto* z : zones()) {
        for (const auto& a : z->appliances) {
            if (a.id == appliance_id) return &a;
        }
    }
    return nullptr;
}

std::size_t Building::zone_count() const {
    return std::accumulate(floors.begin(), floors.end(), std::size_t{0},
                           [](std::size_t acc, const Floor& f) { return acc + f.zones.size(); });
}

void validate_building(const Building& building) {
    if (!(building.floor_area_m2 > 0.0)) throw ValidationError("building floor_area_m2 must be positive");
    if (building.floors.empty()) throw ValidationError("building '" + building.id + "' has no floors");
    std::set<std::string> zone_ids;
    std::set<std::string> appliance_ids;
    for (const auto& floor : building.floors) {
        if (floor.zones.empty()) throw ValidationError("floor '" + floor.id + "' has no zones");
        for (const auto& zone : floor.zones) {
            if (zone.id.empty()) throw ValidationError("floor '" + floor.id + "' has a zone with an empty id");
            if (!zone_ids.insert(zone.id).second) {
                throw ValidationError("duplicate zone id '" + zone.id + "'");
            }
            if (!(zone.comfort_alpha > 1.0)) {
                throw ValidationError("zone '" + zone.id + "': comfort_alpha must be > 1");
            }
            if (!(zone.comfort_delta_C > 0.0)) {
                throw ValidationError("zone '" + zone.id + "': comfort_delta_C must be > 0");
            }
            if (!(zone.curtailment_alpha > 1.0)) {
                throw ValidationError("zone '" + zone.id + "': curtailment_alpha must be > 1");
            }
            if (!std::isfinite(zone.desired_temp_C)) {
                throw ValidationError("zone '" + zone.id + "': desired_temp_C must be finite");
            }
            int hvac_knobs = 0;
            for (const auto& appliance : zone.appliances) {
                if (appliance.id.empty()) throw ValidationError("zone '" + zone.id + "' has an appliance with an empty id");
                if (!appliance_ids.insert(appliance.id).second) {
                    throw ValidationError("duplicate appliance id '" + appliance.id + "'");
                }
                if (appliance.zone_id != zone.id) {
                    throw ValidationError("appliance '" + appliance.id + "' references zone '" + appliance.zone_id +
                                          "' but is listed under zone '" + zone.id + "'");
                }
                if (appliance.kind == ApplianceKind::HvacSetpoint && ++hvac_knobs > 1) {
                    throw ValidationError("zone '" + zone.id + "' has more than one HVAC set-point knob");
                }
                validate_settings(zone, appliance);
            }
        }
    }
}

std::string ControlAlternative::label() const {
    std::ostringstream os;
    os << appliance_id << '=';
    switch (kind) {
        case ApplianceKind::HvacSetpoint: os << (setting_value >= 0 ? "+" : "") << setting_value << "C"; break;
        case ApplianceKind::DimmableLight: os << std::lround(setting_value * 100) << '%'; break;
        case ApplianceKind::PlugLoad: os << (setting_value > 0.5 ? "on" : "off"); break;
    }
    return os.str();
}

std::vector<ControlAlternative> enumerate_alternatives(const Building& building, EnumerateOptions options) {
    validate_building(building);
    std::vector<ControlAlternative> out;
    for (const auto& floor : building.floors) {
        for (const auto& zone : floor.zones) {
            for (const auto& appliance : zone.appliances) {
                for (std::size_t i = 0; i < appliance.settings.size(); ++i) {
                    if (options.exclude_baseline && appliance.settings[i].baseline) continue;
                    out.push_back({zone.id, appliance.id, appliance.kind, i, appliance.settings[i].value});
                }
            }
        }
    }
    return out;
}

void validate_criteria(const CriteriaConfig& config) {
    if (config.weights.empty()) throw ValidationError("criteria weights must be non-empty");
    if (config.weights.size() > kMaxCriteria) {
        throw ValidationError("at most " + std::to_string(kMaxCriteria) + " criteria are supported");
    }
    if (!config.criteria.empty() && config.criteria.size() != config.weights.size()) {
        throw ValidationError("criteria list has " + std::to_string(config.criteria.size()) + " labels but " +
                              std::to_string(config.weights.size()) + " weights");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < config.weights.size(); ++i) {
        const double w = config.weights[i];
        if (!std::isfinite(w) || w < 0.0) {
            throw ValidationError("weight " + std::to_string(i) + " = " + std::to_string(w) + " must be >= 0");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os.precision(12);
        os << "weights must sum to 1 (within 1e-9), got " << sum;
        throw ValidationError(os.str());
    }
    if (!(config.threshold > 0.5 && config.threshold < 1.0)) {
        std::ostringstream os;
        os << "threshold nu = " << config.threshold << " must lie in the open interval (0.5, 1)";
        throw ValidationError(os.str());
    }
}

std::vector<ControlSetting> hvac_offset_settings(double max_offset_C, double step_C) {
    std::vector<ControlSetting> out;
    const int steps = static_cast<int>(std::lround(max_offset_C / step_C));
    for (int k = -steps; k <= steps; ++k) out.push_back({k * step_C, k == 0});
    return out;
}

std::vector<ControlSetting> dimming_settings(double step) {
    std::vector<ControlSetting> out;
    const int steps = static_cast<int>(std::lround(1.0 / step));
    for (int k = 0; k <= steps; ++k) out.push_back({k * step, k == steps});
    return out;
}

std::vector<ControlSetting> plug_settings() { return {{0.0, false}, {1.0, true}}; }

Building make_reference_building(const ReferenceBuildingOptions& options) {
    Building b;
    b.id = "office";
    b.floor_area_m2 = options.floor_area_m2;
    for (int f = 1; f <= options.floors; ++f) {
        Floor floor;
        floor.id = "F" + std::to_string(f);
        for (const auto& name : options.zone_names) {
            Zone z;
            z.id = floor.id + "-" + name;
            z.floor_id = floor.id;
            z.appliances.push_back({z.id + "/hvac", z.id, ApplianceKind::HvacSetpoint, 0.0, hvac_offset_settings()});
            z.appliances.push_back(
                {z.id + "/light", z.id, ApplianceKind::DimmableLight, options.light_rated_W, dimming_settings()});
            z.appliances.push_back({z.id + "/pc", z.id, ApplianceKind::PlugLoad, options.pc_rated_W, plug_settings()});
            floor.zones.push_back(std::move(z));
        }
        b.floors.push_back(std::move(floor));
    }
    return b;
}

}  // namespace loadrank
