#include "loadrank/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "loadrank/error.hpp"

namespace loadrank {
namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

double snap_score(double value) { return static_cast<double>(score_key(value)) * kScoreGrid; }

std::int64_t score_key(double value) { return std::llround(value / kScoreGrid); }

ScoreDistribution ScoreDistribution::atom(double value) { return from_atoms({{value, 1.0}}); }

ScoreDistribution ScoreDistribution::from_atoms(std::vector<ScoreAtom> atoms) {
    if (atoms.empty()) throw DomainError("score distribution needs at least one atom");
    std::map<std::int64_t, double> merged;
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.value) || a.value < -kScoreGrid / 2 || a.value > 1.0 + kScoreGrid / 2) {
            throw DomainError("score value " + std::to_string(a.value) + " outside [0, 1]");
        }
        if (!std::isfinite(a.prob) || a.prob < 0.0 || a.prob > 1.0 + 1e-12) {
            throw DomainError("atom probability " + std::to_string(a.prob) + " outside [0, 1]");
        }
        total += a.prob;
        if (a.prob == 0.0) continue;
        merged[score_key(a.value)] += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw DomainError("score probabilities sum to " + std::to_string(total) + ", expected 1");
    }
    std::vector<ScoreAtom> support;
    support.reserve(merged.size());
    for (const auto& [key, prob] : merged) support.push_back({static_cast<double>(key) * kScoreGrid, prob});
    return ScoreDistribution(std::move(support));
}

double ScoreDistribution::expected() const {
    double e = 0.0;
    for (const auto& a : support_) e += a.value * a.prob;
    return e;
}

double comfort_hvac(double zone_temp_C, double desired_temp_C, double delta_C, double alpha1) {
    require_finite(zone_temp_C, "zone temperature");
    require_finite(desired_temp_C, "desired temperature");
    require_finite(delta_C, "comfort delta");
    require_finite(alpha1, "comfort alpha");
    if (!(alpha1 > 1.0)) throw DomainError("comfort alpha must be > 1");
    if (!(delta_C > 0.0)) throw DomainError("comfort delta must be > 0");
    const double dt = (zone_temp_C - desired_temp_C) / delta_C;
    const double base = alpha1 + 1.0 / alpha1;
    const double denom = base + std::pow(alpha1, dt) + std::pow(alpha1, -dt);
    return (base + 2.0) / denom;
}

double comfort_light(double power_W, double rated_power_W) {
    require_finite(power_W, "light power");
    if (!(rated_power_W > 0.0)) throw DomainError("rated light power must be positive");
    if (power_W < 0.0 || power_W > rated_power_W) {
        throw DomainError("light power " + std::to_string(power_W) + " W outside [0, " +
                          std::to_string(rated_power_W) + "]");
    }
    return std::sqrt(power_W / rated_power_W);
}

double comfort_plug(double power_W, double rated_power_W) {
    require_finite(power_W, "plug power");
    if (!(rated_power_W > 0.0)) throw DomainError("rated plug power must be positive");
    if (power_W != 0.0 && power_W != rated_power_W) {
        throw DomainError("plug power must be 0 or rated (" + std::to_string(rated_power_W) + " W), got " +
                          std::to_string(power_W));
    }
    return 1.0 - power_W / rated_power_W;
}

CurtailmentScore curtailment_score(double p_reduction_W, const CurtailmentScaleParams& params) {
    require_finite(p_reduction_W, "power reduction");
    if (!(params.alpha2 > 1.0)) throw DomainError("curtailment alpha must be > 1");
    if (!(params.p_min_W > 0.0) || params.p_max_W < params.p_min_W) {
        throw DomainError("curtailment scale requires p_max >= p_min > 0");
    }
    CurtailmentScore out;
    double p = p_reduction_W;
    if (p < params.p_min_W) {
        p = params.p_min_W;
        out.clamped = true;
    } else if (p > params.p_max_W) {
        p = params.p_max_W;
        out.clamped = true;
    }
    if (params.p_max_W == params.p_min_W) {
        out.value = 1.0;
        return out;
    }
    out.value = std::exp(-std::log(params.alpha2) * std::log(params.p_max_W / p) /
                         std::log(params.p_max_W / params.p_min_W));
    return out;
}

CurtailmentScaleParams curtailment_scale(const std::vector<double>& reductions_W, double alpha2) {
    CurtailmentScaleParams out{alpha2, 0.0, 0.0};
    bool any = false;
    for (double r : reductions_W) {
        if (!(r > 0.0)) continue;
        if (!any) {
            out.p_max_W = out.p_min_W = r;
            any = true;
        } else {
            out.p_max_W = std::max(out.p_max_W, r);
            out.p_min_W = std::min(out.p_min_W, r);
        }
    }
    if (!any) out.p_max_W = out.p_min_W = 1.0;
    return out;
}

double estimate_reduction(const ControlAlternative& alt, const Appliance& appliance, const ApplianceReference& ref,
                          const ChillerModel* chiller) {
    switch (alt.kind) {
        case ApplianceKind::HvacSetpoint: {
            const double delta = alt.setting_value - ref.setpoint_offset_C;
            if (delta <= 0.0) return 0.0;
            if (chiller == nullptr) throw ConfigError("HVAC alternative '" + alt.label() + "' needs a chiller model");
            return std::max(0.0, -setpoint_power_delta(*chiller, alt.zone_id, delta));
        }
        case ApplianceKind::DimmableLight:
        case ApplianceKind::PlugLoad:
            return std::max(0.0, ref.power_W - appliance.power_at(alt.setting_index));
    }
    return 0.0;
}

double occupied_comfort(const ControlAlternative& alt, const Zone& zone, const Appliance& appliance) {
    switch (alt.kind) {
        case ApplianceKind::HvacSetpoint:
            // Steady state: the zone settles at the new set-point.
            return comfort_hvac(zone.desired_temp_C + alt.setting_value, zone.desired_temp_C, zone.comfort_delta_C,
                                zone.comfort_alpha);
        case ApplianceKind::DimmableLight:
            return comfort_light(appliance.power_at(alt.setting_index), appliance.rated_power_W);
        case ApplianceKind::PlugLoad:
            // An occupant present loses the device when it is switched off.
            return 1.0 - comfort_plug(appliance.power_at(alt.setting_index), appliance.rated_power_W);
    }
    return 1.0;
}

ScoredAlternative score_alternative(const ControlAlternative& alt, const Zone& zone, const Appliance& appliance,
                                    const ApplianceReference& ref, double occupied_prob, const ChillerModel* chiller,
                                    const CurtailmentScaleParams& scale) {
    if (!(occupied_prob >= 0.0 && occupied_prob <= 1.0)) {
        throw DomainError("occupied probability " + std::to_string(occupied_prob) + " outside [0, 1]");
    }
    ScoredAlternative out;
    const double occupied = occupied_comfort(alt, zone, appliance);
    out.scores.push_back(ScoreDistribution::from_atoms({{1.0, 1.0 - occupied_prob}, {occupied, occupied_prob}}));
    out.reduction_W = estimate_reduction(alt, appliance, ref, chiller);
    const auto c = curtailment_score(out.reduction_W, scale);
    out.curtailment_clamped = c.clamped;
    out.scores.push_back(ScoreDistribution::atom(c.value));
    return out;
}

}  // namespace loadrank
