#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "loadrank/chiller.hpp"
#include "loadrank/domain.hpp"

namespace loadrank {

/// Score values are snapped to this grid before distributions are assembled so
/// that equal scores compare equal despite floating point noise.
inline constexpr double kScoreGrid = 1e-4;

double snap_score(double value);
/// Integer grid index of a score; two scores are equal iff their keys are.
std::int64_t score_key(double value);

struct ScoreAtom {
    double value = 0.0;
    double prob = 0.0;

    bool operator==(const ScoreAtom&) const = default;
};

/// Finite discrete distribution of a criterion score on [0, 1].
/// Support is snapped to the score grid, merged, sorted ascending; probabilities
/// sum to 1 within 1e-9.
class ScoreDistribution {
public:
    /// Deterministic score.
    static ScoreDistribution atom(double value);
    /// Validates, snaps and merges. Throws DomainError on invalid input.
    static ScoreDistribution from_atoms(std::vector<ScoreAtom> atoms);

    const std::vector<ScoreAtom>& support() const { return support_; }
    std::size_t size() const { return support_.size(); }
    double expected() const;

    bool operator==(const ScoreDistribution&) const = default;

private:
    explicit ScoreDistribution(std::vector<ScoreAtom> support) : support_(std::move(support)) {}
    std::vector<ScoreAtom> support_;
};

struct CurtailmentScaleParams {
    double alpha2 = 10.0;
    double p_max_W = 1.0;
    double p_min_W = 1.0;
};

struct CurtailmentScore {
    double value = 1.0;
    /// Set when p_reduction_W fell outside [p_min_W, p_max_W] and was clamped.
    bool clamped = false;
};

/// Thermal comfort: (a + 1/a + 2) / (a + 1/a + a^dT + a^-dT), dT = (T - Ts)/delta.
double comfort_hvac(double zone_temp_C, double desired_temp_C, double delta_C, double alpha1);

/// Perceived brightness: sqrt(P / Pr).
double comfort_light(double power_W, double rated_power_W);

/// 1 - P/Pr with P in {0, Pr}.
double comfort_plug(double power_W, double rated_power_W);

/// exp(-ln(alpha2) * ln(Pmax/P) / ln(Pmax/Pmin)); 1 at Pmax, 1/alpha2 at Pmin.
CurtailmentScore curtailment_score(double p_reduction_W, const CurtailmentScaleParams& params);

/// Largest and smallest positive reduction of the fleet; (1, 1) when none is positive.
CurtailmentScaleParams curtailment_scale(const std::vector<double>& reductions_W, double alpha2);

/// Uncurtailed state of one appliance, against which an alternative is measured.
struct ApplianceReference {
    /// Draw of a light or plug load without any curtailment command.
    double power_W = 0.0;
    /// Set-point offset (degC from the desired temperature) without a command.
    double setpoint_offset_C = 0.0;
};

/// Estimated building-load reduction of taking `alt` (>= 0).
///
/// Lights and plugs: reference draw minus the alternative's draw.
/// HVAC: -beta_z * (offset - reference offset) for upward moves; lowering a
/// set-point earns no curtailment credit.
double estimate_reduction(const ControlAlternative& alt, const Appliance& appliance, const ApplianceReference& ref,
                          const ChillerModel* chiller);

/// Comfort when the zone is occupied and `alt` is in effect (steady state).
double occupied_comfort(const ControlAlternative& alt, const Zone& zone, const Appliance& appliance);

struct ScoredAlternative {
    /// One distribution per criterion: [comfort, curtailment].
    std::vector<ScoreDistribution> scores;
    double reduction_W = 0.0;
    bool curtailment_clamped = false;
};

/// Comfort: mixture of atom 1 (unoccupied, weight 1 - occupied_prob) and the
/// occupied-case comfort (weight occupied_prob). Curtailment: single atom.
ScoredAlternative score_alternative(const ControlAlternative& alt, const Zone& zone, const Appliance& appliance,
                                    const ApplianceReference& ref, double occupied_prob, const ChillerModel* chiller,
                                    const CurtailmentScaleParams& scale);

}  // namespace loadrank
