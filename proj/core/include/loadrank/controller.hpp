#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loadrank/chiller.hpp"
#include "loadrank/domain.hpp"
#include "loadrank/emulator.hpp"
#include "loadrank/mcdm.hpp"
#include "loadrank/occupancy.hpp"
#include "loadrank/scoring.hpp"

namespace loadrank {

inline constexpr double kUnlimitedTarget = std::numeric_limits<double>::infinity();

struct CurtailmentEvent {
    std::string id = "event";
    SimTime start = SimTime::at(0, 8);
    SimTime end = SimTime::at(0, 16);
    /// kUnlimitedTarget dispatches every eligible alternative, one per knob.
    double target_reduction_W = kUnlimitedTarget;
    /// Alternatives below this fitness are never dispatched.
    double min_fitness = 0.0;
    std::optional<CriteriaConfig> criteria;

    bool unlimited() const { return target_reduction_W == kUnlimitedTarget; }
    /// start <= end, target >= 0, min_fitness in [0, 1], criteria valid.
    void validate() const;
};

struct ControllerModels {
    std::map<std::string, OccupancyModel> occupancy;
    std::optional<ChillerModel> chiller;

    /// Every zone needs an occupancy model; HVAC knobs need a chiller model
    /// covering their zone. Throws ConfigError.
    void check_covers(const Building& building) const;
};

struct ModelFitOptions {
    OccupancyFitOptions occupancy;
    ChillerFitOptions chiller;
};

/// Fits one occupancy chain per zone and the building chiller model. A chiller
/// is fitted only when the building has HVAC knobs.
ControllerModels fit_models(const Building& building, const std::vector<OccupancyTrace>& traces,
                            const std::vector<ChillerObservation>& observations, const ModelFitOptions& options = {});
/// Same, from a snapshot series at any cadence (occupancy resampled to 5 min).
ControllerModels fit_models(const Building& building, const std::vector<MeasurementRecord>& records,
                            const ModelFitOptions& options = {});

struct ControllerOptions {
    int decision_interval_minutes = 5;
    /// Forecast horizon for occupied_prob; 0 means the decision interval.
    int horizon_minutes = 0;

    int horizon() const { return horizon_minutes > 0 ? horizon_minutes : decision_interval_minutes; }
};

/// What the scorer needs to know about the building right now.
struct FleetInputs {
    std::map<std::string, double> occupied_prob;
    std::map<std::string, ApplianceReference> references;
    const ChillerModel* chiller = nullptr;
};

/// Occupancy forecasts and uncommanded appliance states read off a snapshot.
FleetInputs fleet_inputs(const Building& building, const MeasurementRecord& snapshot, const ControllerModels& models,
                         int horizon_minutes);

struct RankedAlternative {
    ControlAlternative alternative;
    /// 1-based position in the ranking.
    std::size_t rank = 0;
    double fitness = 0.0;
    double occupied_prob = 0.0;
    double reduction_W = 0.0;
    bool curtailment_clamped = false;
    std::vector<ScoreDistribution> scores;
    std::vector<CriterionRationale> rationale;
};

struct FleetRanking {
    CriteriaConfig criteria;
    CurtailmentScaleParams scale;
    std::map<std::string, double> occupied_prob;
    /// In rank order.
    std::vector<RankedAlternative> ranked;
};

/// Scores every (knob, setting) of the building and ranks them.
FleetRanking rank_fleet(const Building& building, const FleetInputs& inputs, const CriteriaConfig& criteria,
                        EnumerateOptions options = {});

enum class SelectionStatus { Selected, KnobClaimed, NotEligible, TargetMet };
std::string to_string(SelectionStatus status);

struct PlanEntry {
    std::size_t rank = 0;
    ControlAlternative alternative;
    double fitness = 0.0;
    double reduction_W = 0.0;
};

struct DispatchPlan {
    SimTime step_time;
    /// "ok" or "outside_window".
    std::string reason = "ok";
    std::vector<PlanEntry> selected;
    double estimated_total_W = 0.0;
    bool target_unmet = false;
    FleetRanking ranking;
    /// Parallel to ranking.ranked.
    std::vector<SelectionStatus> status;
    /// One per appliance: its selected setting, or a release.
    std::vector<ControlCommand> commands;
};

/// Ranks all alternatives at the snapshot time and greedily takes them in rank
/// order, one per knob, until the target is met. Eligible: reduction > 0 and
/// fitness >= event.min_fitness. Commands expire at the event end.
DispatchPlan decide(const CurtailmentEvent& event, const MeasurementRecord& snapshot, const Building& building,
                    const ControllerModels& models, const CriteriaConfig& criteria,
                    const ControllerOptions& options = {});

/// Comfort actually experienced in a zone: 1 when empty, otherwise the mean
/// of its appliances' comfort scores.
double zone_comfort(const Zone& zone, const ZoneRecord& zone_record, const MeasurementRecord& snapshot);

struct SeriesPoint {
    SimTime time;
    double total_power_W = 0.0;
    double baseline_power_W = 0.0;
    double estimated_reduction_W = 0.0;
    double occupied_fraction = 0.0;
    /// Building zone order.
    std::vector<double> zone_comfort;
    std::vector<bool> zone_occupied;

    double achieved_reduction_W() const { return baseline_power_W - total_power_W; }
};

struct EventReport {
    CurtailmentEvent event;
    std::vector<std::string> zone_ids;
    double noise_sigma_W = 0.0;
    std::vector<DispatchPlan> plans;
    std::vector<SeriesPoint> series;
    bool restored = true;
    std::optional<SimTime> restore_checked_at;
    /// Appliances whose state differs from the counterfactual at the check.
    std::vector<std::string> unrestored;
    /// "completed", "aborted" or "empty".
    std::string status = "empty";

    double mean_achieved_reduction_W() const;
    double mean_estimated_reduction_W() const;
};

/// Incremental closed-loop run alongside a live emulator; the caller steps the
/// emulator between before_step and after_step. Holds a copy of the emulator
/// taken at the event start as the uncurtailed counterfactual.
class EventRun {
public:
    EventRun(CurtailmentEvent event, const Emulator& live, ControllerModels models, CriteriaConfig criteria,
             ControllerOptions options = {});

    void before_step(Emulator& live);
    void after_step(const Emulator& live);
    bool finished() const { return finished_; }
    void abort();
    const EventReport& report() const { return report_; }
    const CurtailmentEvent& event() const { return report_.event; }

private:
    void record(const MeasurementRecord& live, const MeasurementRecord& baseline);

    Emulator baseline_;
    ControllerModels models_;
    CriteriaConfig criteria_;
    ControllerOptions options_;
    EventReport report_;
    SimTime next_decision_;
    SimTime restore_at_;
    double current_estimate_W_ = 0.0;
    bool finished_ = false;
};

/// Steps the emulator to the event start, runs the event and one decision
/// interval past its end. Zero-length events return an empty report.
EventReport run_event(Emulator& emulator, const CurtailmentEvent& event, const ControllerModels& models,
                      const CriteriaConfig& criteria, const ControllerOptions& options = {});

}  // namespace loadrank
