#include "loadrank/controller.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "loadrank/error.hpp"

namespace loadrank {

void CurtailmentEvent::validate() const {
    if (id.empty()) throw ValidationError("event id must not be empty");
    if (end < start) throw ValidationError("event end precedes its start");
    if (!(target_reduction_W >= 0.0)) throw ValidationError("target reduction must be non-negative");
    if (!(min_fitness >= 0.0 && min_fitness <= 1.0)) throw ValidationError("min_fitness must lie in [0, 1]");
    if (criteria) validate_criteria(*criteria);
}

void ControllerModels::check_covers(const Building& building) const {
    for (const Zone* z : building.zones()) {
        if (!occupancy.contains(z->id)) throw ConfigError("no occupancy model for zone '" + z->id + "'");
        for (const auto& a : z->appliances) {
            if (a.kind != ApplianceKind::HvacSetpoint) continue;
            if (!chiller) throw ConfigError("building has HVAC knobs but no chiller model is loaded");
            const auto& ids = chiller->zone_ids;
            if (std::find(ids.begin(), ids.end(), z->id) == ids.end()) {
                throw ConfigError("chiller model does not cover zone '" + z->id + "'");
            }
        }
    }
}

ControllerModels fit_models(const Building& building, const std::vector<OccupancyTrace>& traces,
                            const std::vector<ChillerObservation>& observations, const ModelFitOptions& options) {
    validate_building(building);
    ControllerModels m;
    bool has_hvac = false;
    for (const Zone* z : building.zones()) {
        auto it = std::find_if(traces.begin(), traces.end(), [&](const OccupancyTrace& t) { return t.zone_id == z->id; });
        if (it == traces.end()) throw ValidationError("no occupancy data for zone '" + z->id + "'");
        m.occupancy.emplace(z->id, fit_occupancy(*it, options.occupancy));
        for (const auto& a : z->appliances) has_hvac = has_hvac || a.kind == ApplianceKind::HvacSetpoint;
    }
    if (has_hvac) m.chiller = fit_chiller(building.zone_ids(), observations, options.chiller);
    return m;
}

ControllerModels fit_models(const Building& building, const std::vector<MeasurementRecord>& records,
                            const ModelFitOptions& options) {
    return fit_models(building, occupancy_traces(records, 5), chiller_observations(records), options);
}

FleetInputs fleet_inputs(const Building& building, const MeasurementRecord& snapshot, const ControllerModels& models,
                         int horizon_minutes) {
    models.check_covers(building);
    FleetInputs in;
    in.chiller = models.chiller ? &*models.chiller : nullptr;
    for (const Zone* z : building.zones()) {
        const ZoneRecord* zr = snapshot.zone(z->id);
        if (!zr) throw ValidationError("snapshot lacks zone '" + z->id + "'");
        const auto fc = forecast(models.occupancy.at(z->id), {zr->occupied, zr->occupancy_duration_min},
                                 snapshot.time, horizon_minutes);
        in.occupied_prob[z->id] = std::clamp(fc.final_prob(), 0.0, 1.0);
        for (const auto& a : z->appliances) {
            ApplianceReference ref;
            if (a.kind == ApplianceKind::HvacSetpoint) {
                ref.setpoint_offset_C = a.baseline().value;
            } else {
                const ApplianceRecord* ar = snapshot.appliance(a.id);
                if (!ar) throw ValidationError("snapshot lacks appliance '" + a.id + "'");
                // A commanded appliance is measured against what it would draw if released.
                ref.power_W = ar->commanded ? a.power_at(a.baseline_index()) : ar->power_W;
            }
            in.references[a.id] = ref;
        }
    }
    return in;
}

FleetRanking rank_fleet(const Building& building, const FleetInputs& inputs, const CriteriaConfig& criteria,
                        EnumerateOptions options) {
    validate_criteria(criteria);
    if (criteria.weights.size() != 2) {
        throw ValidationError("building ranking uses exactly two criteria (comfort, curtailment)");
    }
    FleetRanking out;
    out.criteria = criteria;
    out.occupied_prob = inputs.occupied_prob;
    const auto alts = enumerate_alternatives(building, options);

    struct Ctx {
        const Zone* zone;
        const Appliance* appliance;
        ApplianceReference ref;
        double p;
    };
    std::vector<Ctx> ctx;
    std::vector<double> reductions;
    ctx.reserve(alts.size());
    for (const auto& alt : alts) {
        const Zone* zone = building.find_zone(alt.zone_id);
        const Appliance* app = building.find_appliance(alt.appliance_id);
        auto ref_it = inputs.references.find(alt.appliance_id);
        if (ref_it == inputs.references.end()) {
            throw ValidationError("no reference state for appliance '" + alt.appliance_id + "'");
        }
        auto p_it = inputs.occupied_prob.find(alt.zone_id);
        if (p_it == inputs.occupied_prob.end()) {
            throw ValidationError("no occupancy probability for zone '" + alt.zone_id + "'");
        }
        ctx.push_back({zone, app, ref_it->second, p_it->second});
        reductions.push_back(estimate_reduction(alt, *app, ref_it->second, inputs.chiller));
    }
    out.scale = curtailment_scale(reductions, 10.0);

    std::vector<CriterionScores> scores;
    std::vector<ScoredAlternative> scored;
    scores.reserve(alts.size());
    for (std::size_t i = 0; i < alts.size(); ++i) {
        auto scale = out.scale;
        scale.alpha2 = ctx[i].zone->curtailment_alpha;
        scored.push_back(score_alternative(alts[i], *ctx[i].zone, *ctx[i].appliance, ctx[i].ref, ctx[i].p,
                                           inputs.chiller, scale));
        scores.push_back(scored.back().scores);
    }

    std::vector<std::size_t> order;
    std::vector<double> fitness(alts.size(), 1.0);
    std::vector<std::vector<CriterionRationale>> rationale(alts.size());
    if (alts.size() >= 2) {
        auto r = rank(scores, criteria);
        order = std::move(r.order);
        fitness = std::move(r.fitness);
        for (std::size_t i = 0; i < alts.size(); ++i) rationale[i] = std::move(r.rationale[i].criteria);
    } else if (alts.size() == 1) {
        order = {0};
        for (const auto& d : scores[0]) rationale[0].push_back({d.expected(), 1.0});
    }

    out.ranked.reserve(alts.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        RankedAlternative ra;
        ra.alternative = alts[i];
        ra.rank = pos + 1;
        ra.fitness = fitness[i];
        ra.occupied_prob = ctx[i].p;
        ra.reduction_W = scored[i].reduction_W;
        ra.curtailment_clamped = scored[i].curtailment_clamped;
        ra.scores = scored[i].scores;
        ra.rationale = std::move(rationale[i]);
        out.ranked.push_back(std::move(ra));
    }
    return out;
}

std::string to_string(SelectionStatus status) {
    switch (status) {
        case SelectionStatus::Selected: return "selected";
        case SelectionStatus::KnobClaimed: return "knob_claimed";
        case SelectionStatus::NotEligible: return "not_eligible";
        case SelectionStatus::TargetMet: return "target_met";
    }
    return "unknown";
}

DispatchPlan decide(const CurtailmentEvent& event, const MeasurementRecord& snapshot, const Building& building,
                    const ControllerModels& models, const CriteriaConfig& criteria, const ControllerOptions& options) {
    event.validate();
    if (options.decision_interval_minutes < 1) throw ValidationError("decision interval must be at least 1 minute");
    DispatchPlan plan;
    plan.step_time = snapshot.time;
    if (snapshot.time < event.start || !(snapshot.time < event.end)) {
        plan.reason = "outside_window";
        return plan;
    }
    const CriteriaConfig& used = event.criteria ? *event.criteria : criteria;
    plan.ranking = rank_fleet(building, fleet_inputs(building, snapshot, models, options.horizon()), used);

    std::set<std::string> claimed;
    std::map<std::string, std::size_t> chosen;
    plan.status.reserve(plan.ranking.ranked.size());
    for (const auto& ra : plan.ranking.ranked) {
        const bool eligible = ra.reduction_W > 0.0 && ra.fitness >= event.min_fitness;
        if (!eligible) {
            plan.status.push_back(SelectionStatus::NotEligible);
        } else if (!(plan.estimated_total_W < event.target_reduction_W)) {
            plan.status.push_back(SelectionStatus::TargetMet);
        } else if (claimed.contains(ra.alternative.appliance_id)) {
            plan.status.push_back(SelectionStatus::KnobClaimed);
        } else {
            claimed.insert(ra.alternative.appliance_id);
            chosen[ra.alternative.appliance_id] = ra.alternative.setting_index;
            plan.selected.push_back({ra.rank, ra.alternative, ra.fitness, ra.reduction_W});
            plan.estimated_total_W += ra.reduction_W;
            plan.status.push_back(SelectionStatus::Selected);
        }
    }
    plan.target_unmet = !event.unlimited() && plan.estimated_total_W < event.target_reduction_W;

    for (const Zone* z : building.zones()) {
        for (const auto& a : z->appliances) {
            auto it = chosen.find(a.id);
            if (it != chosen.end()) {
                plan.commands.push_back({a.id, it->second, event.end});
            } else {
                plan.commands.push_back({a.id, std::nullopt, std::nullopt});
            }
        }
    }
    return plan;
}

double zone_comfort(const Zone& zone, const ZoneRecord& zr, const MeasurementRecord& snapshot) {
    if (!zr.occupied) return 1.0;
    double sum = 0.0;
    int n = 0;
    for (const auto& a : zone.appliances) {
        if (a.kind == ApplianceKind::HvacSetpoint) {
            sum += comfort_hvac(zr.temp_C, zone.desired_temp_C, zone.comfort_delta_C, zone.comfort_alpha);
        } else {
            const ApplianceRecord* ar = snapshot.appliance(a.id);
            if (!ar) throw ValidationError("snapshot lacks appliance '" + a.id + "'");
            const double p = std::clamp(ar->power_W, 0.0, a.rated_power_W);
            // Plug loads: an occupant has the device (1) or not (0).
            sum += a.kind == ApplianceKind::DimmableLight ? comfort_light(p, a.rated_power_W) : (p > 0.0 ? 1.0 : 0.0);
        }
        ++n;
    }
    return n == 0 ? 1.0 : sum / n;
}

double EventReport::mean_achieved_reduction_W() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
        if (s.time > event.start && s.time <= event.end) {
            sum += s.achieved_reduction_W();
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double EventReport::mean_estimated_reduction_W() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
        if (s.time > event.start && s.time <= event.end) {
            sum += s.estimated_reduction_W;
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

EventRun::EventRun(CurtailmentEvent event, const Emulator& live, ControllerModels models, CriteriaConfig criteria,
                   ControllerOptions options)
    : baseline_(live), models_(std::move(models)), criteria_(std::move(criteria)), options_(options) {
    event.validate();
    validate_criteria(criteria_);
    if (options_.decision_interval_minutes < 1) throw ValidationError("decision interval must be at least 1 minute");
    models_.check_covers(live.building());
    if (live.state().sim_clock != event.start) {
        throw ValidationError("event run must start with the emulator at " + to_iso8601(event.start));
    }
    report_.event = std::move(event);
    report_.zone_ids = live.building().zone_ids();
    report_.noise_sigma_W = live.scenario().chiller_noise_fraction *
                            std::max(0.0, predict_power(live.plant(), live.scenario().design_outdoor_temp_C, [&] {
                                         std::vector<double> sp;
                                         for (const Zone* z : live.building().zones()) sp.push_back(z->desired_temp_C);
                                         return sp;
                                     }()));
    next_decision_ = report_.event.start;
    restore_at_ = report_.event.end + options_.decision_interval_minutes * kSecondsPerMinute;
    if (report_.event.start == report_.event.end) {
        finished_ = true;
        return;
    }
    report_.status = "running";
    const auto snap = live.snapshot();
    record(snap, snap);
}

void EventRun::before_step(Emulator& live) {
    if (finished_) return;
    const SimTime t = live.state().sim_clock;
    if (t >= report_.event.end) {
        current_estimate_W_ = 0.0;
        return;
    }
    if (t < next_decision_) return;
    auto plan = decide(report_.event, live.snapshot(), live.building(), models_, criteria_, options_);
    live.enqueue(plan.commands);
    current_estimate_W_ = plan.estimated_total_W;
    report_.plans.push_back(std::move(plan));
    while (next_decision_ <= t) next_decision_ = next_decision_ + options_.decision_interval_minutes * kSecondsPerMinute;
}

void EventRun::after_step(const Emulator& live) {
    if (finished_) return;
    const SimTime t = live.state().sim_clock;
    const auto dt = t - baseline_.state().sim_clock;
    if (dt > 0) baseline_.step({}, static_cast<double>(dt));
    if (t >= report_.event.end) current_estimate_W_ = 0.0;
    const auto live_snap = live.snapshot();
    const auto base_snap = baseline_.snapshot();
    record(live_snap, base_snap);
    if (t < restore_at_) return;

    report_.restore_checked_at = t;
    report_.unrestored.clear();
    for (const auto& a : live_snap.appliances) {
        const ApplianceRecord* b = base_snap.appliance(a.appliance_id);
        if (a.commanded || !b || a.power_W != b->power_W) report_.unrestored.push_back(a.appliance_id);
    }
    for (const auto& z : live_snap.zones) {
        const ZoneRecord* b = base_snap.zone(z.zone_id);
        if (z.hvac_commanded || !b || z.setpoint_C != b->setpoint_C) report_.unrestored.push_back(z.zone_id + "/hvac");
    }
    report_.restored = report_.unrestored.empty();
    report_.status = "completed";
    finished_ = true;
}

void EventRun::abort() {
    if (finished_) return;
    report_.status = "aborted";
    finished_ = true;
}

void EventRun::record(const MeasurementRecord& live, const MeasurementRecord& baseline) {
    SeriesPoint p;
    p.time = live.time;
    p.total_power_W = live.total_power_W;
    p.baseline_power_W = baseline.total_power_W;
    p.estimated_reduction_W = current_estimate_W_;
    std::size_t occupied = 0;
    for (const Zone* z : baseline_.building().zones()) {
        const ZoneRecord* zr = live.zone(z->id);
        p.zone_occupied.push_back(zr->occupied);
        p.zone_comfort.push_back(zone_comfort(*z, *zr, live));
        if (zr->occupied) ++occupied;
    }
    p.occupied_fraction = live.zones.empty() ? 0.0 : static_cast<double>(occupied) / static_cast<double>(live.zones.size());
    report_.series.push_back(std::move(p));
}

EventReport run_event(Emulator& emulator, const CurtailmentEvent& event, const ControllerModels& models,
                      const CriteriaConfig& criteria, const ControllerOptions& options) {
    event.validate();
    if (emulator.state().sim_clock > event.start) {
        throw ValidationError("emulator clock " + to_iso8601(emulator.state().sim_clock) + " is past the event start");
    }
    const double dt = emulator.scenario().dt_seconds;
    while (emulator.state().sim_clock < event.start) {
        const auto remaining = static_cast<double>(event.start - emulator.state().sim_clock);
        emulator.step({}, std::max(10.0, std::min(dt, remaining)));
    }
    if (event.start == event.end) {
        EventReport empty;
        empty.event = event;
        empty.zone_ids = emulator.building().zone_ids();
        return empty;
    }
    EventRun run(event, emulator, models, criteria, options);
    while (!run.finished()) {
        run.before_step(emulator);
        emulator.step();
        run.after_step(emulator);
    }
    return run.report();
}

}  // namespace loadrank
