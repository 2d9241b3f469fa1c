#include "loadrank/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "loadrank/error.hpp"

namespace loadrank {

void OccupancyTrace::validate() const {
    if (interval_minutes <= 0) throw ValidationError("trace '" + zone_id + "': interval must be positive");
    const std::int64_t step = static_cast<std::int64_t>(interval_minutes) * kSecondsPerMinute;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto gap = samples[i].time - samples[i - 1].time;
        if (gap <= 0) {
            throw ValidationError("trace '" + zone_id + "': timestamps not strictly increasing at " +
                                  to_iso8601(samples[i].time));
        }
        if (gap != step) {
            throw ValidationError("trace '" + zone_id + "': non-uniform sampling at " + to_iso8601(samples[i].time) +
                                  " (gap " + std::to_string(gap) + " s, expected " + std::to_string(step) + " s)");
        }
    }
}

double OccupancyTrace::span_days() const {
    return static_cast<double>(samples.size()) * interval_minutes / static_cast<double>(kMinutesPerDay);
}

OccupancyTrace resample_events(const std::string& zone_id, std::vector<OccupancySample> events, int interval_minutes,
                               SimTime end) {
    if (interval_minutes <= 0) throw ValidationError("resample interval must be positive");
    OccupancyTrace out{zone_id, interval_minutes, {}};
    if (events.empty()) return out;
    std::stable_sort(events.begin(), events.end(),
                     [](const OccupancySample& a, const OccupancySample& b) { return a.time < b.time; });
    const std::int64_t step = static_cast<std::int64_t>(interval_minutes) * kSecondsPerMinute;
    const auto first = events.front().time.seconds;
    SimTime t{first - (((first % step) + step) % step)};
    std::size_t next = 0;
    bool value = events.front().occupied;
    for (; t <= end; t = t + step) {
        while (next < events.size() && events[next].time <= t) value = events[next++].occupied;
        out.samples.push_back({t, value});
    }
    return out;
}

TransitionMatrix TransitionMatrix::identity(std::size_t n) {
    TransitionMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double TransitionMatrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j);
    return s;
}

std::size_t OccupancyModel::bucket_of(int duration_minutes) const {
    return static_cast<std::size_t>(
        std::upper_bound(duration_buckets.begin(), duration_buckets.end(), duration_minutes) -
        duration_buckets.begin());
}

std::size_t OccupancyModel::state_index(const OccupancyState& s) const {
    return (s.occupied ? bucket_count() : 0) + bucket_of(s.duration_minutes);
}

std::size_t OccupancyModel::window_of(SimTime t) const {
    return static_cast<std::size_t>(t.minute_of_day() / window_minutes);
}

void OccupancyModel::validate() const {
    if (window_minutes <= 0 || kMinutesPerDay % window_minutes != 0) {
        throw ValidationError("occupancy model '" + zone_id + "': window_minutes must divide 1440");
    }
    if (sample_minutes <= 0 || window_minutes % sample_minutes != 0) {
        throw ValidationError("occupancy model '" + zone_id + "': sample_minutes must divide window_minutes");
    }
    if (!std::is_sorted(duration_buckets.begin(), duration_buckets.end()) ||
        std::adjacent_find(duration_buckets.begin(), duration_buckets.end()) != duration_buckets.end()) {
        throw ValidationError("occupancy model '" + zone_id + "': duration buckets must be strictly increasing");
    }
    if (windows.size() != window_count()) {
        throw ValidationError("occupancy model '" + zone_id + "': expected " + std::to_string(window_count()) +
                              " windows, got " + std::to_string(windows.size()));
    }
    for (std::size_t w = 0; w < windows.size(); ++w) {
        if (windows[w].size() != state_count()) {
            throw ValidationError("occupancy model '" + zone_id + "': window " + std::to_string(w) +
                                  " has wrong dimension");
        }
        for (std::size_t i = 0; i < state_count(); ++i) {
            for (std::size_t j = 0; j < state_count(); ++j) {
                const double v = windows[w](i, j);
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw ValidationError("occupancy model '" + zone_id + "': entry outside [0,1] in window " +
                                          std::to_string(w));
                }
            }
            if (std::abs(windows[w].row_sum(i) - 1.0) > 1e-9) {
                throw ValidationError("occupancy model '" + zone_id + "': window " + std::to_string(w) + " row " +
                                      std::to_string(i) + " is not stochastic");
            }
        }
    }
}

namespace {

OccupancyModel empty_model(const OccupancyTrace& trace, const OccupancyFitOptions& options) {
    OccupancyModel m;
    m.zone_id = trace.zone_id;
    m.window_minutes = options.window_minutes;
    m.sample_minutes = trace.interval_minutes;
    m.duration_buckets = options.duration_buckets;
    return m;
}

}  // namespace

std::vector<std::vector<std::vector<double>>> transition_counts(const OccupancyTrace& trace,
                                                                const OccupancyFitOptions& options) {
    trace.validate();
    auto m = empty_model(trace, options);
    if (m.window_minutes <= 0 || kMinutesPerDay % m.window_minutes != 0) {
        throw ValidationError("window_minutes must divide 1440");
    }
    const auto n = m.state_count();
    std::vector<std::vector<std::vector<double>>> counts(m.window_count(),
                                                         std::vector<std::vector<double>>(n, std::vector<double>(n)));
    if (trace.samples.empty()) return counts;
    OccupancyState state{trace.samples.front().occupied, trace.interval_minutes};
    for (std::size_t k = 0; k + 1 < trace.samples.size(); ++k) {
        const auto& next = trace.samples[k + 1];
        OccupancyState to = next.occupied == state.occupied
                                ? OccupancyState{state.occupied, state.duration_minutes + trace.interval_minutes}
                                : OccupancyState{next.occupied, trace.interval_minutes};
        counts[m.window_of(trace.samples[k].time)][m.state_index(state)][m.state_index(to)] += 1.0;
        state = to;
    }
    return counts;
}

OccupancyModel fit_occupancy(const OccupancyTrace& trace, const OccupancyFitOptions& options) {
    trace.validate();
    if (trace.span_days() < options.min_days) {
        throw ValidationError("occupancy trace '" + trace.zone_id + "' spans " + std::to_string(trace.span_days()) +
                              " days; at least " + std::to_string(options.min_days) + " required");
    }
    if (options.laplace < 0.0) throw ValidationError("laplace smoothing must be non-negative");
    auto model = empty_model(trace, options);
    const auto counts = transition_counts(trace, options);
    const auto n = model.state_count();
    model.windows.reserve(counts.size());
    for (const auto& window : counts) {
        TransitionMatrix mat(n);
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (double c : window[i]) total += c;
            if (total == 0.0) {
                mat(i, i) = 1.0;
                continue;
            }
            const double denom = total + options.laplace * static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) mat(i, j) = (window[i][j] + options.laplace) / denom;
        }
        model.windows.push_back(std::move(mat));
    }
    model.validate();
    return model;
}

OccupancyForecast forecast(const OccupancyModel& model, const OccupancyState& current, SimTime now,
                           int horizon_minutes) {
    if (horizon_minutes < 0) throw ValidationError("forecast horizon must be non-negative");
    const auto n = model.state_count();
    std::vector<double> dist(n, 0.0);
    dist[model.state_index(current)] = 1.0;
    auto occupied_mass = [&](const std::vector<double>& d) {
        double p = 0.0;
        for (std::size_t i = model.bucket_count(); i < n; ++i) p += d[i];
        return std::clamp(p, 0.0, 1.0);
    };
    OccupancyForecast out{model.zone_id, {{now, occupied_mass(dist)}}};
    const int steps = (horizon_minutes + model.sample_minutes - 1) / model.sample_minutes;
    const std::int64_t step = static_cast<std::int64_t>(model.sample_minutes) * kSecondsPerMinute;
    SimTime t = now;
    std::vector<double> next(n);
    for (int k = 0; k < steps; ++k) {
        const auto& mat = model.windows[model.window_of(t)];
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) next[j] += dist[i] * mat(i, j);
        }
        dist.swap(next);
        t = t + step;
        out.horizon.push_back({t, occupied_mass(dist)});
    }
    return out;
}

OccupancySampler::OccupancySampler(const OccupancyModel& model, OccupancyState initial)
    : model_(&model), state_(initial) {
    if (state_.duration_minutes <= 0) state_.duration_minutes = model.sample_minutes;
}

const OccupancyState& OccupancySampler::advance(SimTime now, std::mt19937_64& rng) {
    const auto& mat = model_->windows[model_->window_of(now)];
    const auto row = model_->state_index(state_);
    double p_occupied = 0.0;
    for (std::size_t j = model_->bucket_count(); j < model_->state_count(); ++j) p_occupied += mat(row, j);
    const bool occupied = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_occupied;
    if (occupied == state_.occupied) {
        state_.duration_minutes += model_->sample_minutes;
    } else {
        state_ = {occupied, model_->sample_minutes};
    }
    return state_;
}

OccupancyTrace simulate(const OccupancyModel& model, std::uint64_t seed, int days, const SimulateOptions& options) {
    if (days < 0) throw ValidationError("simulate: days must be non-negative");
    model.validate();
    std::mt19937_64 rng(seed);
    OccupancyTrace trace{model.zone_id, model.sample_minutes, {}};
    const std::int64_t step = static_cast<std::int64_t>(model.sample_minutes) * kSecondsPerMinute;
    const auto count = static_cast<std::size_t>(days) * static_cast<std::size_t>(kMinutesPerDay / model.sample_minutes);
    if (count == 0) return trace;
    trace.samples.reserve(count);
    OccupancySampler sampler(model, {options.start_occupied, model.sample_minutes});
    SimTime t = options.start;
    trace.samples.push_back({t, sampler.state().occupied});
    while (trace.samples.size() < count) {
        sampler.advance(t, rng);
        t = t + step;
        trace.samples.push_back({t, sampler.state().occupied});
    }
    return trace;
}

void OfficeProfile::validate() const {
    auto prob = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
    };
    prob(attendance_prob, "attendance_prob");
    prob(lunch_prob, "lunch_prob");
    if (!(arrival_mean_h < departure_mean_h)) throw ValidationError("arrival mean must precede departure mean");
    if (arrival_mean_h < 0 || departure_mean_h > 24) throw ValidationError("arrival/departure must be within the day");
    if (arrival_std_h < 0 || departure_std_h < 0 || lunch_std_h < 0) {
        throw ValidationError("standard deviations must be non-negative");
    }
    if (meeting_rate_per_h < 0 || meeting_mean_minutes < 0 || lunch_minutes < 0) {
        throw ValidationError("meeting and lunch parameters must be non-negative");
    }
    if (interval_minutes <= 0 || kMinutesPerDay % interval_minutes != 0) {
        throw ValidationError("interval_minutes must divide 1440");
    }
}

OccupancyTrace generate_office_trace(const std::string& zone_id, const OfficeProfile& profile, std::uint64_t seed,
                                     int days) {
    profile.validate();
    if (days < 0) throw ValidationError("days must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    OccupancyTrace trace{zone_id, profile.interval_minutes, {}};
    const int per_day = kMinutesPerDay / profile.interval_minutes;
    trace.samples.reserve(static_cast<std::size_t>(days) * static_cast<std::size_t>(per_day));
    struct Span {
        double from_h, to_h;
    };
    for (int d = 0; d < days; ++d) {
        const bool day_off =
            std::find(profile.days_off.begin(), profile.days_off.end(), d % 7) != profile.days_off.end();
        // Always draw the same numbers per day so days stay aligned across profiles.
        const double u_attend = unit(rng);
        const double arrival = std::clamp(profile.arrival_mean_h + profile.arrival_std_h * normal(rng), 0.0, 23.5);
        const double departure =
            std::clamp(profile.departure_mean_h + profile.departure_std_h * normal(rng), arrival + 0.5, 24.0);
        const double u_lunch = unit(rng);
        const double lunch_start = profile.lunch_mean_h + profile.lunch_std_h * normal(rng);
        std::vector<Span> away;
        if (u_lunch < profile.lunch_prob) away.push_back({lunch_start, lunch_start + profile.lunch_minutes / 60.0});
        if (profile.meeting_rate_per_h > 0) {
            std::exponential_distribution<double> gap(profile.meeting_rate_per_h);
            for (double t = arrival + gap(rng); t < departure; t += gap(rng)) {
                const double len = profile.meeting_mean_minutes / 60.0 * (0.5 + unit(rng));
                away.push_back({t, t + len});
                t += len;
            }
        }
        const bool present_today = !day_off && u_attend < profile.attendance_prob;
        for (int k = 0; k < per_day; ++k) {
            const double h = k * profile.interval_minutes / 60.0;
            bool occ = present_today && h >= arrival && h < departure;
            if (occ) {
                for (const auto& s : away) {
                    if (h >= s.from_h && h < s.to_h) {
                        occ = false;
                        break;
                    }
                }
            }
            trace.samples.push_back({SimTime::at(d, 0) + static_cast<std::int64_t>(k) * profile.interval_minutes * 60, occ});
        }
    }
    return trace;
}

std::vector<double> daily_occupancy_profile(const OccupancyTrace& trace, int window_minutes) {
    if (window_minutes <= 0 || kMinutesPerDay % window_minutes != 0) {
        throw ValidationError("window_minutes must divide 1440");
    }
    const auto windows = static_cast<std::size_t>(kMinutesPerDay / window_minutes);
    std::vector<double> occupied(windows, 0.0), total(windows, 0.0);
    for (const auto& s : trace.samples) {
        const auto w = static_cast<std::size_t>(s.time.minute_of_day() / window_minutes);
        total[w] += 1.0;
        if (s.occupied) occupied[w] += 1.0;
    }
    for (std::size_t w = 0; w < windows; ++w) occupied[w] = total[w] > 0 ? occupied[w] / total[w] : 0.0;
    return occupied;
}

std::map<std::string, OccupancyTrace> read_occupancy_csv(std::istream& in, int interval_minutes) {
    csv::Reader reader(in);
    const auto ts = reader.column("timestamp_iso8601");
    const auto zone = reader.column("zone_id");
    const auto occ = reader.column("occupied");
    std::map<std::string, std::vector<OccupancySample>> events;
    while (auto row = reader.next()) {
        const auto& v = row->at(occ);
        if (v != "0" && v != "1") throw ValidationError("occupied must be 0 or 1, got '" + v + "'");
        events[row->at(zone)].push_back({parse_iso8601(row->at(ts)), v == "1"});
    }
    std::map<std::string, OccupancyTrace> out;
    for (auto& [zone_id, samples] : events) {
        OccupancyTrace trace{zone_id, interval_minutes, samples};
        try {
            trace.validate();
        } catch (const ValidationError&) {
            // Event-triggered stream: hold each value until the next event.
            SimTime end = samples.front().time;
            for (const auto& s : samples) end = std::max(end, s.time);
            trace = resample_events(zone_id, samples, interval_minutes, end);
        }
        out.emplace(zone_id, std::move(trace));
    }
    return out;
}

void write_occupancy_csv(std::ostream& out, const std::vector<OccupancyTrace>& traces) {
    out << "timestamp_iso8601,zone_id,occupied\n";
    for (const auto& trace : traces) {
        for (const auto& s : trace.samples) {
            out << to_iso8601(s.time) << ',' << trace.zone_id << ',' << (s.occupied ? 1 : 0) << '\n';
        }
    }
}

}  // namespace loadrank
