#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "loadrank/time.hpp"

namespace loadrank {

struct OccupancySample {
    SimTime time;
    bool occupied = false;

    bool operator==(const OccupancySample&) const = default;
};

/// Binary occupancy of one zone on a uniform time grid.
struct OccupancyTrace {
    std::string zone_id;
    int interval_minutes = 5;
    std::vector<OccupancySample> samples;

    /// Strictly increasing timestamps spaced exactly interval_minutes apart.
    void validate() const;
    double span_days() const;

    bool operator==(const OccupancyTrace&) const = default;
};

/// Zero-order-hold resampling of event-triggered observations onto a uniform
/// grid starting at the first event (floored to the grid) and ending at `end`.
OccupancyTrace resample_events(const std::string& zone_id, std::vector<OccupancySample> events, int interval_minutes,
                               SimTime end);

/// Square row-stochastic matrix stored row-major.
class TransitionMatrix {
public:
    TransitionMatrix() = default;
    explicit TransitionMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
    static TransitionMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double row_sum(std::size_t i) const;

    bool operator==(const TransitionMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct OccupancyState {
    bool occupied = false;
    /// Minutes spent in the current occupancy state, including the current sample.
    int duration_minutes = 0;

    bool operator==(const OccupancyState&) const = default;
};

/// Non-homogeneous Markov chain over (occupied bit x duration bucket) with one
/// transition matrix per time-of-day window.
///
/// State index = occupied * bucket_count + bucket. Bucket k holds durations in
/// [boundary[k-1], boundary[k]); an empty boundary list gives the plain 2-state chain.
struct OccupancyModel {
    std::string zone_id;
    int window_minutes = 30;
    int sample_minutes = 5;
    std::vector<int> duration_buckets{30, 120};
    std::vector<TransitionMatrix> windows;

    std::size_t bucket_count() const { return duration_buckets.size() + 1; }
    std::size_t state_count() const { return 2 * bucket_count(); }
    std::size_t window_count() const { return static_cast<std::size_t>(kMinutesPerDay / window_minutes); }
    std::size_t bucket_of(int duration_minutes) const;
    std::size_t state_index(const OccupancyState& s) const;
    bool is_occupied_state(std::size_t index) const { return index >= bucket_count(); }
    std::size_t window_of(SimTime t) const;

    /// Window count, matrix shapes and row-stochasticity (1e-9).
    void validate() const;

    bool operator==(const OccupancyModel&) const = default;
};

struct OccupancyFitOptions {
    int window_minutes = 30;
    std::vector<int> duration_buckets{30, 120};
    /// Pseudo-count added to every entry of an observed row.
    double laplace = 0.0;
    double min_days = 7.0;
};

/// Count-ratio maximum-likelihood estimate per window; unobserved rows become
/// self-transitions.
OccupancyModel fit_occupancy(const OccupancyTrace& trace, const OccupancyFitOptions& options = {});

/// Per-window transition counts, exposed for diagnostics and tests.
std::vector<std::vector<std::vector<double>>> transition_counts(const OccupancyTrace& trace,
                                                                const OccupancyFitOptions& options = {});

struct ForecastPoint {
    SimTime time;
    double occupied_prob = 0.0;
};

struct OccupancyForecast {
    std::string zone_id;
    /// First point is `now`; then one point per sample interval up to the horizon.
    std::vector<ForecastPoint> horizon;

    double final_prob() const { return horizon.empty() ? 0.0 : horizon.back().occupied_prob; }
};

OccupancyForecast forecast(const OccupancyModel& model, const OccupancyState& current, SimTime now,
                           int horizon_minutes);

/// Draws a trajectory of the chain, tracking the true duration in state so the
/// emitted trace is consistent with how fit_occupancy rebuilds the states.
class OccupancySampler {
public:
    OccupancySampler(const OccupancyModel& model, OccupancyState initial);

    /// Advances one sample interval from time `now` and returns the new state.
    const OccupancyState& advance(SimTime now, std::mt19937_64& rng);
    const OccupancyState& state() const { return state_; }

private:
    const OccupancyModel* model_;
    OccupancyState state_;
};

struct SimulateOptions {
    bool start_occupied = false;
    SimTime start{};
};

OccupancyTrace simulate(const OccupancyModel& model, std::uint64_t seed, int days, const SimulateOptions& options = {});

/// Parameters of the synthetic office-occupant generator. Times are hours of day.
struct OfficeProfile {
    double arrival_mean_h = 8.5;
    double arrival_std_h = 0.5;
    double departure_mean_h = 17.0;
    double departure_std_h = 0.6;
    /// Probability the occupant comes in at all on a working day.
    double attendance_prob = 0.95;
    double lunch_prob = 0.6;
    double lunch_mean_h = 12.25;
    double lunch_std_h = 0.3;
    double lunch_minutes = 45.0;
    /// Poisson rate of away-from-desk meetings while present.
    double meeting_rate_per_h = 0.25;
    double meeting_mean_minutes = 40.0;
    /// Days of week (day index mod 7, day 0 = Monday) with nobody in.
    std::vector<int> days_off{};
    int interval_minutes = 5;

    void validate() const;
};

OccupancyTrace generate_office_trace(const std::string& zone_id, const OfficeProfile& profile, std::uint64_t seed,
                                     int days);

/// Likelihood of being occupied per time-of-day window, averaged over days.
std::vector<double> daily_occupancy_profile(const OccupancyTrace& trace, int window_minutes = 30);

/// Long format: timestamp_iso8601,zone_id,occupied. Irregular event streams are
/// resampled to `interval_minutes` by zero-order hold.
std::map<std::string, OccupancyTrace> read_occupancy_csv(std::istream& in, int interval_minutes = 5);
void write_occupancy_csv(std::ostream& out, const std::vector<OccupancyTrace>& traces);

}  // namespace loadrank
