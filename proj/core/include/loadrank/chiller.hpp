#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loadrank/time.hpp"

namespace loadrank {

struct ChillerObservation {
    SimTime timestamp;
    double chiller_power_W = 0.0;
    double outdoor_temp_C = 0.0;
    std::vector<double> setpoints_C;
};

struct ChillerFitStats {
    double rmse_W = 0.0;
    std::size_t samples_used = 0;
    std::size_t samples_filtered = 0;
    std::optional<double> min_outdoor_temp_C;
    /// Share of in-sample relative errors |r|/|y| inside +/-10%.
    double fraction_within_10pct = 0.0;
    /// 5th, 50th and 95th percentiles of the signed relative error.
    double rel_error_p05 = 0.0;
    double rel_error_p50 = 0.0;
    double rel_error_p95 = 0.0;
    double condition_number = 0.0;
    /// "normal_equations" or "column_pivoted_qr".
    std::string solver;
};

/// Affine chiller power model:
///   P = beta0 + beta_out * T_out + sum_z beta_z[z] * T_set[z]
struct ChillerModel {
    std::vector<std::string> zone_ids;
    double beta0 = 0.0;
    double beta_out = 0.0;
    std::vector<double> beta_z;
    ChillerFitStats fit_stats;

    std::size_t zone_index(const std::string& zone_id) const;
};

struct ChillerFitOptions {
    /// Keep only hot-weather samples, where the chiller dominates HVAC power.
    std::optional<double> min_outdoor_temp_C = 24.0;
    /// Above this condition number of X^T X the solve switches to QR.
    double max_normal_condition = 1e8;
};

ChillerModel fit_chiller(const std::vector<std::string>& zone_ids, const std::vector<ChillerObservation>& observations,
                         const ChillerFitOptions& options = {});

double predict_power(const ChillerModel& model, double outdoor_temp_C, const std::vector<double>& setpoints_C);

/// beta_z * delta. Negative when raising a set-point saves power (cooling).
double setpoint_power_delta(const ChillerModel& model, const std::string& zone_id, double delta_setpoint_C);

/// Columns: timestamp,chiller_power_W,outdoor_temp_C,setpoint_<zone>_C,...
/// Extra columns are ignored, so emulator snapshot CSVs load directly.
std::vector<ChillerObservation> read_chiller_csv(std::istream& in, const std::vector<std::string>& zone_ids);
void write_chiller_csv(std::ostream& out, const std::vector<std::string>& zone_ids,
                       const std::vector<ChillerObservation>& observations);

}  // namespace loadrank
