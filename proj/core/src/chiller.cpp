#include "loadrank/chiller.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "loadrank/error.hpp"

namespace loadrank {
namespace {

std::string column_name(const std::vector<std::string>& zone_ids, Eigen::Index col) {
    if (col == 0) return "intercept";
    if (col == 1) return "outdoor_temp_C";
    return "setpoint_" + zone_ids[static_cast<std::size_t>(col - 2)] + "_C";
}

// Names the columns taking part in the (near) linear dependency spanned by the
// weakest right-singular vectors of the column-normalised design matrix.
[[noreturn]] void throw_collinear(const std::vector<std::string>& zone_ids, const Eigen::MatrixXd& x) {
    Eigen::VectorXd norms = x.colwise().norm();
    Eigen::MatrixXd scaled = x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (norms[c] > 0) scaled.col(c) /= norms[c];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double tol = s[0] * 1e-9 * static_cast<double>(x.cols());
    std::vector<bool> involved(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s[k] > tol) continue;
        const Eigen::VectorXd v = svd.matrixV().col(k);
        for (Eigen::Index c = 0; c < v.size(); ++c) {
            if (std::abs(v[c]) > 1e-6) involved[static_cast<std::size_t>(c)] = true;
        }
    }
    std::string names;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (!involved[static_cast<std::size_t>(c)]) continue;
        if (!names.empty()) names += ", ";
        names += column_name(zone_ids, c);
    }
    throw IdentifiabilityError("chiller design matrix is rank deficient; collinear columns: " + names);
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::size_t ChillerModel::zone_index(const std::string& zone_id) const {
    const auto it = std::find(zone_ids.begin(), zone_ids.end(), zone_id);
    if (it == zone_ids.end()) throw ValidationError("chiller model has no zone '" + zone_id + "'");
    return static_cast<std::size_t>(it - zone_ids.begin());
}

ChillerModel fit_chiller(const std::vector<std::string>& zone_ids, const std::vector<ChillerObservation>& observations,
                         const ChillerFitOptions& options) {
    const auto zones = zone_ids.size();
    std::vector<const ChillerObservation*> kept;
    for (const auto& o : observations) {
        if (o.setpoints_C.size() != zones) {
            throw ValidationError("observation at " + to_iso8601(o.timestamp) + " has " +
                                  std::to_string(o.setpoints_C.size()) + " set-points, expected " +
                                  std::to_string(zones));
        }
        if (!std::isfinite(o.chiller_power_W) || !std::isfinite(o.outdoor_temp_C)) {
            throw ValidationError("non-finite chiller observation at " + to_iso8601(o.timestamp));
        }
        if (options.min_outdoor_temp_C && o.outdoor_temp_C < *options.min_outdoor_temp_C) continue;
        kept.push_back(&o);
    }
    const std::size_t params = zones + 2;
    if (kept.size() < 10 * params) {
        throw ValidationError("chiller fit needs at least " + std::to_string(10 * params) + " observations, got " +
                              std::to_string(kept.size()) + " after filtering");
    }

    const auto n = static_cast<Eigen::Index>(kept.size());
    const auto p = static_cast<Eigen::Index>(params);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = *kept[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        x(i, 1) = o.outdoor_temp_C;
        for (std::size_t z = 0; z < zones; ++z) x(i, static_cast<Eigen::Index>(z) + 2) = o.setpoints_C[z];
        y[i] = o.chiller_power_W;
    }

    ChillerModel model;
    model.zone_ids = zone_ids;
    auto& stats = model.fit_stats;

    const Eigen::MatrixXd gram = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    stats.condition_number = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();

    Eigen::VectorXd beta;
    if (stats.condition_number <= options.max_normal_condition) {
        beta = gram.ldlt().solve(x.transpose() * y);
        stats.solver = "normal_equations";
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        qr.setThreshold(1e-10);
        if (qr.rank() < p) throw_collinear(zone_ids, x);
        beta = qr.solve(y);
        stats.solver = "column_pivoted_qr";
    }

    model.beta0 = beta[0];
    model.beta_out = beta[1];
    model.beta_z.assign(beta.data() + 2, beta.data() + p);

    const Eigen::VectorXd resid = y - x * beta;
    stats.rmse_W = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    stats.samples_used = kept.size();
    stats.samples_filtered = observations.size() - kept.size();
    stats.min_outdoor_temp_C = options.min_outdoor_temp_C;
    std::vector<double> rel;
    rel.reserve(kept.size());
    std::size_t within = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i] == 0.0) continue;
        // Relative error of the estimate with respect to the observed power.
        const double e = -resid[i] / std::abs(y[i]);
        rel.push_back(e);
        if (std::abs(e) <= 0.10) ++within;
    }
    stats.fraction_within_10pct = rel.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(rel.size());
    stats.rel_error_p05 = percentile(rel, 0.05);
    stats.rel_error_p50 = percentile(rel, 0.50);
    stats.rel_error_p95 = percentile(rel, 0.95);
    return model;
}

double predict_power(const ChillerModel& model, double outdoor_temp_C, const std::vector<double>& setpoints_C) {
    if (setpoints_C.size() != model.beta_z.size()) {
        throw ValidationError("predict_power: got " + std::to_string(setpoints_C.size()) + " set-points, model has " +
                              std::to_string(model.beta_z.size()) + " zones");
    }
    double p = model.beta0 + model.beta_out * outdoor_temp_C;
    for (std::size_t z = 0; z < setpoints_C.size(); ++z) p += model.beta_z[z] * setpoints_C[z];
    return p;
}

double setpoint_power_delta(const ChillerModel& model, const std::string& zone_id, double delta_setpoint_C) {
    return model.beta_z[model.zone_index(zone_id)] * delta_setpoint_C;
}

std::vector<ChillerObservation> read_chiller_csv(std::istream& in, const std::vector<std::string>& zone_ids) {
    csv::Reader reader(in);
    const auto ts = reader.column("timestamp");
    const auto power = reader.column("chiller_power_W");
    const auto tout = reader.column("outdoor_temp_C");
    std::vector<std::size_t> sp;
    for (const auto& z : zone_ids) sp.push_back(reader.column("setpoint_" + z + "_C"));
    std::vector<ChillerObservation> out;
    while (auto row = reader.next()) {
        ChillerObservation o;
        o.timestamp = parse_iso8601(row->at(ts));
        o.chiller_power_W = csv::to_double(row->at(power), "chiller_power_W");
        o.outdoor_temp_C = csv::to_double(row->at(tout), "outdoor_temp_C");
        for (auto c : sp) o.setpoints_C.push_back(csv::to_double(row->at(c), "setpoint"));
        out.push_back(std::move(o));
    }
    return out;
}

void write_chiller_csv(std::ostream& out, const std::vector<std::string>& zone_ids,
                       const std::vector<ChillerObservation>& observations) {
    out << "timestamp,chiller_power_W,outdoor_temp_C";
    for (const auto& z : zone_ids) out << ",setpoint_" << z << "_C";
    out << '\n';
    for (const auto& o : observations) {
        out << to_iso8601(o.timestamp) << ',' << csv::fmt(o.chiller_power_W) << ',' << csv::fmt(o.outdoor_temp_C);
        for (double s : o.setpoints_C) out << ',' << csv::fmt(s);
        out << '\n';
    }
}

}  // namespace loadrank
