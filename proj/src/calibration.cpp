#include "knowprobe/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace knowprobe {

Ecdf::Ecdf(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw Error(ErrorCode::EmptyInput, "ecdf: empty sample");
    }
    std::sort(values_.begin(), values_.end());
}

double Ecdf::operator()(double x) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return double(it - values_.begin()) / double(values_.size());
}

double kolmogorov_q(double lambda) {
    // Below 0.2 the alternating series converges too slowly and Q is 1 to
    // more digits than anyone reports.
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        double term = std::exp(-2.0 * double(k) * double(k) * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    double q = 2.0 * sum;
    return std::clamp(q, 1e-300, 1.0);
}

CalibrationResult ks_threshold(const std::vector<double>& fabricated_scores,
                               const std::vector<double>& other_scores) {
    if (fabricated_scores.empty() || other_scores.empty()) {
        throw Error(ErrorCode::EmptyInput, "ks_threshold: empty sample");
    }
    Ecdf f(fabricated_scores);
    Ecdf g(other_scores);

    // The ECDF difference only changes at observed points, so the union of
    // both samples is a complete candidate set.
    std::vector<double> candidates;
    candidates.reserve(f.size() + g.size());
    candidates.insert(candidates.end(), f.sorted_values().begin(), f.sorted_values().end());
    candidates.insert(candidates.end(), g.sorted_values().begin(), g.sorted_values().end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    CalibrationResult result;
    result.n_fabricated = f.size();
    result.n_other = g.size();
    result.small_sample = std::min(f.size(), g.size()) < 10;

    double best = -2.0;
    for (double x : candidates) {
        double d = f(x) - g(x);
        if (d > best) {
            best = d;
            result.tau = x;  // first (smallest) candidate achieving the max
        }
    }
    result.ks_statistic = best;

    double m = double(result.n_fabricated);
    double n = double(result.n_other);
    double lambda = std::sqrt(m * n / (m + n)) * std::max(result.ks_statistic, 0.0);
    result.p_value = kolmogorov_q(lambda);
    return result;
}

std::string calibration_summary(const CalibrationResult& result) {
    char tau_buf[64];
    if (std::abs(result.tau) >= 1e-3) {
        std::snprintf(tau_buf, sizeof(tau_buf), "%.3f", result.tau);
    } else {
        std::snprintf(tau_buf, sizeof(tau_buf), "%.3g", result.tau);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.2f%% at τ of %s", 100.0 * result.ks_statistic,
                  tau_buf);
    return buf;
}

} // namespace knowprobe
