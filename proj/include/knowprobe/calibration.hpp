#pragma once

#include <string>
#include <vector>

#include "knowprobe/errors.hpp"

namespace knowprobe {

/// Empirical CDF: F(x) = fraction of observed values <= x.
class Ecdf {
public:
    explicit Ecdf(std::vector<double> values);

    double operator()(double x) const;
    const std::vector<double>& sorted_values() const { return values_; }
    size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;  // ascending
};

/// Output of the two-sample KS threshold construction. The fabricated
/// population is always the first (low-score) sample; ks_statistic is
/// F(tau) - G(tau) with F the fabricated-score ECDF.
struct CalibrationResult {
    double tau = 0.0;
    double ks_statistic = 0.0;
    double p_value = 1.0;
    size_t n_fabricated = 0;
    size_t n_other = 0;
    bool small_sample = false;  // min(n) < 10: asymptotic p-value unreliable
};

/// tau = argmax_x (F(x) - G(x)) over the union of observed scores, ties
/// resolved toward the smallest x. The p-value uses the asymptotic
/// two-sample Kolmogorov distribution.
CalibrationResult ks_threshold(const std::vector<double>& fabricated_scores,
                               const std::vector<double>& other_scores);

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), clamped to (0, 1].
double kolmogorov_q(double lambda);

/// One-line human-readable summary, e.g. "75.00% at τ of 0.023".
std::string calibration_summary(const CalibrationResult& result);

} // namespace knowprobe
