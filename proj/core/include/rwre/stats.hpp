#pragma once

#include <cstddef>
#include <span>

namespace rwre {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Sample mean and its standard error sd/sqrt(n) (sd with n-1 denominator).
MeanEstimate mean_estimate(std::span<const double> x);

/// sum(num)/sum(den) with the delta-method standard error
/// sqrt(var(num - R den) / n) / mean(den).
MeanEstimate ratio_estimate(std::span<const double> num, std::span<const double> den);

/// Batch-means estimate of the mean of a stationary, possibly correlated
/// series: the series is cut into `batches` contiguous batches (trailing
/// remainder dropped from the error estimate only).
MeanEstimate batch_mean_estimate(std::span<const double> series, std::size_t batches);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

/// Compensated (Kahan-Babuska) summation.
class KahanSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace rwre
