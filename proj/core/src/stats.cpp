#include "rwre/stats.hpp"

#include <cmath>
#include <vector>

#include "rwre/error.hpp"

namespace rwre {

void KahanSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

MeanEstimate mean_estimate(std::span<const double> x) {
  MeanEstimate out;
  out.n = x.size();
  if (x.empty()) return out;
  double sum = 0.0;
  for (const double v : x) sum += v;
  out.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (const double v : x) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return out;
}

MeanEstimate ratio_estimate(std::span<const double> num, std::span<const double> den) {
  if (num.size() != den.size()) raise(ErrorKind::InvalidArgument, "ratio inputs differ in length");
  MeanEstimate out;
  out.n = num.size();
  if (num.empty()) return out;
  double sn = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    sn += num[i];
    sd += den[i];
  }
  out.mean = sn / sd;
  if (num.size() > 1) {
    const double n = static_cast<double>(num.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
      const double r = num[i] - out.mean * den[i];
      ss += r * r;
    }
    out.std_error = std::sqrt(ss / (n - 1.0) / n) / (sd / n);
  }
  return out;
}

MeanEstimate batch_mean_estimate(std::span<const double> series, std::size_t batches) {
  MeanEstimate out;
  out.n = series.size();
  if (series.empty()) return out;
  double sum = 0.0;
  for (const double v : series) sum += v;
  out.mean = sum / static_cast<double>(series.size());
  if (batches < 2 || series.size() < 2 * batches) return out;
  const std::size_t len = series.size() / batches;
  double ss = 0.0;
  double grand = 0.0;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += series[i];
    means[b] = s / static_cast<double>(len);
    grand += means[b];
  }
  grand /= static_cast<double>(batches);
  for (const double m : means) ss += (m - grand) * (m - grand);
  out.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  double s1 = 0.0, s2 = 0.0;
  for (const double w : weights) {
    s1 += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

}  // namespace rwre
