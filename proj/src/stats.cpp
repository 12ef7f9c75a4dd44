#include "phylo/stats.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phylo {

double chi_square_statistic(std::span<const long> counts,
                            std::span<const double> expected) {
  if (counts.size() != expected.size() || counts.empty())
    throw std::invalid_argument("chi_square_statistic: size mismatch");
  double stat = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (expected[i] <= 0.0)
      throw std::invalid_argument("chi_square_statistic: nonpositive expected count");
    const double d = counts[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

double chi_square_pvalue(double statistic, int df) {
  if (df <= 0) throw std::invalid_argument("chi_square_pvalue: df must be positive");
  return gsl_cdf_chisq_Q(statistic, df);
}

double chi_square_uniform_pvalue(std::span<const long> counts) {
  long total = 0;
  for (long c : counts) total += c;
  std::vector<double> expected(counts.size(),
                               static_cast<double>(total) / counts.size());
  const double stat = chi_square_statistic(counts, expected);
  return chi_square_pvalue(stat, static_cast<int>(counts.size()) - 1);
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

double ks_pvalue(double d, size_t n) {
  // Asymptotic Kolmogorov distribution with the Stephens finite-sample
  // correction; adequate for the sample sizes used here (>= 10^3).
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace phylo
