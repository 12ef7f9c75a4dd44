#pragma once

#include <functional>
#include <span>
#include <vector>

namespace phylo {

// Goodness-of-fit helpers shared by the test suites and the verify command.

double chi_square_statistic(std::span<const long> counts,
                            std::span<const double> expected);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_pvalue(double statistic, int df);

// Pearson test against equal cell probabilities.
double chi_square_uniform_pvalue(std::span<const long> counts);

// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value against a
// continuous CDF.  Samples need not be sorted.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);
double ks_pvalue(double d, size_t n);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

}  // namespace phylo
