#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pseudoscope::stats {

// Linear-interpolation sample quantile (Hyndman-Fan type 7) of unsorted data.
// Throws InvalidArgument for empty data or q outside [0, 1].
double quantile(std::span<const double> data, double q);

// Same, for data already sorted ascending.
double sorted_quantile(std::span<const double> sorted, double q);

double mean(std::span<const double> data);
// Unbiased sample variance; requires at least two values.
double sample_variance(std::span<const double> data);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y = slope x + intercept; requires two distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// sqrt(p (1 - p) / n).
double binomial_standard_error(double p, std::size_t n);

// Regularized lower incomplete gamma P(shape, x): the Gamma(shape, 1) CDF.
double gamma_cdf(double shape, double x);
// Upper tail Q(shape, x) = 1 - P(shape, x), computed without cancellation.
double gamma_survival(double shape, double x);

// Pr(|a| |b| <= s) for independent a, b ~ CN(0, 1), by numerical
// integration of Pr(|a| |b| > s) = int_0^inf e^{-x} e^{-s^2/x} dx.
double product_rayleigh_cdf(double s);

// Kolmogorov-Smirnov statistic sup |F_n - F| of a sample against a CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace pseudoscope::stats
