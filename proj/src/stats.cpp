#include "pseudoscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pseudoscope/errors.hpp"

namespace pseudoscope::stats {

double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw InvalidArgument("quantile: empty data");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw InvalidArgument("quantile: level must lie in [0, 1]");
    }
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> data, double q) {
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted_quantile(sorted, q);
}

double mean(std::span<const double> data) {
    if (data.empty()) {
        throw InvalidArgument("mean: empty data");
    }
    double sum = 0.0;
    for (double x : data) {
        sum += x;
    }
    return sum / static_cast<double>(data.size());
}

double sample_variance(std::span<const double> data) {
    if (data.size() < 2) {
        throw InvalidArgument("sample_variance: needs at least two values");
    }
    const double m = mean(data);
    double ss = 0.0;
    for (double x : data) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(data.size() - 1);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("least_squares: x and y differ in length");
    }
    if (x.size() < 2) {
        throw InvalidArgument("least_squares: needs at least two points");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw InvalidArgument("least_squares: all x values coincide");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

double binomial_standard_error(double p, std::size_t n) {
    if (n == 0) {
        throw InvalidArgument("binomial_standard_error: n must be positive");
    }
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double gamma_cdf(double shape, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    return boost::math::gamma_p(shape, x);
}

double gamma_survival(double shape, double x) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(shape, x);
}

double product_rayleigh_cdf(double s) {
    if (s <= 0.0) {
        return 0.0;
    }
    const double s2 = s * s;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double tail = integrator.integrate([s2](double x) {
        if (x <= 0.0) {
            return 0.0;
        }
        return std::exp(-x - s2 / x);
    });
    return std::clamp(1.0 - tail, 0.0, 1.0);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) {
        throw InvalidArgument("ks_statistic: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace pseudoscope::stats
