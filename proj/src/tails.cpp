#include "pseudoscope/tails.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/geometry.hpp"
#include "pseudoscope/parallel.hpp"
#include "pseudoscope/rng.hpp"
#include "pseudoscope/sampling.hpp"
#include "pseudoscope/stats.hpp"

namespace pseudoscope {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSigmas = 3.0;

// Sample i is computed from its own stream (seed, i), so the values do not
// depend on the worker count.
std::vector<double> sample_statistic(std::size_t samples, std::uint64_t seed, const ExecutionOptions& exec,
                                     const std::function<double(SeededRng&)>& statistic) {
    std::vector<double> values(samples);
    parallel_for(samples, resolve_thread_count(exec.threads), [&](std::size_t i) {
        SeededRng rng(seed, i);
        values[i] = statistic(rng);
    });
    return values;
}

std::vector<double> sorted_grid(const std::vector<double>& t_grid, const char* op) {
    if (t_grid.empty()) {
        throw InvalidArgument(std::string(op) + ": the t grid is empty");
    }
    std::vector<double> grid = t_grid;
    for (double t : grid) {
        if (!std::isfinite(t) || t < 0.0) {
            throw InvalidArgument(std::string(op) + ": grid values must be finite and nonnegative");
        }
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

void require_samples(std::size_t samples, const char* op) {
    if (samples == 0) {
        throw InvalidArgument(std::string(op) + ": at least one sample is required");
    }
}

// Fraction of sorted values with value >= threshold.
double fraction_at_least(const std::vector<double>& sorted, double threshold) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), threshold);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

// Fraction of sorted values with value <= threshold.
double fraction_at_most(const std::vector<double>& sorted, double threshold) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), threshold);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

TailRow oracle_row(std::string series, double t, double empirical, double exact, std::size_t n) {
    TailRow row;
    row.series = std::move(series);
    row.t = t;
    row.empirical = empirical;
    row.reference = exact;
    row.reference_kind = "oracle";
    row.standard_error = stats::binomial_standard_error(exact, n);
    row.pass = std::abs(empirical - exact) <= kSigmas * row.standard_error;
    return row;
}

TailRow plain_row(std::string series, double t, double empirical, std::size_t n) {
    TailRow row;
    row.series = std::move(series);
    row.t = t;
    row.empirical = empirical;
    row.reference = kNaN;
    row.standard_error = stats::binomial_standard_error(empirical, n);
    return row;
}

// Rows of one series, in increasing t, are nonincreasing (tails) or
// nondecreasing (small-ball curves).
bool series_monotone(const std::vector<TailRow>& rows, const std::string& series, bool increasing) {
    double last = increasing ? -1.0 : 2.0;
    for (const auto& row : rows) {
        if (row.series != series) {
            continue;
        }
        if (increasing ? row.empirical < last : row.empirical > last) {
            return false;
        }
        last = row.empirical;
    }
    return true;
}

bool all_rows_pass(const std::vector<TailRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const TailRow& r) { return r.pass; });
}

// v† J^k u = sum_i conj(v_i) u_{i+k}.
Complex shifted_inner(const ComplexVector& v, const ComplexVector& u, std::size_t k) {
    Complex acc{};
    for (std::size_t i = 0; i + k < u.size(); ++i) {
        acc += std::conj(v[i]) * u[i + k];
    }
    return acc;
}

// Whether a has exactly one nonzero entry.
bool single_nonzero(const ComplexMatrix& a) {
    return std::count_if(a.data().begin(), a.data().end(), [](Complex z) { return z != Complex{}; }) == 1;
}

TailTable carbery_wright_table(std::size_t d, std::vector<double> values, const std::vector<double>& grid,
                               bool exact_product, std::size_t samples, std::uint64_t seed) {
    TailTable table;
    table.which = "cw";
    table.d = d;
    table.samples = samples;
    table.seed = seed;
    std::sort(values.begin(), values.end());

    std::vector<double> log_t;
    std::vector<double> log_p;
    double envelope = 0.0;
    for (double t : grid) {
        const double p = fraction_at_most(values, t);
        if (exact_product) {
            table.rows.push_back(oracle_row("small-ball", t, p, stats::product_rayleigh_cdf(t), samples));
        } else {
            table.rows.push_back(plain_row("small-ball", t, p, samples));
        }
        if (p > 0.0) {
            log_t.push_back(std::log(t));
            log_p.push_back(std::log(p));
            envelope = std::max(envelope, p / std::sqrt(t));
        }
    }
    if (!exact_product) {
        // Smallest C with C sqrt(t) above every grid point.
        for (auto& row : table.rows) {
            row.reference = envelope * std::sqrt(row.t);
            row.reference_kind = "envelope";
        }
    }
    table.fitted_name = "slope";
    table.monotone = series_monotone(table.rows, "small-ball", true);
    bool slope_ok = false;
    const bool distinct = log_t.size() >= 2 && log_t.front() != log_t.back();
    if (distinct) {
        const double slope = stats::least_squares(log_t, log_p).slope;
        table.fitted = slope;
        slope_ok = slope >= 0.4 && slope <= 0.6;
    }
    table.pass = table.monotone && slope_ok && all_rows_pass(table.rows);
    return table;
}

std::vector<double> carbery_wright_grid(const std::vector<double>& t_grid) {
    auto grid = sorted_grid(t_grid, "tail_carbery_wright");
    if (grid.front() <= 0.0 || grid.back() >= 1.0) {
        throw InvalidArgument("tail_carbery_wright: grid values must lie in (0, 1)");
    }
    return grid;
}

}  // namespace

TailTable tail_norm_concentration(std::size_t d, const std::vector<double>& t_grid, std::size_t samples,
                                  std::uint64_t seed, const ExecutionOptions& exec) {
    if (d < 2) {
        throw InvalidArgument("tail_norm_concentration: d must be at least 2");
    }
    if (samples < 10000) {
        throw InvalidArgument("tail_norm_concentration: at least 10^4 samples are required");
    }
    const auto grid = sorted_grid(t_grid, "tail_norm_concentration");
    auto values = sample_statistic(samples, seed, exec, [d](SeededRng& rng) {
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            sum += std::norm(rng.next_complex_normal());
        }
        return sum;
    });
    std::sort(values.begin(), values.end());

    TailTable table;
    table.which = "norm";
    table.d = d;
    table.samples = samples;
    table.seed = seed;
    const double dd = static_cast<double>(d);
    // |xi|^2 is a sum of d independent Exp(1) variables, i.e. Gamma(d, 1).
    for (double t : grid) {
        const double upper = dd * (1.0 + t);
        table.rows.push_back(
            oracle_row("upper", t, fraction_at_least(values, upper), stats::gamma_survival(dd, upper), samples));
    }
    for (double t : grid) {
        const double lower = dd * (1.0 - t);
        table.rows.push_back(
            oracle_row("lower", t, fraction_at_most(values, lower), stats::gamma_cdf(dd, lower), samples));
    }
    table.monotone = series_monotone(table.rows, "upper", false) && series_monotone(table.rows, "lower", false);
    table.pass = table.monotone && all_rows_pass(table.rows);
    return table;
}

TailTable tail_hanson_wright(std::size_t d, std::size_t k, const std::vector<double>& t_grid, std::size_t samples,
                             std::uint64_t seed, const ExecutionOptions& exec) {
    if (d == 0 || k >= d) {
        throw InvalidArgument("tail_hanson_wright: need 0 <= k <= d - 1");
    }
    require_samples(samples, "tail_hanson_wright");
    const auto grid = sorted_grid(t_grid, "tail_hanson_wright");
    auto values = sample_statistic(samples, seed, exec, [d, k](SeededRng& rng) {
        const ComplexVector u = sample_complex_normal(d, rng);
        const ComplexVector v = sample_complex_normal(d, rng);
        return std::abs(shifted_inner(v, u, k));
    });

    TailTable table;
    table.which = "hw";
    table.d = d;
    table.samples = samples;
    table.seed = seed;
    if (k == d - 1) {
        // v† J^{d-1} u = conj(v_1) u_d: a product of two independent Rayleigh moduli.
        table.ks_statistic = stats::ks_statistic(values, stats::product_rayleigh_cdf);
        table.ks_limit = 1.95 / std::sqrt(static_cast<double>(samples));
    }
    std::sort(values.begin(), values.end());

    const double width = static_cast<double>(d - k);
    const auto exponent = [width](double t) { return std::min(t * t / width, t); };
    double c = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const double p = fraction_at_least(values, t);
        table.rows.push_back(plain_row("tail", t, p, samples));
        if (p > 0.0 && exponent(t) > 0.0) {
            c = std::min(c, std::log(4.0 / p) / exponent(t));
        }
    }
    table.fitted_name = "c";
    if (std::isfinite(c)) {
        table.fitted = c;
        for (auto& row : table.rows) {
            row.reference = 4.0 * std::exp(-c * exponent(row.t));
            row.reference_kind = "bound";
        }
    }
    table.monotone = series_monotone(table.rows, "tail", false);
    const bool ks_ok = !table.ks_statistic || *table.ks_statistic <= *table.ks_limit;
    table.pass = table.monotone && ks_ok;
    return table;
}

TailTable tail_carbery_wright(std::size_t d, std::size_t k, const std::vector<double>& t_grid, std::size_t samples,
                              std::uint64_t seed, const ExecutionOptions& exec) {
    if (d == 0 || k >= d) {
        throw InvalidArgument("tail_carbery_wright: need 0 <= k <= d - 1 so that J^k is nonzero");
    }
    require_samples(samples, "tail_carbery_wright");
    const auto grid = carbery_wright_grid(t_grid);
    const double frobenius = std::sqrt(static_cast<double>(d - k));
    auto values = sample_statistic(samples, seed, exec, [d, k, frobenius](SeededRng& rng) {
        const ComplexVector u = sample_complex_normal(d, rng);
        const ComplexVector v = sample_complex_normal(d, rng);
        return std::abs(shifted_inner(v, u, k)) / frobenius;
    });
    return carbery_wright_table(d, std::move(values), grid, k == d - 1, samples, seed);
}

TailTable tail_carbery_wright(const ComplexMatrix& a, const std::vector<double>& t_grid, std::size_t samples,
                              std::uint64_t seed, const ExecutionOptions& exec) {
    const std::size_t d = a.dim();
    const double frobenius = a.frobenius_norm();
    if (d == 0 || !(frobenius > 0.0)) {
        throw InvalidArgument("tail_carbery_wright: A must be a nonzero square matrix");
    }
    require_samples(samples, "tail_carbery_wright");
    const auto grid = carbery_wright_grid(t_grid);
    auto values = sample_statistic(samples, seed, exec, [&a, d, frobenius](SeededRng& rng) {
        const ComplexVector u = sample_complex_normal(d, rng);
        const ComplexVector v = sample_complex_normal(d, rng);
        const ComplexVector au = a.apply(u);
        Complex acc{};
        for (std::size_t i = 0; i < d; ++i) {
            acc += std::conj(v[i]) * au[i];
        }
        return std::abs(acc) / frobenius;
    });
    return carbery_wright_table(d, std::move(values), grid, single_nonzero(a), samples, seed);
}

TailTable tail_quadratic_form_diag(const std::vector<Complex>& entries, const std::vector<double>& t_grid,
                                   std::size_t samples, std::uint64_t seed, const ExecutionOptions& exec) {
    const std::size_t d = entries.size();
    double largest = 0.0;
    for (Complex g : entries) {
        largest = std::max(largest, std::abs(g));
    }
    if (d == 0 || !(largest > 0.0) || !std::isfinite(largest)) {
        throw InvalidArgument("tail_quadratic_form_diag: entries must be finite and not all zero");
    }
    require_samples(samples, "tail_quadratic_form_diag");
    const auto grid = sorted_grid(t_grid, "tail_quadratic_form_diag");
    auto values = sample_statistic(samples, seed, exec, [&entries, d](SeededRng& rng) {
        const ComplexVector u = sample_complex_normal(d, rng);
        const ComplexVector v = sample_complex_normal(d, rng);
        Complex acc{};
        for (std::size_t i = 0; i < d; ++i) {
            acc += std::conj(v[i]) * entries[i] * u[i];
        }
        return std::abs(acc);
    });
    std::sort(values.begin(), values.end());

    TailTable table;
    table.which = "qf-diag";
    table.d = d;
    table.samples = samples;
    table.seed = seed;
    const double dd = static_cast<double>(d);
    const double root_d = std::sqrt(dd);
    const double delta = 1.0 / largest;
    std::vector<double> x;
    std::vector<double> y;
    double constant = 0.0;
    for (double t : grid) {
        const double p = fraction_at_least(values, t * dd);
        table.rows.push_back(plain_row("tail", t, p, samples));
        if (p > 0.0) {
            constant = std::max(constant, p * std::exp(t * delta * root_d / 2.0));
            if (t > 0.0) {
                x.push_back(t * root_d);
                y.push_back(std::log(p));
            }
        }
    }
    // Smallest C with C e^{-t delta sqrt(d) / 2} above every grid point.
    for (auto& row : table.rows) {
        row.reference = constant * std::exp(-row.t * delta * root_d / 2.0);
        row.reference_kind = "bound";
    }
    table.fitted_name = "rate";
    table.monotone = series_monotone(table.rows, "tail", false);
    bool rate_ok = false;
    if (x.size() >= 2 && x.front() != x.back()) {
        const double rate = -stats::least_squares(x, y).slope;
        table.fitted = rate;
        rate_ok = rate >= delta / 2.0;
    }
    table.pass = table.monotone && rate_ok;
    return table;
}

CornerAnnulusEstimate corner_annulus_probability(std::size_t d, double delta, std::size_t samples,
                                                 std::uint64_t seed, const ExecutionOptions& exec) {
    if (d == 0 || !(delta > 0.0) || !std::isfinite(delta)) {
        throw InvalidArgument("corner_annulus_probability: need d >= 1 and a finite delta > 0");
    }
    require_samples(samples, "corner_annulus_probability");
    const auto hits = sample_statistic(samples, seed, exec, [d, delta](SeededRng& rng) {
        const Complex rho = rng.next_complex_normal();
        const auto gammas = corner_eigenvalues(d, rho);
        const bool inside = std::all_of(gammas.begin(), gammas.end(),
                                        [delta](Complex g) { return std::abs(std::abs(g) - 1.0) < delta; });
        return inside ? 1.0 : 0.0;
    });
    CornerAnnulusEstimate estimate;
    estimate.empirical = stats::mean(hits);
    estimate.exact = corner_annulus_exact(d, delta);
    estimate.standard_error = stats::binomial_standard_error(estimate.exact, samples);
    estimate.pass = std::abs(estimate.empirical - estimate.exact) <= kSigmas * estimate.standard_error;
    return estimate;
}

TailTable corner_annulus_table(std::size_t d, double delta, std::size_t samples, std::uint64_t seed,
                               const ExecutionOptions& exec) {
    const auto estimate = corner_annulus_probability(d, delta, samples, seed, exec);
    TailTable table;
    table.which = "corner";
    table.d = d;
    table.samples = samples;
    table.seed = seed;
    table.rows.push_back(oracle_row("annulus", delta, estimate.empirical, estimate.exact, samples));
    table.pass = estimate.pass;
    return table;
}

}  // namespace pseudoscope
