#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pseudoscope/experiments.hpp"
#include "pseudoscope/linalg.hpp"

namespace pseudoscope {

// One line of an empirical tail table.
struct TailRow {
    // "upper", "lower", "tail", "small-ball" or "annulus".
    std::string series;
    double t = 0.0;
    double empirical = 0.0;
    // Binomial standard error sqrt(p (1 - p) / N), with p the oracle value
    // when one exists and the empirical value otherwise.
    double standard_error = 0.0;
    // Oracle probability, bound or envelope value; NaN when there is none.
    double reference = 0.0;
    // "oracle", "bound", "envelope" or "" for no reference.
    std::string reference_kind;
    // Oracle rows: |empirical - reference| <= 3 standard errors. Bound and
    // envelope rows always pass; the table verdict carries their check.
    bool pass = true;
};

struct TailTable {
    // "norm", "hw", "cw", "qf-diag" or "corner".
    std::string which;
    std::size_t d = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<TailRow> rows;
    // Fitted summary: "c" for hw, "slope" for cw, "rate" for qf-diag.
    std::string fitted_name;
    std::optional<double> fitted;
    std::optional<double> ks_statistic;
    std::optional<double> ks_limit;
    // Tails are nonincreasing and small-ball curves nondecreasing in t.
    bool monotone = true;
    bool pass = true;
};

// Pr(|xi|^2 - d >= t d) ("upper") and Pr(|xi|^2 - d <= -t d) ("lower") for
// xi ~ CN(0, I_d), against the exact Gamma(d, 1) law of |xi|^2. Requires
// d >= 2, N >= 10^4 and t >= 0.
TailTable tail_norm_concentration(std::size_t d, const std::vector<double>& t_grid, std::size_t samples,
                                  std::uint64_t seed, const ExecutionOptions& exec = {});

// Pr(|v† J^k u| >= t) against the template 4 exp(-c min(t^2 / (d - k), t)),
// with c the largest constant for which the template dominates every grid
// point. For k = d - 1 the sample is also compared with the exact law of a
// product of two Rayleigh variables (KS limit 1.95 / sqrt(N)).
TailTable tail_hanson_wright(std::size_t d, std::size_t k, const std::vector<double>& t_grid, std::size_t samples,
                             std::uint64_t seed, const ExecutionOptions& exec = {});

// Small-ball Pr(|v† A u| <= t |A|_F) for A = J^k (d x d). The verdict is a
// least-squares log-log slope in [0.4, 0.6] over the grid points with a
// nonzero count; fewer than two such points fail. Requires 0 < t < 1.
TailTable tail_carbery_wright(std::size_t d, std::size_t k, const std::vector<double>& t_grid, std::size_t samples,
                              std::uint64_t seed, const ExecutionOptions& exec = {});
// Same for a supplied square matrix A with |A|_F > 0.
TailTable tail_carbery_wright(const ComplexMatrix& a, const std::vector<double>& t_grid, std::size_t samples,
                              std::uint64_t seed, const ExecutionOptions& exec = {});

// Pr(|v† D u| >= t d) for D = diag(entries). The fitted rate is minus the
// least-squares slope of log Pr against t sqrt(d) over the points with t > 0
// and a nonzero count; the verdict is rate >= delta / 2 with
// delta = 1 / max |entry|, plus monotonicity.
TailTable tail_quadratic_form_diag(const std::vector<Complex>& entries, const std::vector<double>& t_grid,
                                   std::size_t samples, std::uint64_t seed, const ExecutionOptions& exec = {});

struct CornerAnnulusEstimate {
    double empirical = 0.0;
    double exact = 0.0;
    double standard_error = 0.0;
    bool pass = false;
};

// Draws rho ~ CN(0, 1) per trial and records whether every eigenvalue of
// J(rho) (from corner_eigenvalues) satisfies ||l| - 1| < delta; compares the
// frequency with corner_annulus_exact within 3 standard errors.
CornerAnnulusEstimate corner_annulus_probability(std::size_t d, double delta, std::size_t samples,
                                                 std::uint64_t seed, const ExecutionOptions& exec = {});
// The same estimate as a one-row table.
TailTable corner_annulus_table(std::size_t d, double delta, std::size_t samples, std::uint64_t seed,
                               const ExecutionOptions& exec = {});

}  // namespace pseudoscope
