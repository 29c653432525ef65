#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pseudoscope/geometry.hpp"
#include "pseudoscope/linalg.hpp"
#include "pseudoscope/spectra.hpp"

namespace pseudoscope {

enum class StructureKind { Zero, Scalar, Diagonal, Jordan, JordanCorner, Toeplitz };

// Unperturbed matrix family of an experiment.
//   zero                  T = 0
//   scalar(C)             T = C I
//   diagonal(g1, ..., gm) T = diag with the values in m equal contiguous blocks
//                         (the first d mod m blocks get one extra entry)
//   jordan                T = J
//   jordan-corner(rho)    T = J(rho), J with rho in the bottom-left corner
//   toeplitz(a0, ..., an) T = p(J)
struct Structure {
    StructureKind kind = StructureKind::Jordan;
    // C for scalar, rho for jordan-corner.
    Complex parameter{};
    // Distinct values for diagonal, symbol coefficients for toeplitz.
    std::vector<Complex> values;

    static Structure zero() { return {StructureKind::Zero, {}, {}}; }
    static Structure scalar(Complex c) { return {StructureKind::Scalar, c, {}}; }
    static Structure diagonal(std::vector<Complex> values) { return {StructureKind::Diagonal, {}, std::move(values)}; }
    static Structure jordan() { return {StructureKind::Jordan, {}, {}}; }
    static Structure jordan_corner(Complex rho) { return {StructureKind::JordanCorner, rho, {}}; }
    static Structure toeplitz(std::vector<Complex> coeffs) { return {StructureKind::Toeplitz, {}, std::move(coeffs)}; }

    friend bool operator==(const Structure&, const Structure&) = default;
};

// Text form used by configs and reports, e.g. "toeplitz(3,2,1)" or "jordan-corner(2+3i)".
std::string to_string(const Structure& s);
// Inverse of to_string; throws InvalidArgument on malformed text.
Structure parse_structure(std::string_view text);

// Complex literal: "2", "-4", "1e-6", "3i", "-i", "2+3i", "1.5-0.5i".
Complex parse_complex(std::string_view text);
// Shortest round-trip text of a complex number in the same syntax.
std::string format_complex(Complex z);

// Diagonal entries of T for the diagonal-like structures (zero, scalar, diagonal).
std::vector<Complex> diagonal_entries(const Structure& s, std::size_t d);

// Default solver: jordan-poly for jordan, dense-qr for jordan-corner,
// resolvent-aberth otherwise.
SolverKind default_solver(StructureKind kind);

// Whether `solver` can handle `kind` (jordan-poly only handles jordan;
// resolvent-aberth needs an upper-triangular T).
bool solver_supports(SolverKind solver, StructureKind kind);

struct ExperimentConfig {
    Structure structure = Structure::jordan();
    std::size_t d = 100;
    double eps = 2.0;
    // 0 selects the default: 1000 for d <= 256, 100 above.
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    // Empty selects default_solver(structure.kind).
    std::optional<SolverKind> solver;
    // Region radius delta; empty selects auto_delta(structure, d).
    std::optional<double> delta;
    // Exclusion radius tau for general symbols; empty selects eps.
    std::optional<double> tau;
};

// Default trial count for a dimension.
std::size_t default_trials(std::size_t d);

// Checks the configuration and fills every defaulted field. Throws
// InvalidArgument (or DimensionMismatch for deg p >= d) when invalid.
ExperimentConfig resolve(const ExperimentConfig& cfg);

// Unperturbed matrix, as a triangular matrix when the structure is triangular.
std::optional<UpperTriangularMatrix> triangular_matrix(const Structure& s, std::size_t d);
ComplexMatrix dense_matrix(const Structure& s, std::size_t d);

// Calibrated region radius: the frozen d = 100 pilot deviation for the
// structure class, scaled by sqrt(100 / d). For diagonal-like structures the
// result is clamped to half the separation radius of the centers.
double auto_delta(const Structure& s, std::size_t d);

// Concentration region of a structure together with its deviation metric.
//   zero, scalar, diagonal   DiskUnion over the distinct diagonal values;
//                            deviation = distance to the nearest center
//   jordan                   Annulus(0, delta); deviation = ||l| - 1|
//   jordan-corner(rho)       Annulus(0, delta, |rho|^{1/d}) (radius 1 for rho = 0);
//                            deviation = ||l| - r| / r
//   toeplitz, binomial p     SymbolBand(p, delta); deviation = band deviation
//   toeplitz, general p      SymbolBand(p, delta) union ExclusionSet(p, tau)
class TheoremRegion {
public:
    TheoremRegion(const Structure& s, std::size_t d, double delta, double tau);

    const Region& primary() const noexcept { return primary_; }
    const std::optional<ExclusionSet>& exclusion() const noexcept { return exclusion_; }

    double deviation(Complex lambda) const;
    bool in_primary(Complex lambda) const;
    bool in_exclusion(Complex lambda) const;
    bool contains(Complex lambda) const { return in_primary(lambda) || in_exclusion(lambda); }

private:
    Region primary_;
    std::optional<ExclusionSet> exclusion_;
    double scale_ = 1.0;
};

struct TrialRecord {
    std::size_t index = 0;
    Spectrum spectrum;
    bool failed = false;
    std::string error;
    // All eigenvalues lie in the region.
    bool contained = false;
    double max_deviation = 0.0;
    std::vector<double> deviations;
    std::size_t eigenvalues_contained = 0;
    // Eigenvalues inside the region only through the exclusion set.
    std::size_t rescued = 0;
    // sum(l) - trace(T), which equals c v†u exactly.
    Complex trace_shift{};
};

struct Quantiles {
    double q50 = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
    double q999 = 0.0;
    double max = 0.0;
};

Quantiles quantiles_of(std::vector<double> values);

struct ConcentrationReport {
    ExperimentConfig config;  // resolved
    std::size_t completed_trials = 0;
    std::size_t failed_trials = 0;
    // Fractions over completed trials and over their eigenvalues.
    double containment_fraction = 0.0;
    double eigenvalue_containment_fraction = 0.0;
    double rescued_fraction = 0.0;
    // Of the per-trial max-deviation.
    Quantiles deviation;
    // Of every eigenvalue deviation.
    Quantiles eigenvalue_deviation;
    Complex trace_shift_mean{};
    // Sample variance of the complex trace shift, E|z - mean|^2.
    double trace_shift_variance = 0.0;
    double max_residual = 0.0;
    double wall_seconds = 0.0;
    std::vector<TrialRecord> records;
};

struct ExecutionOptions {
    // 0 resolves through resolve_thread_count.
    std::size_t threads = 0;
};

// One trial: stream `index` of the config seed draws (u, v), the configured
// solver computes the spectrum, and the region classifies it.
TrialRecord run_trial(const ExperimentConfig& resolved, const TheoremRegion& region, std::size_t index);

// Throws TrialFailureCap when failed exceeds 1% of total.
void check_failure_cap(std::size_t failed, std::size_t total);

// Runs every trial (in parallel, gathered in index order) and summarizes.
// Throws TrialFailureCap when more than 1% of the trials fail.
ConcentrationReport run_experiment(const ExperimentConfig& cfg, const ExecutionOptions& exec = {});

struct ScalingPoint {
    std::size_t d = 0;
    double median_deviation = 0.0;
    double q90_deviation = 0.0;
};

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<ScalingPoint> points;
};

// Median per-trial max-deviation at every dimension and the least-squares
// line through (log d, log median). Requires at least three dimensions, each
// at least 16.
ScalingFit scaling_fit(const Structure& structure, const std::vector<std::size_t>& dims, double eps,
                       std::size_t trials, std::uint64_t seed, const ExecutionOptions& exec = {});

struct OracleCheckRow {
    std::string structure;
    std::size_t trials = 0;
    // Largest spectrum_match_distance / (1 + max|l|) seen.
    double max_relative_distance = 0.0;
    double max_distance = 0.0;
    bool pass = true;
};

struct OracleCheckReport {
    std::vector<OracleCheckRow> rows;
    bool pass = true;
};

struct OracleCheckOptions {
    std::size_t d_max = 50;
    std::size_t trials = 200;
    std::uint64_t seed = 0;
    double tolerance = 1e-8;
    // Negative control: shifts every fast-path eigenvalue by 1e-6.
    bool corrupt_fast_path = false;
};

// Fast path against dense QR over jordan, diagonal(2,3) and toeplitz(3,2,1).
// Trial i uses structure i mod 3 and a dimension drawn from [min(5, d_max),
// d_max]; trials whose dimension is too small for the structure are skipped
// and a fast-path convergence failure counts as an infinite distance.
// Requires 1 <= d_max <= 100.
OracleCheckReport oracle_check(const OracleCheckOptions& options, const ExecutionOptions& exec = {});

}  // namespace pseudoscope
