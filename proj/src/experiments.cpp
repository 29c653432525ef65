#include "pseudoscope/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/parallel.hpp"
#include "pseudoscope/rng.hpp"
#include "pseudoscope/sampling.hpp"
#include "pseudoscope/stats.hpp"
#include "pseudoscope/text.hpp"

namespace pseudoscope {

namespace {

// 99th percentile of the per-trial max-deviation at d = 100, eps = 2,
// N = 1000, seed 1 (tools/pilot.cpp, tests/fixtures/pilot_d100.csv), rounded up.
constexpr double kPilotSingleCenter = 0.426;  // zero
constexpr double kPilotDiagonal = 0.344;      // diagonal(2,3)
constexpr double kPilotJordan = 0.926;        // jordan; toeplitz(3,2) and (3,2,1) agree
constexpr std::size_t kPilotDimension = 100;
// SymbolBand needs delta < 1.
constexpr double kMaxBandDelta = 0.99;

std::string join_complex(const std::vector<Complex>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? "," : "") + format_complex(values[i]);
    }
    return out;
}

std::vector<Complex> parse_complex_list(std::string_view body, std::string_view what) {
    std::vector<Complex> out;
    for (std::string_view piece : text::split(body, ',')) {
        if (piece.empty()) {
            throw InvalidArgument(std::string(what) + ": empty entry in '" + std::string(body) + "'");
        }
        out.push_back(parse_complex(piece));
    }
    if (out.empty()) {
        throw InvalidArgument(std::string(what) + ": needs at least one value");
    }
    return out;
}

std::vector<Complex> distinct(std::vector<Complex> values) {
    std::set<std::pair<double, double>> seen;
    std::vector<Complex> out;
    for (const Complex& z : values) {
        if (seen.insert({z.real(), z.imag()}).second) {
            out.push_back(z);
        }
    }
    return out;
}

double corner_radius(Complex rho, std::size_t d) {
    return rho == Complex{} ? 1.0 : std::pow(std::abs(rho), 1.0 / static_cast<double>(d));
}

Spectrum solve(const ExperimentConfig& cfg, const RankOnePerturbation& p) {
    switch (*cfg.solver) {
    case SolverKind::JordanPoly:
        return poly_roots(charpoly_jordan_rank1(p));
    case SolverKind::ResolventAberth:
        return eigen_resolvent_aberth(*triangular_matrix(cfg.structure, cfg.d), p);
    case SolverKind::DenseQr:
        break;
    }
    return dense_eigenvalues(apply_perturbation(dense_matrix(cfg.structure, cfg.d), p));
}

Complex unperturbed_trace(const Structure& s, std::size_t d) {
    if (const auto t = triangular_matrix(s, d)) {
        return t->trace();
    }
    return dense_matrix(s, d).trace();
}

}  // namespace

// ---------------------------------------------------------------------------
// Text forms

Complex parse_complex(std::string_view raw) {
    const std::string_view s = text::trim(raw);
    if (s.empty()) {
        throw InvalidArgument("empty complex literal");
    }
    try {
        if (s.back() != 'i') {
            return {text::parse_double(s), 0.0};
        }
        const std::string_view body = s.substr(0, s.size() - 1);
        // Split before the last sign that is neither leading nor an exponent sign.
        std::size_t split = std::string_view::npos;
        for (std::size_t k = body.size(); k-- > 1;) {
            if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
                split = k;
                break;
            }
        }
        const std::string_view re = split == std::string_view::npos ? std::string_view{} : body.substr(0, split);
        const std::string_view im = split == std::string_view::npos ? body : body.substr(split);
        const double im_value = im.empty() || im == "+" ? 1.0 : im == "-" ? -1.0 : text::parse_double(im);
        return {re.empty() ? 0.0 : text::parse_double(re), im_value};
    } catch (const InvalidArgument&) {
        throw InvalidArgument("malformed complex literal '" + std::string(s) + "'");
    }
}

std::string format_complex(Complex z) {
    if (z.imag() == 0.0) {
        return text::format_double(z.real());
    }
    const std::string im = text::format_double(std::abs(z.imag())) + "i";
    if (z.real() == 0.0) {
        return (z.imag() < 0.0 ? "-" : "") + im;
    }
    return text::format_double(z.real()) + (z.imag() < 0.0 ? "-" : "+") + im;
}

std::string to_string(const Structure& s) {
    switch (s.kind) {
    case StructureKind::Zero:
        return "zero";
    case StructureKind::Scalar:
        return "scalar(" + format_complex(s.parameter) + ")";
    case StructureKind::Diagonal:
        return "diagonal(" + join_complex(s.values) + ")";
    case StructureKind::Jordan:
        return "jordan";
    case StructureKind::JordanCorner:
        return "jordan-corner(" + format_complex(s.parameter) + ")";
    case StructureKind::Toeplitz:
        return "toeplitz(" + join_complex(s.values) + ")";
    }
    return "unknown";
}

Structure parse_structure(std::string_view raw) {
    const std::string_view s = text::trim(raw);
    const auto open = s.find('(');
    const std::string_view name = text::trim(s.substr(0, open));
    std::string_view args;
    bool has_args = false;
    if (open != std::string_view::npos) {
        if (s.back() != ')') {
            throw InvalidArgument("structure '" + std::string(s) + "': missing closing parenthesis");
        }
        args = text::trim(s.substr(open + 1, s.size() - open - 2));
        has_args = true;
    }
    auto no_args = [&](Structure out) {
        if (has_args && !args.empty()) {
            throw InvalidArgument("structure '" + std::string(name) + "' takes no arguments");
        }
        return out;
    };
    auto one_arg = [&]() {
        if (!has_args) {
            throw InvalidArgument("structure '" + std::string(name) + "' needs an argument");
        }
        const auto values = parse_complex_list(args, name);
        if (values.size() != 1) {
            throw InvalidArgument("structure '" + std::string(name) + "' takes exactly one argument");
        }
        return values.front();
    };
    if (name == "zero") {
        return no_args(Structure::zero());
    }
    if (name == "jordan") {
        return no_args(Structure::jordan());
    }
    if (name == "scalar") {
        return Structure::scalar(one_arg());
    }
    if (name == "jordan-corner") {
        return Structure::jordan_corner(one_arg());
    }
    if (name == "diagonal") {
        if (!has_args) {
            throw InvalidArgument("structure 'diagonal' needs its values");
        }
        return Structure::diagonal(parse_complex_list(args, name));
    }
    if (name == "toeplitz") {
        if (!has_args) {
            throw InvalidArgument("structure 'toeplitz' needs symbol coefficients");
        }
        auto coeffs = parse_complex_list(args, name);
        PolySymbol check(coeffs);  // validates degree and leading coefficient
        return Structure::toeplitz(std::move(coeffs));
    }
    throw InvalidArgument("unknown structure '" + std::string(name) +
                          "' (expected zero, scalar(C), diagonal(...), jordan, jordan-corner(rho), toeplitz(...))");
}

// ---------------------------------------------------------------------------
// Matrices and configuration

std::vector<Complex> diagonal_entries(const Structure& s, std::size_t d) {
    switch (s.kind) {
    case StructureKind::Zero:
        return std::vector<Complex>(d);
    case StructureKind::Scalar:
        return std::vector<Complex>(d, s.parameter);
    case StructureKind::Diagonal: {
        const std::size_t m = s.values.size();
        if (m == 0 || m > d) {
            throw InvalidArgument("diagonal: needs between 1 and d values");
        }
        std::vector<Complex> out;
        out.reserve(d);
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t block = d / m + (j < d % m ? 1 : 0);
            out.insert(out.end(), block, s.values[j]);
        }
        return out;
    }
    default:
        throw InvalidArgument("diagonal_entries: structure '" + to_string(s) + "' is not diagonal");
    }
}

SolverKind default_solver(StructureKind kind) {
    switch (kind) {
    case StructureKind::Jordan:
        return SolverKind::JordanPoly;
    case StructureKind::JordanCorner:
        return SolverKind::DenseQr;
    default:
        return SolverKind::ResolventAberth;
    }
}

bool solver_supports(SolverKind solver, StructureKind kind) {
    switch (solver) {
    case SolverKind::JordanPoly:
        return kind == StructureKind::Jordan;
    case SolverKind::ResolventAberth:
        return kind != StructureKind::JordanCorner;
    case SolverKind::DenseQr:
        return true;
    }
    return false;
}

std::size_t default_trials(std::size_t d) { return d <= 256 ? 1000 : 100; }

std::optional<UpperTriangularMatrix> triangular_matrix(const Structure& s, std::size_t d) {
    switch (s.kind) {
    case StructureKind::Zero:
    case StructureKind::Scalar:
    case StructureKind::Diagonal: {
        const auto diag = diagonal_entries(s, d);
        return UpperTriangularMatrix::from_diagonal(diag);
    }
    case StructureKind::Jordan:
        return jordan_nilpotent(d);
    case StructureKind::Toeplitz:
        return toeplitz_from_symbol(PolySymbol(s.values), d);
    case StructureKind::JordanCorner:
        return std::nullopt;
    }
    return std::nullopt;
}

ComplexMatrix dense_matrix(const Structure& s, std::size_t d) {
    if (s.kind == StructureKind::JordanCorner) {
        return jordan_corner(d, s.parameter);
    }
    return triangular_matrix(s, d)->dense();
}

double auto_delta(const Structure& s, std::size_t d) {
    const double scale = std::sqrt(static_cast<double>(kPilotDimension) / static_cast<double>(d));
    switch (s.kind) {
    case StructureKind::Zero:
    case StructureKind::Scalar:
        return kPilotSingleCenter * scale;
    case StructureKind::Diagonal: {
        const auto centers = distinct(diagonal_entries(s, d));
        const double pilot = centers.size() == 1 ? kPilotSingleCenter : kPilotDiagonal;
        return std::min(pilot * scale, separation_radius(centers));
    }
    case StructureKind::Jordan:
    case StructureKind::JordanCorner:
        return kPilotJordan * scale;
    case StructureKind::Toeplitz:
        return std::min(kPilotJordan * scale, kMaxBandDelta);
    }
    return kPilotJordan * scale;
}

ExperimentConfig resolve(const ExperimentConfig& cfg) {
    ExperimentConfig out = cfg;
    if (out.d == 0) {
        throw InvalidArgument("d must be at least 1");
    }
    if (!(out.eps > 0.0) || !std::isfinite(out.eps)) {
        throw InvalidArgument("eps must be a positive finite number");
    }
    switch (out.structure.kind) {
    case StructureKind::Diagonal:
        if (out.structure.values.empty() || out.structure.values.size() > out.d) {
            throw InvalidArgument("diagonal needs between 1 and d = " + std::to_string(out.d) + " values");
        }
        break;
    case StructureKind::Toeplitz: {
        const PolySymbol p(out.structure.values);
        if (p.degree() >= out.d) {
            throw DimensionMismatch("toeplitz symbol degree " + std::to_string(p.degree()) +
                                    " must be below d = " + std::to_string(out.d));
        }
        break;
    }
    default:
        break;
    }
    if (out.trials == 0) {
        out.trials = default_trials(out.d);
    }
    if (!out.solver) {
        out.solver = default_solver(out.structure.kind);
    }
    if (!solver_supports(*out.solver, out.structure.kind)) {
        throw InvalidArgument("solver " + std::string(to_string(*out.solver)) + " cannot handle structure " +
                              to_string(out.structure));
    }
    if (!out.delta) {
        out.delta = auto_delta(out.structure, out.d);
    }
    if (!(*out.delta > 0.0) || !std::isfinite(*out.delta)) {
        throw InvalidArgument("region radius must be a positive finite number");
    }
    if (!out.tau) {
        out.tau = out.eps;
    }
    if (!(*out.tau > 0.0) || !std::isfinite(*out.tau)) {
        throw InvalidArgument("tau must be a positive finite number");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regions

namespace {

Region make_primary(const Structure& s, std::size_t d, double delta) {
    switch (s.kind) {
    case StructureKind::Zero:
    case StructureKind::Scalar:
    case StructureKind::Diagonal:
        return DiskUnion(distinct(diagonal_entries(s, d)), delta);
    case StructureKind::Jordan:
        return Annulus(0.0, delta);
    case StructureKind::JordanCorner:
        return Annulus(0.0, delta, corner_radius(s.parameter, d));
    case StructureKind::Toeplitz:
        return SymbolBand(PolySymbol(s.values), delta);
    }
    return Annulus(0.0, delta);
}

}  // namespace

TheoremRegion::TheoremRegion(const Structure& s, std::size_t d, double delta, double tau)
    : primary_(make_primary(s, d, delta)) {
    if (s.kind == StructureKind::JordanCorner) {
        scale_ = corner_radius(s.parameter, d);
    }
    if (s.kind == StructureKind::Toeplitz) {
        const PolySymbol p(s.values);
        if (!p.is_binomial()) {
            exclusion_ = ExclusionSet::for_symbol(p, tau);
        }
    }
}

double TheoremRegion::deviation(Complex lambda) const {
    return std::visit(
        [&](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, Annulus>) {
                return r.deviation(lambda) / scale_;
            } else if constexpr (std::is_same_v<R, ExclusionSet>) {
                return r.contains(lambda) ? 0.0 : std::numeric_limits<double>::infinity();
            } else {
                return r.deviation(lambda);
            }
        },
        primary_);
}

bool TheoremRegion::in_primary(Complex lambda) const { return region_contains(primary_, lambda); }

bool TheoremRegion::in_exclusion(Complex lambda) const { return exclusion_ && exclusion_->contains(lambda); }

// ---------------------------------------------------------------------------
// Trials

Quantiles quantiles_of(std::vector<double> values) {
    Quantiles q;
    if (values.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan, nan, nan};
    }
    std::sort(values.begin(), values.end());
    q.q50 = stats::sorted_quantile(values, 0.5);
    q.q90 = stats::sorted_quantile(values, 0.9);
    q.q99 = stats::sorted_quantile(values, 0.99);
    q.q999 = stats::sorted_quantile(values, 0.999);
    q.max = values.back();
    return q;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const TheoremRegion& region, std::size_t index) {
    TrialRecord rec;
    rec.index = index;
    SeededRng rng(cfg.seed, index);
    try {
        const RankOnePerturbation p = rank1_perturbation(cfg.d, cfg.eps, rng);
        rec.spectrum = solve(cfg, p);
    } catch (const ConvergenceError& e) {
        rec.failed = true;
        rec.error = e.what();
        return rec;
    } catch (const NearSingularShift& e) {
        rec.failed = true;
        rec.error = e.what();
        return rec;
    }
    Complex sum{};
    rec.deviations.reserve(rec.spectrum.eigenvalues.size());
    for (const Complex& lambda : rec.spectrum.eigenvalues) {
        sum += lambda;
        const double dev = region.deviation(lambda);
        rec.deviations.push_back(dev);
        rec.max_deviation = std::max(rec.max_deviation, dev);
        const bool primary = region.in_primary(lambda);
        if (primary || region.in_exclusion(lambda)) {
            ++rec.eigenvalues_contained;
            if (!primary) {
                ++rec.rescued;
            }
        }
    }
    rec.contained = rec.eigenvalues_contained == rec.spectrum.eigenvalues.size();
    rec.trace_shift = sum - unperturbed_trace(cfg.structure, cfg.d);
    return rec;
}

void check_failure_cap(std::size_t failed, std::size_t total) {
    if (failed * 100 > total) {
        throw TrialFailureCap(std::to_string(failed) + " of " + std::to_string(total) +
                                  " trials failed (more than 1%)",
                              failed, total);
    }
}

ConcentrationReport run_experiment(const ExperimentConfig& input, const ExecutionOptions& exec) {
    ConcentrationReport report;
    report.config = resolve(input);
    const ExperimentConfig& cfg = report.config;
    const TheoremRegion region(cfg.structure, cfg.d, *cfg.delta, *cfg.tau);

    const auto start = std::chrono::steady_clock::now();
    report.records.resize(cfg.trials);
    parallel_for(cfg.trials, resolve_thread_count(exec.threads),
                 [&](std::size_t i) { report.records[i] = run_trial(cfg, region, i); });
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const TrialRecord& r : report.records) {
        report.failed_trials += r.failed ? 1 : 0;
    }
    check_failure_cap(report.failed_trials, cfg.trials);

    std::vector<double> max_devs;
    std::vector<double> all_devs;
    std::vector<Complex> shifts;
    std::size_t contained = 0;
    std::size_t eig_total = 0;
    std::size_t eig_contained = 0;
    std::size_t rescued = 0;
    for (const TrialRecord& r : report.records) {
        if (r.failed) {
            continue;
        }
        max_devs.push_back(r.max_deviation);
        all_devs.insert(all_devs.end(), r.deviations.begin(), r.deviations.end());
        shifts.push_back(r.trace_shift);
        contained += r.contained ? 1 : 0;
        eig_total += r.spectrum.eigenvalues.size();
        eig_contained += r.eigenvalues_contained;
        rescued += r.rescued;
        report.max_residual = std::max(report.max_residual, r.spectrum.residual);
    }
    report.completed_trials = max_devs.size();
    if (report.completed_trials > 0) {
        const double n = static_cast<double>(report.completed_trials);
        report.containment_fraction = static_cast<double>(contained) / n;
        report.eigenvalue_containment_fraction = static_cast<double>(eig_contained) / static_cast<double>(eig_total);
        report.rescued_fraction = static_cast<double>(rescued) / static_cast<double>(eig_total);
        for (const Complex& z : shifts) {
            report.trace_shift_mean += z;
        }
        report.trace_shift_mean /= n;
        if (shifts.size() > 1) {
            double ss = 0.0;
            for (const Complex& z : shifts) {
                ss += std::norm(z - report.trace_shift_mean);
            }
            report.trace_shift_variance = ss / (n - 1.0);
        }
    }
    report.deviation = quantiles_of(std::move(max_devs));
    report.eigenvalue_deviation = quantiles_of(std::move(all_devs));
    return report;
}

// ---------------------------------------------------------------------------
// Scaling

ScalingFit scaling_fit(const Structure& structure, const std::vector<std::size_t>& dims, double eps,
                       std::size_t trials, std::uint64_t seed, const ExecutionOptions& exec) {
    if (dims.size() < 3) {
        throw InvalidArgument("scaling_fit: needs at least three dimensions, got " + std::to_string(dims.size()));
    }
    for (std::size_t d : dims) {
        if (d < 16) {
            throw InvalidArgument("scaling_fit: every dimension must be at least 16, got " + std::to_string(d));
        }
    }
    ScalingFit fit;
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t d : dims) {
        ExperimentConfig cfg;
        cfg.structure = structure;
        cfg.d = d;
        cfg.eps = eps;
        cfg.trials = trials;
        cfg.seed = seed;
        const ConcentrationReport report = run_experiment(cfg, exec);
        ScalingPoint point;
        point.d = d;
        point.median_deviation = report.deviation.q50;
        point.q90_deviation = report.deviation.q90;
        if (!(point.median_deviation > 0.0)) {
            throw InvalidArgument("scaling_fit: median deviation at d = " + std::to_string(d) +
                                  " is not positive; the log-log fit is undefined");
        }
        fit.points.push_back(point);
        x.push_back(std::log(static_cast<double>(d)));
        y.push_back(std::log(point.median_deviation));
    }
    const stats::LinearFit line = stats::least_squares(x, y);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    return fit;
}

// ---------------------------------------------------------------------------
// Oracle check

OracleCheckReport oracle_check(const OracleCheckOptions& options, const ExecutionOptions& exec) {
    if (options.d_max == 0 || options.d_max > 100) {
        throw InvalidArgument("oracle_check: d-max must lie in [1, 100]");
    }
    const std::vector<Structure> structures = {Structure::jordan(), Structure::diagonal({2.0, 3.0}),
                                               Structure::toeplitz({3.0, 2.0, 1.0})};
    const std::size_t lo = std::min<std::size_t>(5, options.d_max);
    const std::size_t hi = options.d_max;

    struct Outcome {
        bool ran = false;
        double distance = 0.0;
        double relative = 0.0;
    };
    std::vector<Outcome> outcomes(options.trials);
    parallel_for(options.trials, resolve_thread_count(exec.threads), [&](std::size_t i) {
        const Structure& s = structures[i % structures.size()];
        SeededRng rng(options.seed, i);
        const std::size_t d = lo + static_cast<std::size_t>(rng.next_u64() % (hi - lo + 1));
        const bool too_small = (s.kind == StructureKind::Toeplitz && d <= PolySymbol(s.values).degree()) ||
                               (s.kind == StructureKind::Diagonal && d < s.values.size());
        if (too_small) {
            return;
        }
        ExperimentConfig cfg;
        cfg.structure = s;
        cfg.d = d;
        cfg.trials = 1;
        const ExperimentConfig resolved = resolve(cfg);
        const RankOnePerturbation p = rank1_perturbation(d, 2.0, rng);
        Outcome& o = outcomes[i];
        o.ran = true;
        Spectrum fast;
        try {
            fast = solve(resolved, p);
        } catch (const ConvergenceError&) {
            o.distance = o.relative = std::numeric_limits<double>::infinity();
            return;
        }
        if (options.corrupt_fast_path) {
            for (Complex& z : fast.eigenvalues) {
                z += 1e-6;
            }
        }
        const Spectrum dense =
            dense_eigenvalues(apply_perturbation(dense_matrix(s, d), p), {.probe_residual = false});
        double max_mod = 0.0;
        for (const Complex& z : dense.eigenvalues) {
            max_mod = std::max(max_mod, std::abs(z));
        }
        o.distance = spectrum_match_distance(fast, dense);
        o.relative = o.distance / (1.0 + max_mod);
    });

    OracleCheckReport report;
    for (std::size_t k = 0; k < structures.size(); ++k) {
        OracleCheckRow row;
        row.structure = to_string(structures[k]);
        for (std::size_t i = k; i < outcomes.size(); i += structures.size()) {
            if (!outcomes[i].ran) {
                continue;
            }
            ++row.trials;
            row.max_distance = std::max(row.max_distance, outcomes[i].distance);
            row.max_relative_distance = std::max(row.max_relative_distance, outcomes[i].relative);
        }
        row.pass = row.max_relative_distance <= options.tolerance;
        report.pass = report.pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace pseudoscope
