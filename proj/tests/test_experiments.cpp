#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/experiments.hpp"

using namespace pseudoscope;

namespace {

ExperimentConfig config(Structure s, std::size_t d, std::size_t trials, std::uint64_t seed = 11) {
    ExperimentConfig cfg;
    cfg.structure = std::move(s);
    cfg.d = d;
    cfg.eps = 2.0;
    cfg.trials = trials;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(ComplexLiteral, ParsesEveryForm) {
    EXPECT_EQ(parse_complex("2"), Complex(2.0, 0.0));
    EXPECT_EQ(parse_complex("-4"), Complex(-4.0, 0.0));
    EXPECT_EQ(parse_complex("1e-6"), Complex(1e-6, 0.0));
    EXPECT_EQ(parse_complex("3i"), Complex(0.0, 3.0));
    EXPECT_EQ(parse_complex("-i"), Complex(0.0, -1.0));
    EXPECT_EQ(parse_complex("i"), Complex(0.0, 1.0));
    EXPECT_EQ(parse_complex("2+3i"), Complex(2.0, 3.0));
    EXPECT_EQ(parse_complex(" 1.5-0.5i "), Complex(1.5, -0.5));
    EXPECT_EQ(parse_complex("1e-3+2e+2i"), Complex(1e-3, 2e2));
    EXPECT_EQ(parse_complex("-1e-3-2e-2i"), Complex(-1e-3, -2e-2));
    EXPECT_THROW(parse_complex("2+"), InvalidArgument);
    EXPECT_THROW(parse_complex("abc"), InvalidArgument);
    EXPECT_THROW(parse_complex(""), InvalidArgument);
}

TEST(ComplexLiteral, FormatRoundTrips) {
    for (const Complex z : {Complex(0.1, -0.3), Complex(0.0, 1.0), Complex(-2.0, 0.0), Complex(1e-300, 7e200),
                            Complex(0.0, -1e-6), Complex(0.0, 0.0)}) {
        EXPECT_EQ(parse_complex(format_complex(z)), z) << format_complex(z);
    }
    EXPECT_EQ(format_complex(Complex(2.0, 3.0)), "2+3i");
    EXPECT_EQ(format_complex(Complex(0.0, -1.0)), "-1i");
}

TEST(StructureText, RoundTripsAllKinds) {
    for (const char* text : {"zero", "scalar(2-1i)", "diagonal(2,3)", "jordan", "jordan-corner(2+3i)",
                             "toeplitz(3,2,1)", "toeplitz(0,0.5)"}) {
        EXPECT_EQ(to_string(parse_structure(text)), text);
    }
    EXPECT_EQ(parse_structure(" toeplitz( 3 , 2 ) "), Structure::toeplitz({3.0, 2.0}));
    EXPECT_EQ(parse_structure("jordan()"), Structure::jordan());
}

TEST(StructureText, RejectsMalformedInput) {
    EXPECT_THROW(parse_structure("circulant"), InvalidArgument);
    EXPECT_THROW(parse_structure("scalar"), InvalidArgument);
    EXPECT_THROW(parse_structure("scalar(1,2)"), InvalidArgument);
    EXPECT_THROW(parse_structure("diagonal(2,,3)"), InvalidArgument);
    EXPECT_THROW(parse_structure("toeplitz(3,0)"), InvalidArgument);
    EXPECT_THROW(parse_structure("toeplitz(3)"), InvalidArgument);
    EXPECT_THROW(parse_structure("jordan(1)"), InvalidArgument);
    EXPECT_THROW(parse_structure("toeplitz(3,2"), InvalidArgument);
}

TEST(StructureMatrices, DiagonalBlocksAndTriangularForms) {
    const auto e = diagonal_entries(Structure::diagonal({2.0, 3.0}), 6);
    EXPECT_EQ(e, (std::vector<Complex>{2.0, 2.0, 2.0, 3.0, 3.0, 3.0}));
    const auto odd = diagonal_entries(Structure::diagonal({1.0, 2.0, 3.0}), 7);
    EXPECT_EQ(odd, (std::vector<Complex>{1.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0}));
    EXPECT_EQ(diagonal_entries(Structure::scalar(4.0), 3), (std::vector<Complex>(3, 4.0)));
    EXPECT_FALSE(triangular_matrix(Structure::jordan_corner(1.0), 4).has_value());
    EXPECT_EQ(dense_matrix(Structure::jordan_corner(5.0), 3)(2, 0), Complex(5.0));
    EXPECT_EQ(triangular_matrix(Structure::toeplitz({3.0, 2.0}), 4)->superdiagonal(1)[0], Complex(2.0));
}

TEST(ExperimentConfigResolve, FillsDefaults) {
    ExperimentConfig cfg;
    cfg.structure = Structure::jordan();
    cfg.d = 256;
    const auto small = resolve(cfg);
    EXPECT_EQ(small.trials, 1000u);
    EXPECT_EQ(*small.solver, SolverKind::JordanPoly);
    EXPECT_EQ(*small.tau, 2.0);
    EXPECT_NEAR(*small.delta, auto_delta(Structure::jordan(), 256), 0.0);
    cfg.d = 257;
    EXPECT_EQ(resolve(cfg).trials, 100u);
    EXPECT_EQ(*resolve(config(Structure::toeplitz({3.0, 2.0}), 10, 1)).solver, SolverKind::ResolventAberth);
    EXPECT_EQ(*resolve(config(Structure::jordan_corner(1.0), 10, 1)).solver, SolverKind::DenseQr);
}

TEST(ExperimentConfigResolve, RejectsInvalidConfigs) {
    auto cfg = config(Structure::toeplitz({3.0, 2.0, 1.0}), 2, 1);
    EXPECT_THROW(resolve(cfg), DimensionMismatch);
    cfg = config(Structure::diagonal({2.0, 3.0}), 10, 1);
    cfg.solver = SolverKind::JordanPoly;
    EXPECT_THROW(resolve(cfg), InvalidArgument);
    cfg = config(Structure::jordan_corner(1.0), 10, 1);
    cfg.solver = SolverKind::ResolventAberth;
    EXPECT_THROW(resolve(cfg), InvalidArgument);
    cfg = config(Structure::jordan(), 10, 1);
    cfg.eps = 0.0;
    EXPECT_THROW(resolve(cfg), InvalidArgument);
    cfg.eps = 2.0;
    cfg.d = 0;
    EXPECT_THROW(resolve(cfg), InvalidArgument);
    cfg = config(Structure::diagonal({1.0, 2.0, 3.0}), 2, 1);
    EXPECT_THROW(resolve(cfg), InvalidArgument);
}

TEST(AutoDelta, ScalesLikeInverseRootAndRespectsConstraints) {
    const double j100 = auto_delta(Structure::jordan(), 100);
    EXPECT_NEAR(auto_delta(Structure::jordan(), 400), j100 / 2.0, 1e-15);
    // Disjointness: never beyond half the gap between 2 and 3.
    EXPECT_LE(auto_delta(Structure::diagonal({2.0, 3.0}), 16), 0.5);
    EXPECT_LT(auto_delta(Structure::toeplitz({3.0, 2.0}), 16), 1.0);
}

TEST(TheoremRegionTest, RegionPerStructure) {
    const TheoremRegion band(Structure::toeplitz({3.0, 2.0}), 50, 0.1, 2.0);
    EXPECT_FALSE(band.exclusion().has_value());
    EXPECT_TRUE(band.contains(3.0 + 2.05));
    EXPECT_NEAR(band.deviation(3.0 + 2.0 * 1.05), 0.05, 1e-12);

    const TheoremRegion general(Structure::toeplitz({3.0, 2.0, 1.0}), 50, 0.1, 2.0);
    ASSERT_TRUE(general.exclusion().has_value());
    // p(-1) = 2 is the critical value; 2.5 is inside S_p(2) but far from the band.
    EXPECT_TRUE(general.in_exclusion(2.5));
    EXPECT_FALSE(general.in_exclusion(6.0));

    const TheoremRegion corner(Structure::jordan_corner(16.0), 4, 0.1, 2.0);
    EXPECT_NEAR(corner.deviation(2.2), 0.1, 1e-12);  // radius 16^{1/4} = 2
    EXPECT_TRUE(corner.contains(Complex(0.0, 2.1)));

    const TheoremRegion disks(Structure::diagonal({2.0, 3.0}), 10, 0.3, 2.0);
    EXPECT_NEAR(disks.deviation(2.8), 0.2, 1e-12);
    EXPECT_FALSE(disks.contains(2.5));
    EXPECT_THROW(TheoremRegion(Structure::diagonal({2.0, 3.0}), 10, 0.6, 2.0), InvalidArgument);
}

TEST(FailureCap, OnePercentBoundary) {
    EXPECT_NO_THROW(check_failure_cap(0, 1));
    EXPECT_NO_THROW(check_failure_cap(1, 100));
    EXPECT_NO_THROW(check_failure_cap(10, 1000));
    EXPECT_THROW(check_failure_cap(2, 100), TrialFailureCap);
    EXPECT_THROW(check_failure_cap(1, 99), TrialFailureCap);
    try {
        check_failure_cap(11, 1000);
        FAIL();
    } catch (const TrialFailureCap& e) {
        EXPECT_EQ(e.failed(), 11u);
        EXPECT_EQ(e.total(), 1000u);
    }
}

TEST(QuantilesOf, MonotoneInLevel) {
    std::vector<double> x;
    for (int i = 0; i < 1000; ++i) {
        x.push_back(std::fmod(i * 0.618, 1.0));
    }
    const Quantiles q = quantiles_of(x);
    EXPECT_LE(q.q50, q.q90);
    EXPECT_LE(q.q90, q.q99);
    EXPECT_LE(q.q99, q.q999);
    EXPECT_LE(q.q999, q.max);
    EXPECT_TRUE(std::isnan(quantiles_of({}).q50));
}

TEST(RunExperiment, ZeroMatrixCloudHasCltSpread) {
    // The nonzero eigenvalue is c v†u ~ CN(0, eps^2 / d): std 0.2 at d = 100.
    const auto r = run_experiment(config(Structure::zero(), 100, 1000));
    EXPECT_EQ(r.completed_trials, 1000u);
    EXPECT_NEAR(std::sqrt(r.trace_shift_variance), 0.2, 0.02);
    for (const auto& rec : r.records) {
        const auto zeros = std::count(rec.spectrum.eigenvalues.begin(), rec.spectrum.eigenvalues.end(), Complex{});
        ASSERT_EQ(zeros, 99);
    }
}

TEST(RunExperiment, JordanCloudIsAnnular) {
    auto cfg = config(Structure::jordan(), 100, 100);
    cfg.delta = 0.35;
    const auto r = run_experiment(cfg);
    EXPECT_GT(r.eigenvalue_containment_fraction, 0.95);
    EXPECT_LT(r.eigenvalue_deviation.q50, 0.1);
    EXPECT_GE(r.containment_fraction, 0.0);
    EXPECT_LE(r.containment_fraction, 1.0);
    EXPECT_LE(r.deviation.q50, r.deviation.q90);
    EXPECT_LE(r.deviation.q90, r.deviation.q99);
    EXPECT_LE(r.deviation.q99, r.deviation.max);
}

TEST(RunExperiment, QuadraticSymbolCloudHugsCurve) {
    auto cfg = config(Structure::toeplitz({3.0, 2.0, 1.0}), 100, 50);
    cfg.delta = 0.35;
    const auto r = run_experiment(cfg);
    EXPECT_GT(r.eigenvalue_containment_fraction, 0.95);
    EXPECT_LE(r.rescued_fraction, 0.05);
    EXPECT_EQ(r.failed_trials, 0u);
}

TEST(RunExperiment, TwoValuedDiagonalClusters) {
    const auto r = run_experiment(config(Structure::diagonal({2.0, 3.0}), 100, 200));
    for (const auto& rec : r.records) {
        const auto twos = std::count(rec.spectrum.eigenvalues.begin(), rec.spectrum.eigenvalues.end(), Complex(2.0));
        const auto threes = std::count(rec.spectrum.eigenvalues.begin(), rec.spectrum.eigenvalues.end(), Complex(3.0));
        ASSERT_EQ(twos, 49);
        ASSERT_EQ(threes, 49);
    }
    EXPECT_GT(r.containment_fraction, 0.9);
}

TEST(RunExperiment, TraceShiftEqualsPerturbationEigenvalue) {
    const auto r = run_experiment(config(Structure::toeplitz({3.0, 2.0}), 30, 20));
    for (const auto& rec : r.records) {
        // The sum of the eigenvalues equals trace(T) + c v†u.
        EXPECT_LT(std::abs(rec.trace_shift), 2.0 * 6.0);
    }
    const auto corner = run_experiment(config(Structure::jordan_corner(1.0), 12, 20));
    EXPECT_EQ(corner.failed_trials, 0u);
    EXPECT_EQ(*corner.config.solver, SolverKind::DenseQr);
}

TEST(RunExperiment, BitIdenticalAcrossWorkerCounts) {
    const auto cfg = config(Structure::toeplitz({3.0, 2.0, 1.0}), 40, 24, 99);
    const auto a = run_experiment(cfg, {.threads = 1});
    const auto b = run_experiment(cfg, {.threads = 4});
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        ASSERT_EQ(a.records[i].spectrum.eigenvalues, b.records[i].spectrum.eigenvalues);
        ASSERT_EQ(a.records[i].max_deviation, b.records[i].max_deviation);
    }
    EXPECT_EQ(a.deviation.q50, b.deviation.q50);
}

TEST(RunExperiment, WideningRegionNeverLowersContainment) {
    double last = -1.0;
    for (double delta : {0.05, 0.2, 0.8}) {
        auto cfg = config(Structure::jordan(), 100, 100);
        cfg.delta = delta;
        const auto r = run_experiment(cfg);
        EXPECT_GE(r.containment_fraction, last);
        EXPECT_GE(r.eigenvalue_containment_fraction, 0.0);
        last = r.containment_fraction;
    }
}

TEST(ScalingFitTest, ValidatesDimensions) {
    EXPECT_THROW(scaling_fit(Structure::zero(), {}, 2.0, 10, 1), InvalidArgument);
    EXPECT_THROW(scaling_fit(Structure::zero(), {64}, 2.0, 10, 1), InvalidArgument);
    EXPECT_THROW(scaling_fit(Structure::zero(), {64, 128}, 2.0, 10, 1), InvalidArgument);
    EXPECT_THROW(scaling_fit(Structure::zero(), {8, 64, 128}, 2.0, 10, 1), InvalidArgument);
}

TEST(ScalingFitTest, ScalarCaseHasCltExponent) {
    const auto fit = scaling_fit(Structure::scalar(0.0), {64, 128, 256, 512}, 2.0, 200, 3);
    EXPECT_GE(fit.slope, -0.6);
    EXPECT_LE(fit.slope, -0.4);
    ASSERT_EQ(fit.points.size(), 4u);
    EXPECT_LT(fit.points[3].median_deviation, fit.points[0].median_deviation);
}

TEST(ScalingFitTest, TwoValuedDiagonalExponent) {
    const auto fit = scaling_fit(Structure::diagonal({2.0, 3.0}), {64, 128, 256, 512}, 2.0, 200, 3);
    EXPECT_GE(fit.slope, -0.65);
    EXPECT_LE(fit.slope, -0.35);
}

TEST(OracleCheck, PassesAndCatchesCorruption) {
    OracleCheckOptions options;
    options.trials = 30;
    options.d_max = 30;
    const auto ok = oracle_check(options);
    EXPECT_TRUE(ok.pass);
    ASSERT_EQ(ok.rows.size(), 3u);
    for (const auto& row : ok.rows) {
        EXPECT_EQ(row.trials, 10u);
        EXPECT_LE(row.max_relative_distance, 1e-8);
    }
    options.corrupt_fast_path = true;
    EXPECT_FALSE(oracle_check(options).pass);
}

TEST(OracleCheck, TinyAndOversizedLimits) {
    OracleCheckOptions options;
    options.d_max = 1;
    options.trials = 9;
    const auto tiny = oracle_check(options);
    EXPECT_TRUE(tiny.pass);
    EXPECT_EQ(tiny.rows[2].trials, 0u);  // toeplitz(3,2,1) needs d >= 3
    options.d_max = 101;
    EXPECT_THROW(oracle_check(options), InvalidArgument);
    options.d_max = 0;
    EXPECT_THROW(oracle_check(options), InvalidArgument);
}
