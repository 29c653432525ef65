#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pseudoscope/errors.hpp"
#include "pseudoscope/spectra.hpp"

using namespace pseudoscope;

namespace {

std::vector<Complex> roots_of_unity(std::size_t d, Complex scale = 1.0) {
    std::vector<Complex> r;
    for (std::size_t k = 0; k < d; ++k) {
        r.push_back(scale * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                                static_cast<double>(d)));
    }
    return r;
}

double max_modulus(const std::vector<Complex>& z) {
    double m = 0.0;
    for (const Complex& x : z) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

ComplexMatrix random_matrix(std::size_t d, SeededRng& rng) {
    ComplexMatrix a(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (Complex& z : a.row(i)) {
            z = rng.next_complex_normal();
        }
    }
    return a;
}

std::vector<Complex> two_valued_diagonal(std::size_t d) {
    std::vector<Complex> diag(d, 2.0);
    for (std::size_t i = d / 2; i < d; ++i) {
        diag[i] = 3.0;
    }
    return diag;
}

}  // namespace

TEST(SolverKindNames, RoundTrip) {
    for (SolverKind k : {SolverKind::JordanPoly, SolverKind::ResolventAberth, SolverKind::DenseQr}) {
        EXPECT_EQ(parse_solver_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_solver_kind("qr"), InvalidArgument);
}

TEST(Charpoly, ScalarCase) {
    const RankOnePerturbation p({Complex(1, 2)}, {Complex(-0.5, 0.25)}, 2.0);
    const MonicPolynomial c = charpoly_jordan_rank1(p);
    ASSERT_EQ(c.degree(), 1u);
    const Complex expected = 2.0 * std::conj(p.v()[0]) * p.u()[0] / (std::abs(p.u()[0]) * std::abs(p.v()[0]));
    EXPECT_LT(std::abs(c.coeffs()[0] + expected), 1e-15);
}

TEST(Charpoly, CornerSurrogateGivesRootsOfEps) {
    for (std::size_t d : {2u, 5u, 9u}) {
        ComplexVector u(d), v(d);
        u[d - 1] = 3.0;
        v[0] = Complex(0, 2.0);
        const RankOnePerturbation p(u, v, 1.7);
        // E = 1.7 e_d (-i e_1)† puts rho = 1.7 i at the corner.
        const Complex rho = 1.7 * Complex(0, -1);
        const Spectrum s = poly_roots(charpoly_jordan_rank1(p));
        EXPECT_LT(spectrum_match_distance(s.eigenvalues, oracle::eigen_eigenvalues(jordan_corner(d, rho))),
                  1e-10);
        for (const Complex& l : s.eigenvalues) {
            EXPECT_LT(std::abs(std::pow(l, static_cast<double>(d)) - rho), 1e-10 * std::abs(rho));
        }
    }
}

TEST(Charpoly, RandomRootsMatchDenseOracle) {
    SeededRng rng(20);
    for (int trial = 0; trial < 5; ++trial) {
        const RankOnePerturbation p = rank1_perturbation(20, 2.0, rng);
        const Spectrum fast = poly_roots(charpoly_jordan_rank1(p));
        const ComplexMatrix a = apply_perturbation(jordan_nilpotent(20), p);
        EXPECT_LT(spectrum_match_distance(fast, dense_eigenvalues(a)), 1e-8);
        EXPECT_LT(spectrum_match_distance(fast.eigenvalues, oracle::eigen_eigenvalues(a)), 1e-8);
    }
}

TEST(PolyRoots, SimpleCases) {
    const Spectrum s = poly_roots(MonicPolynomial({1.0, 0.0}));
    EXPECT_LT(spectrum_match_distance(s.eigenvalues, std::vector<Complex>{Complex(0, 1), Complex(0, -1)}), 1e-15);
    EXPECT_EQ(s.solver, SolverKind::JordanPoly);
    std::vector<Complex> c(12);
    c[0] = -1.0;
    const Spectrum r = poly_roots(MonicPolynomial(c));
    EXPECT_LT(spectrum_match_distance(r.eigenvalues, roots_of_unity(12)), 1e-12);
    EXPECT_LT(r.residual, 1e-14);
}

TEST(PolyRoots, DoubleAndZeroRoots) {
    // (l + 1)^2 and l^2 (l - 1).
    const Spectrum a = poly_roots(MonicPolynomial({1.0, 2.0}));
    EXPECT_LT(spectrum_match_distance(a.eigenvalues, std::vector<Complex>{-1.0, -1.0}), 1e-15);
    const Spectrum b = poly_roots(MonicPolynomial({0.0, 0.0, -1.0}));
    EXPECT_EQ(spectrum_match_distance(b.eigenvalues, std::vector<Complex>{0.0, 0.0, 1.0}), 0.0);
}

TEST(PolyRoots, WellSeparatedHighDegree) {
    // prod_{k=1}^{8} (l - k) expanded.
    std::vector<Complex> full = {1.0};
    for (int k = 1; k <= 8; ++k) {
        std::vector<Complex> next(full.size() + 1);
        for (std::size_t j = 0; j < full.size(); ++j) {
            next[j + 1] += full[j];
            next[j] -= static_cast<double>(k) * full[j];
        }
        full = next;
    }
    full.pop_back();
    const Spectrum s = poly_roots(MonicPolynomial(full));
    EXPECT_LT(spectrum_match_distance(s.eigenvalues, std::vector<Complex>{1, 2, 3, 4, 5, 6, 7, 8}), 1e-9);
}

TEST(PolyRoots, JordanCharpolyDegree100MatchesDenseOracle) {
    SeededRng rng(100);
    const RankOnePerturbation p = rank1_perturbation(100, 2.0, rng);
    const Spectrum fast = poly_roots(charpoly_jordan_rank1(p));
    const auto oracle_ev = oracle::eigen_eigenvalues(apply_perturbation(jordan_nilpotent(100), p));
    EXPECT_LT(spectrum_match_distance(fast.eigenvalues, oracle_ev), 1e-8);
}

TEST(PolyRoots, ReportsUnconvergedRoots) {
    SeededRng rng(3);
    const RankOnePerturbation p = rank1_perturbation(30, 2.0, rng);
    AberthOptions opts;
    opts.max_sweeps = 1;
    opts.polish_sweeps = 0;
    try {
        poly_roots(charpoly_jordan_rank1(p), opts);
        FAIL() << "expected RootConvergenceError";
    } catch (const RootConvergenceError& e) {
        EXPECT_EQ(e.converged().size(), 30u);
        EXPECT_NE(std::count(e.converged().begin(), e.converged().end(), false), 0);
    }
    EXPECT_THROW(poly_roots(MonicPolynomial({})), InvalidArgument);
}

TEST(ResolventAberth, VanishingPerturbationReturnsDiagonal) {
    SeededRng rng(1);
    const RankOnePerturbation p = rank1_perturbation(2, 1e-14, rng);
    const std::vector<Complex> diag = {2.0, 3.0};
    const Spectrum s = eigen_resolvent_aberth(diag, p);
    EXPECT_EQ(s.solver, SolverKind::ResolventAberth);
    EXPECT_LT(spectrum_match_distance(s.eigenvalues, diag), 1e-10);
    const Spectrum m = eigen_resolvent_aberth(two_valued_diagonal(40), rank1_perturbation(40, 1e-14, rng));
    EXPECT_LT(spectrum_match_distance(m.eigenvalues, two_valued_diagonal(40)), 1e-10);
}

TEST(ResolventAberth, TwoValuedDiagonalMatchesDenseOracle) {
    SeededRng rng(40);
    const auto diag = two_valued_diagonal(40);
    for (int trial = 0; trial < 5; ++trial) {
        const RankOnePerturbation p = rank1_perturbation(40, 2.0, rng);
        const Spectrum fast = eigen_resolvent_aberth(diag, p);
        ASSERT_EQ(fast.eigenvalues.size(), 40u);
        const auto a = apply_perturbation(ComplexMatrix::diagonal(diag), p);
        EXPECT_LT(spectrum_match_distance(fast, dense_eigenvalues(a)), 1e-8);
        EXPECT_LT(spectrum_match_distance(fast.eigenvalues, oracle::eigen_eigenvalues(a)), 1e-8);
    }
}

TEST(ResolventAberth, QuadraticToeplitzMatchesDenseOracle) {
    SeededRng rng(41);
    const auto t = toeplitz_from_symbol(PolySymbol({3.0, 2.0, 1.0}), 40);
    for (int trial = 0; trial < 5; ++trial) {
        const RankOnePerturbation p = rank1_perturbation(40, 2.0, rng);
        const Spectrum fast = eigen_resolvent_aberth(t, p);
        const auto a = apply_perturbation(t, p);
        EXPECT_LT(spectrum_match_distance(fast, dense_eigenvalues(a)), 1e-8);
        EXPECT_LT(spectrum_match_distance(fast.eigenvalues, oracle::eigen_eigenvalues(a)), 1e-8);
    }
}

TEST(ResolventAberth, DistinctDiagonalAndJordanInputs) {
    SeededRng rng(42);
    std::vector<Complex> diag(25);
    for (auto& g : diag) {
        g = rng.next_complex_normal() * 3.0;
    }
    const RankOnePerturbation p = rank1_perturbation(25, 0.5, rng);
    const Spectrum s = eigen_resolvent_aberth(diag, p);
    EXPECT_LT(spectrum_match_distance(s.eigenvalues,
                                      oracle::eigen_eigenvalues(apply_perturbation(ComplexMatrix::diagonal(diag), p))),
              1e-8);
    const RankOnePerturbation q = rank1_perturbation(30, 2.0, rng);
    const Spectrum j = eigen_resolvent_aberth(jordan_nilpotent(30), q);
    EXPECT_LT(spectrum_match_distance(j, poly_roots(charpoly_jordan_rank1(q))), 1e-8);
}

TEST(ResolventAberth, LargeDimensionToeplitzStaysFinite) {
    SeededRng rng(43);
    const auto t = toeplitz_from_symbol(PolySymbol({3.0, 2.0}), 512);
    const RankOnePerturbation p = rank1_perturbation(512, 2.0, rng);
    const Spectrum s = eigen_resolvent_aberth(t, p);
    ASSERT_EQ(s.eigenvalues.size(), 512u);
    Complex sum{};
    for (const Complex& l : s.eigenvalues) {
        ASSERT_TRUE(std::isfinite(l.real()) && std::isfinite(l.imag()));
        sum += l;
    }
    EXPECT_LT(std::abs(sum - t.trace() - p.eigenvalue()), 1e-8 * 512 * 5.0);
}

TEST(ResolventAberth, QuadraticToeplitzConvergesAtLargeDimension) {
    // Roots crowd the cusp p(-1) = 2 of the symbol curve at this size.
    SeededRng rng(44);
    const std::size_t d = 256;
    const auto t = toeplitz_from_symbol(PolySymbol({3.0, 2.0, 1.0}), d);
    for (int trial = 0; trial < 3; ++trial) {
        const RankOnePerturbation p = rank1_perturbation(d, 2.0, rng);
        const Spectrum fast = eigen_resolvent_aberth(t, p);
        const Spectrum dense = dense_eigenvalues(apply_perturbation(t, p), {.probe_residual = false});
        EXPECT_LT(spectrum_match_distance(fast, dense), 1e-8 * (1.0 + max_modulus(dense.eigenvalues)));
        EXPECT_LE(fast.residual, 1e-12);
    }
}

TEST(DenseEigenvalues, TriangularInputGivesDiagonalExactly) {
    UpperTriangularMatrix t(4);
    const std::vector<Complex> diag = {Complex(1, 1), -2.0, Complex(0, 5), 0.25};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i; j < 4; ++j) {
            t.set(i, j, i == j ? diag[i] : Complex(1.0 + i, -1.0 * j));
        }
    }
    const Spectrum s = dense_eigenvalues(t.dense());
    EXPECT_EQ(spectrum_match_distance(s.eigenvalues, diag), 0.0);
}

TEST(DenseEigenvalues, KnownSpectra) {
    EXPECT_LT(spectrum_match_distance(dense_eigenvalues(jordan_corner(4, 1.0)).eigenvalues, roots_of_unity(4)),
              1e-10);
    ComplexMatrix companion(3);
    companion(0, 2) = 1.0;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    EXPECT_LT(spectrum_match_distance(dense_eigenvalues(companion).eigenvalues, roots_of_unity(3)), 1e-12);
}

TEST(DenseEigenvalues, MatchesEigenOnRandomMatrices) {
    SeededRng rng(50);
    for (std::size_t d : {1u, 2u, 3u, 7u, 16u, 33u, 60u}) {
        const ComplexMatrix a = random_matrix(d, rng);
        const Spectrum s = dense_eigenvalues(a);
        EXPECT_LT(spectrum_match_distance(s.eigenvalues, oracle::eigen_eigenvalues(a)), 1e-10 * (1.0 + max_modulus(s.eigenvalues)))
            << "d=" << d;
        EXPECT_LT(s.residual, 1e-8);
    }
}

TEST(DenseEigenvalues, BadlyScaledCorner) {
    for (std::size_t d : {8u, 32u}) {
        const Spectrum s = dense_eigenvalues(jordan_corner(d, 1e6));
        const double r = std::pow(1e6, 1.0 / static_cast<double>(d));
        EXPECT_LT(spectrum_match_distance(s.eigenvalues, roots_of_unity(d, r)), 1e-9);
    }
}

TEST(DenseEigenvalues, ProbeCanBeDisabled) {
    DenseEigenOptions opts;
    opts.probe_residual = false;
    EXPECT_EQ(dense_eigenvalues(jordan_corner(5, 2.0), opts).residual, 0.0);
}

TEST(MatchDistance, TrivialCases) {
    SeededRng rng(60);
    std::vector<Complex> a(20);
    for (auto& z : a) {
        z = rng.next_complex_normal();
    }
    EXPECT_EQ(spectrum_match_distance(a, a), 0.0);
    std::vector<Complex> perm(a.rbegin(), a.rend());
    std::rotate(perm.begin(), perm.begin() + 7, perm.end());
    EXPECT_EQ(spectrum_match_distance(a, perm), 0.0);
    const Complex h(0.3, -0.4);
    std::vector<Complex> shifted = a;
    for (auto& z : shifted) {
        z += h;
    }
    EXPECT_NEAR(spectrum_match_distance(a, shifted), std::abs(h), 1e-15);
    EXPECT_THROW(spectrum_match_distance(a, std::vector<Complex>(3)), DimensionMismatch);
}

TEST(MatchDistance, AgreesWithBruteForce) {
    SeededRng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 7;
        std::vector<Complex> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.next_complex_normal();
            b[i] = rng.next_complex_normal();
        }
        ASSERT_EQ(spectrum_match_distance(a, b), oracle::brute_match_distance(a, b)) << "trial " << trial;
    }
}

TEST(SpectraInvariants, OracleEquivalenceAcrossStructures) {
    SeededRng picker(70);
    const PolySymbol quad({3.0, 2.0, 1.0});
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t d = 5 + static_cast<std::size_t>(picker.next_uniform() * 46);
        SeededRng rng(71, static_cast<std::uint64_t>(trial));
        const RankOnePerturbation p = rank1_perturbation(d, 2.0, rng);
        Spectrum fast;
        ComplexMatrix a;
        switch (trial % 3) {
            case 0:
                fast = poly_roots(charpoly_jordan_rank1(p));
                a = apply_perturbation(jordan_nilpotent(d), p);
                break;
            case 1:
                fast = eigen_resolvent_aberth(two_valued_diagonal(d), p);
                a = apply_perturbation(ComplexMatrix::diagonal(two_valued_diagonal(d)), p);
                break;
            default:
                fast = eigen_resolvent_aberth(toeplitz_from_symbol(quad, d), p);
                a = apply_perturbation(toeplitz_from_symbol(quad, d), p);
                break;
        }
        const auto oracle_ev = oracle::eigen_eigenvalues(a);
        ASSERT_LE(spectrum_match_distance(fast.eigenvalues, oracle_ev), 1e-8 * (1.0 + max_modulus(oracle_ev)))
            << "trial " << trial << " d=" << d;
    }
}

TEST(SpectraInvariants, TraceConservationEverySolver) {
    SeededRng rng(80);
    const std::size_t d = 24;
    const RankOnePerturbation p = rank1_perturbation(d, 2.0, rng);
    const auto t = toeplitz_from_symbol(PolySymbol({3.0, 2.0, 1.0}), d);
    const auto diag = two_valued_diagonal(d);
    const Complex shift = p.eigenvalue();
    auto sum = [](const Spectrum& s) {
        Complex acc{};
        for (const Complex& l : s.eigenvalues) {
            acc += l;
        }
        return acc;
    };
    const double tol = 1e-8 * static_cast<double>(d) * 6.0;
    EXPECT_LT(std::abs(sum(poly_roots(charpoly_jordan_rank1(p))) - shift), tol);
    EXPECT_LT(std::abs(sum(eigen_resolvent_aberth(t, p)) - t.trace() - shift), tol);
    EXPECT_LT(std::abs(sum(eigen_resolvent_aberth(diag, p)) - 2.5 * d - shift), tol);
    EXPECT_LT(std::abs(sum(dense_eigenvalues(apply_perturbation(t, p))) - t.trace() - shift), tol);
}

TEST(SpectraInvariants, DeterminantConservationJordan) {
    SeededRng rng(81);
    for (std::size_t d = 2; d <= 30; d += 4) {
        const RankOnePerturbation p = rank1_perturbation(d, 2.0, rng);
        const Spectrum s = poly_roots(charpoly_jordan_rank1(p));
        double log_prod = 0.0;
        for (const Complex& l : s.eigenvalues) {
            log_prod += std::log(std::abs(l));
        }
        const double expected = p.scale() * std::abs(jordan_quadratic_forms(p.u(), p.v()).back());
        EXPECT_NEAR(std::exp(log_prod) / expected, 1.0, 1e-6) << "d=" << d;
    }
}

TEST(SpectraInvariants, PolesAreNeverExactEigenvalues) {
    SeededRng rng(82);
    const auto t = toeplitz_from_symbol(PolySymbol({3.0, 2.0, 1.0}), 20);
    for (int trial = 0; trial < 50; ++trial) {
        const RankOnePerturbation p = rank1_perturbation(20, 2.0, rng);
        for (const Complex& l : poly_roots(charpoly_jordan_rank1(p)).eigenvalues) {
            ASSERT_NE(l, Complex{});
        }
        for (const Complex& l : eigen_resolvent_aberth(t, p).eigenvalues) {
            ASSERT_NE(l, Complex(3.0));
        }
    }
}
