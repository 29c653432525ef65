#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pseudoscope/linalg.hpp"
#include "pseudoscope/sampling.hpp"

namespace pseudoscope {

enum class SolverKind { JordanPoly, ResolventAberth, DenseQr };

// "jordan-poly", "resolvent-aberth", "dense-qr".
std::string_view to_string(SolverKind kind);
// Inverse of to_string; throws InvalidArgument for unknown names.
SolverKind parse_solver_kind(std::string_view name);

// lambda^d + c_{d-1} lambda^{d-1} + ... + c_0, stored as (c_0, ..., c_{d-1}).
class MonicPolynomial {
public:
    explicit MonicPolynomial(std::vector<Complex> coeffs);

    std::size_t degree() const noexcept { return coeffs_.size(); }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    Complex operator()(Complex z) const;

private:
    std::vector<Complex> coeffs_;
};

// Eigenvalues of one matrix plus the route that produced them.
//
// residual, per solver:
//   jordan-poly      max_k |p(l_k)| / sum_j |c_j| |l_k|^j   (relative backward error)
//   resolvent-aberth max_k min(|f(l_k)| / (1 + c |v|†|x_k|), |g/g'(l_k)| / max(1, |l_k|))
//                    with x_k = (l_k - T)^{-1} u: rounding-relative secular residual
//                    or relative Newton correction, matching the two stopping rules
//   dense-qr         bottleneck distance to the spectrum of A + 1e-13 |A|_F G
//                    for a fixed random G (0 when the probe is disabled)
struct Spectrum {
    std::vector<Complex> eigenvalues;
    SolverKind solver = SolverKind::DenseQr;
    double residual = 0.0;
};

// Characteristic polynomial of J + eps u v† / (|u| |v|).
MonicPolynomial charpoly_jordan_rank1(const RankOnePerturbation& p);

struct AberthOptions {
    // Relative update below which a root counts as converged.
    double tolerance = 1e-12;
    std::size_t max_sweeps = 60;
    // Extra sweeps spent on roots still moving after max_sweeps.
    std::size_t polish_sweeps = 40;
};

// All roots of a monic polynomial by Aberth-Ehrlich iteration.
Spectrum poly_roots(const MonicPolynomial& p, const AberthOptions& options = {});

// Eigenvalues of T + eps u v† / (|u| |v|) from the secular equation
// det(lambda - T) (1 - c v†(lambda - T)^{-1} u) = 0, never expanding det(lambda - T).
Spectrum eigen_resolvent_aberth(const UpperTriangularMatrix& t, const RankOnePerturbation& p,
                                const AberthOptions& options = {});
Spectrum eigen_resolvent_aberth(std::span<const Complex> diagonal, const RankOnePerturbation& p,
                                const AberthOptions& options = {});

struct DenseEigenOptions {
    // Compute the perturbation-probe residual (doubles the cost).
    bool probe_residual = true;
    std::uint64_t probe_seed = 0x5bd1e995ULL;
};

// All eigenvalues by balancing, Householder reduction to Hessenberg form and
// implicitly shifted complex QR.
Spectrum dense_eigenvalues(const ComplexMatrix& a, const DenseEigenOptions& options = {});

// Smallest possible largest distance over all one-to-one pairings of a and b.
double spectrum_match_distance(std::span<const Complex> a, std::span<const Complex> b);
double spectrum_match_distance(const Spectrum& a, const Spectrum& b);

}  // namespace pseudoscope
