#pragma once

#include <cstddef>

#include "pseudoscope/linalg.hpp"
#include "pseudoscope/rng.hpp"

namespace pseudoscope {

// Normalized rank-1 perturbation eps * u v† / (|u| |v|), kept in factored form.
class RankOnePerturbation {
public:
    // Throws DimensionMismatch for unequal lengths and InvalidArgument for a
    // zero vector or a non-positive eps.
    RankOnePerturbation(ComplexVector u, ComplexVector v, double eps);

    std::size_t dim() const noexcept { return u_.size(); }
    const ComplexVector& u() const noexcept { return u_; }
    const ComplexVector& v() const noexcept { return v_; }
    double eps() const noexcept { return eps_; }

    // Scalar c = eps / (|u| |v|) multiplying u v†.
    double scale() const noexcept { return scale_; }
    // The only nonzero eigenvalue c * v†u of the perturbation itself.
    Complex eigenvalue() const;
    ComplexMatrix dense() const;

private:
    ComplexVector u_;
    ComplexVector v_;
    double eps_;
    double scale_;
};

// d independent CN(0, 1) entries drawn from rng.
ComplexVector sample_complex_normal(std::size_t d, SeededRng& rng);

// Draws u then v from rng. A zero-norm draw is redrawn once before giving up.
RankOnePerturbation rank1_perturbation(std::size_t d, double eps, SeededRng& rng);

// i.i.d. CN(0, 1) matrix rescaled to spectral norm eps.
ComplexMatrix full_rank_perturbation(std::size_t d, double eps, SeededRng& rng);

// Dense T + eps u v† / (|u| |v|).
ComplexMatrix apply_perturbation(const ComplexMatrix& t, const RankOnePerturbation& p);
ComplexMatrix apply_perturbation(const UpperTriangularMatrix& t, const RankOnePerturbation& p);

}  // namespace pseudoscope
