#include "pseudoscope/sampling.hpp"

#include <cmath>
#include <string>

#include "pseudoscope/errors.hpp"

namespace pseudoscope {

RankOnePerturbation::RankOnePerturbation(ComplexVector u, ComplexVector v, double eps)
    : u_(std::move(u)), v_(std::move(v)), eps_(eps), scale_(0.0) {
    if (u_.size() != v_.size()) {
        throw DimensionMismatch("rank-1 perturbation: u has length " + std::to_string(u_.size()) +
                                ", v has length " + std::to_string(v_.size()));
    }
    if (u_.empty()) {
        throw InvalidArgument("rank-1 perturbation: dimension must be at least 1");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InvalidArgument("rank-1 perturbation: eps must be positive and finite");
    }
    const double nu = norm(u_);
    const double nv = norm(v_);
    if (nu == 0.0 || nv == 0.0) {
        throw InvalidArgument("rank-1 perturbation: u and v must be nonzero");
    }
    scale_ = eps / nu / nv;
}

Complex RankOnePerturbation::eigenvalue() const { return scale_ * dot(v_, u_); }

ComplexMatrix RankOnePerturbation::dense() const {
    const std::size_t d = dim();
    ComplexMatrix e(d);
    for (std::size_t i = 0; i < d; ++i) {
        const Complex ui = scale_ * u_[i];
        for (std::size_t j = 0; j < d; ++j) {
            e(i, j) = ui * std::conj(v_[j]);
        }
    }
    return e;
}

ComplexVector sample_complex_normal(std::size_t d, SeededRng& rng) {
    ComplexVector x(d);
    for (Complex& z : x) {
        z = rng.next_complex_normal();
    }
    return x;
}

RankOnePerturbation rank1_perturbation(std::size_t d, double eps, SeededRng& rng) {
    if (d == 0) {
        throw InvalidArgument("rank1_perturbation: dimension must be at least 1");
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
        ComplexVector u = sample_complex_normal(d, rng);
        ComplexVector v = sample_complex_normal(d, rng);
        if (norm(u) > 0.0 && norm(v) > 0.0) {
            return RankOnePerturbation(std::move(u), std::move(v), eps);
        }
    }
    throw Error("rank1_perturbation: drew a zero vector twice");
}

ComplexMatrix full_rank_perturbation(std::size_t d, double eps, SeededRng& rng) {
    if (d == 0) {
        throw InvalidArgument("full_rank_perturbation: dimension must be at least 1");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InvalidArgument("full_rank_perturbation: eps must be positive and finite");
    }
    ComplexMatrix e(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (Complex& z : e.row(i)) {
            z = rng.next_complex_normal();
        }
    }
    const double sigma = spectral_norm(e);
    if (sigma == 0.0) {
        throw Error("full_rank_perturbation: drew the zero matrix");
    }
    e *= Complex(eps / sigma, 0.0);
    return e;
}

ComplexMatrix apply_perturbation(const ComplexMatrix& t, const RankOnePerturbation& p) {
    if (t.dim() != p.dim()) {
        throw DimensionMismatch("apply_perturbation: matrix dimension " + std::to_string(t.dim()) +
                                " vs perturbation dimension " + std::to_string(p.dim()));
    }
    ComplexMatrix a = t;
    const double c = p.scale();
    for (std::size_t i = 0; i < t.dim(); ++i) {
        const Complex ui = c * p.u()[i];
        auto row = a.row(i);
        for (std::size_t j = 0; j < t.dim(); ++j) {
            row[j] += ui * std::conj(p.v()[j]);
        }
    }
    return a;
}

ComplexMatrix apply_perturbation(const UpperTriangularMatrix& t, const RankOnePerturbation& p) {
    return apply_perturbation(t.dense(), p);
}

}  // namespace pseudoscope
