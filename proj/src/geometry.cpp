#include "pseudoscope/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/spectra.hpp"

namespace pseudoscope {

double separation_radius(std::span<const Complex> centers) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            best = std::min(best, std::abs(centers[i] - centers[j]));
        }
    }
    return 0.5 * best;
}

// ---------------------------------------------------------------------------
// Regions

DiskUnion::DiskUnion(std::vector<Complex> centers, double delta) : delta_(delta) {
    if (centers.empty()) {
        throw InvalidArgument("DiskUnion: at least one center is required");
    }
    if (!(delta > 0.0)) {
        throw InvalidArgument("DiskUnion: radius must be positive");
    }
    std::sort(centers.begin(), centers.end(), [](Complex a, Complex b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    centers_ = std::move(centers);
    separation_ = separation_radius(centers_);
    if (delta > separation_) {
        throw InvalidArgument("DiskUnion: radius " + std::to_string(delta) +
                              " exceeds the separation radius " + std::to_string(separation_));
    }
}

double DiskUnion::deviation(Complex lambda) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& c : centers_) {
        best = std::min(best, std::abs(lambda - c));
    }
    return best;
}

Annulus::Annulus(Complex center, double delta, double scale)
    : center_(center), delta_(delta), scale_(scale) {
    if (!(delta > 0.0) || !(scale > 0.0)) {
        throw InvalidArgument("Annulus: delta and scale must be positive");
    }
}

double Annulus::deviation(Complex lambda) const { return std::abs(std::abs(lambda - center_) - scale_); }

SymbolBand::SymbolBand(PolySymbol p, double delta) : p_(std::move(p)), delta_(delta) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw InvalidArgument("SymbolBand: delta must lie in (0, 1)");
    }
}

double SymbolBand::deviation(Complex lambda) const { return band_deviation(p_, lambda); }

ExclusionSet::ExclusionSet(std::vector<Complex> critical_values, double tau)
    : values_(std::move(critical_values)), tau_(tau) {
    if (!(tau > 0.0)) {
        throw InvalidArgument("ExclusionSet: tau must be positive");
    }
}

ExclusionSet ExclusionSet::for_symbol(const PolySymbol& p, double tau) {
    return ExclusionSet(pseudoscope::critical_values(p), tau);
}

bool ExclusionSet::contains(Complex lambda) const {
    return std::any_of(values_.begin(), values_.end(),
                       [&](Complex c) { return std::abs(lambda - c) < tau_; });
}

bool region_contains(const Region& region, Complex lambda) {
    return std::visit([lambda](const auto& r) { return r.contains(lambda); }, region);
}

// ---------------------------------------------------------------------------
// Symbol geometry

std::vector<Complex> critical_values(const PolySymbol& p) {
    const auto a = p.coeffs();
    const std::size_t n = p.degree();
    if (n < 2) {
        return {};
    }
    // p'(z) / (n a_n) is monic of degree n - 1.
    const Complex lead = static_cast<double>(n) * a[n];
    std::vector<Complex> c(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        c[k - 1] = static_cast<double>(k) * a[k] / lead;
    }
    std::vector<Complex> values;
    for (const Complex& z : poly_roots(MonicPolynomial(std::move(c))).eigenvalues) {
        values.push_back(p(z));
    }
    return values;
}

std::vector<Complex> symbol_preimages(const PolySymbol& p, Complex lambda) {
    const auto a = p.coeffs();
    const std::size_t n = p.degree();
    std::vector<Complex> c(n);
    for (std::size_t k = 0; k < n; ++k) {
        c[k] = (k == 0 ? a[0] - lambda : a[k]) / a[n];
    }
    return poly_roots(MonicPolynomial(std::move(c))).eigenvalues;
}

double band_deviation(const PolySymbol& p, Complex lambda) {
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& z : symbol_preimages(p, lambda)) {
        best = std::min(best, std::abs(std::abs(z) - 1.0));
    }
    return best;
}

RootSeparation root_separation_stats(const PolySymbol& p, Complex lambda) {
    const std::vector<Complex> roots = symbol_preimages(p, lambda);
    RootSeparation out;
    out.min_derivative_modulus = std::numeric_limits<double>::infinity();
    out.min_root_modulus = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            out.min_pair_distance = std::min(out.min_pair_distance, std::abs(roots[i] - roots[j]));
        }
        out.min_derivative_modulus = std::min(out.min_derivative_modulus, std::abs(p.derivative(roots[i])));
        out.min_root_modulus = std::min(out.min_root_modulus, std::abs(roots[i]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corner perturbation closed forms

namespace {

// e^{i pi t}, exact at multiples of a quarter turn so that roots landing on
// the axes (for example w = -1) carry no rounding in the imaginary part.
Complex cis_half_turns(double t) {
    t = std::remainder(t, 2.0);  // t in [-1, 1]
    const double q = 2.0 * t;
    if (q == std::nearbyint(q)) {
        switch (static_cast<int>(q)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case -1: return {0.0, -1.0};
        default: return {-1.0, 0.0};
        }
    }
    return std::polar(1.0, std::numbers::pi * t);
}

// w_k = |rho|^{1/d} e^{i (2 k pi + theta) / d}.
Complex corner_root(std::size_t d, Complex rho, std::size_t k) {
    const double dd = static_cast<double>(d);
    const double theta = rho.imag() == 0.0 ? (rho.real() < 0.0 ? 1.0 : 0.0) : std::arg(rho) / std::numbers::pi;
    return std::pow(std::abs(rho), 1.0 / dd) * cis_half_turns((2.0 * static_cast<double>(k) + theta) / dd);
}

}  // namespace

std::vector<Complex> corner_eigenvalues(std::size_t d, Complex rho) {
    std::vector<Complex> out(d);
    if (rho == Complex{}) {
        return out;
    }
    for (std::size_t k = 0; k < d; ++k) {
        out[k] = corner_root(d, rho, k);
    }
    return out;
}

std::vector<Complex> two_block_eigenvalues(std::size_t d, Complex gamma1, Complex gamma2, Complex rho) {
    std::vector<Complex> out;
    out.reserve(2 * d);
    const Complex diff = gamma1 - gamma2;
    for (std::size_t k = 0; k < d; ++k) {
        const Complex w = rho == Complex{} ? Complex{} : corner_root(d, rho, k);
        const Complex s = std::sqrt(diff * diff + 4.0 * w);
        out.push_back(0.5 * (gamma1 + gamma2 + s));
        out.push_back(0.5 * (gamma1 + gamma2 - s));
    }
    return out;
}

double annulus_prob_limit(std::string_view law, double c) {
    if (law != "CN(0,1)") {
        throw InvalidArgument("annulus_prob_limit: unsupported law '" + std::string(law) +
                              "' (only CN(0,1) is available)");
    }
    if (!(c >= 0.0)) {
        throw InvalidArgument("annulus_prob_limit: C must be nonnegative");
    }
    // Rayleigh law: Pr(|xi| <= r) = 1 - e^{-r^2}.
    return std::exp(-std::exp(-2.0 * c)) - std::exp(-std::exp(2.0 * c));
}

double corner_annulus_exact(std::size_t d, double delta) {
    if (d == 0 || !(delta > 0.0)) {
        throw InvalidArgument("corner_annulus_exact: need d >= 1 and delta > 0");
    }
    const double two_d = 2.0 * static_cast<double>(d);
    const double inner2 = delta >= 1.0 ? 0.0 : std::pow(1.0 - delta, two_d);
    const double outer2 = std::pow(1.0 + delta, two_d);
    return std::exp(-inner2) - std::exp(-outer2);
}

std::vector<Complex> symbol_image_curve(const PolySymbol& p, std::size_t samples) {
    if (samples < 8) {
        throw InvalidArgument("symbol_image_curve: at least 8 samples are required");
    }
    std::vector<Complex> curve;
    curve.reserve(samples + 1);
    for (std::size_t k = 0; k < samples; ++k) {
        curve.push_back(p(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                              static_cast<double>(samples))));
    }
    curve.push_back(curve.front());
    return curve;
}

}  // namespace pseudoscope
