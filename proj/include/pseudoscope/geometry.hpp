#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pseudoscope/linalg.hpp"

namespace pseudoscope {

// Half the minimum pairwise distance between centers. A single center gives
// +infinity; coincident centers give 0.
double separation_radius(std::span<const Complex> centers);

// Union of open disks of common radius delta around distinct centers.
class DiskUnion {
public:
    // Exact duplicate centers are merged first. Throws InvalidArgument when
    // delta <= 0 or when delta exceeds the separation radius (disks would overlap).
    DiskUnion(std::vector<Complex> centers, double delta);

    const std::vector<Complex>& centers() const noexcept { return centers_; }
    double radius() const noexcept { return delta_; }
    double separation() const noexcept { return separation_; }

    bool contains(Complex lambda) const { return deviation(lambda) < delta_; }
    // Distance to the nearest center.
    double deviation(Complex lambda) const;

private:
    std::vector<Complex> centers_;
    double delta_;
    double separation_;
};

// Open annulus {lambda : ||lambda - center| - scale| < delta scale}.
class Annulus {
public:
    Annulus(Complex center, double delta, double scale = 1.0);

    Complex center() const noexcept { return center_; }
    double delta() const noexcept { return delta_; }
    double scale() const noexcept { return scale_; }
    // Inner radius (1 - delta) scale, clamped at 0.
    double inner() const noexcept { return std::max(0.0, 1.0 - delta_) * scale_; }
    double outer() const noexcept { return (1.0 + delta_) * scale_; }

    bool contains(Complex lambda) const { return deviation(lambda) < delta_ * scale_; }
    double deviation(Complex lambda) const;

private:
    Complex center_;
    double delta_;
    double scale_;
};

// Image under p of the open annulus ||z| - 1| < delta.
class SymbolBand {
public:
    // Requires 0 < delta < 1.
    SymbolBand(PolySymbol p, double delta);

    const PolySymbol& symbol() const noexcept { return p_; }
    double delta() const noexcept { return delta_; }

    bool contains(Complex lambda) const { return deviation(lambda) < delta_; }
    // min over preimages z of ||z| - 1|.
    double deviation(Complex lambda) const;

private:
    PolySymbol p_;
    double delta_;
};

// Disks of radius tau around the critical values of a symbol.
class ExclusionSet {
public:
    ExclusionSet(std::vector<Complex> critical_values, double tau);
    static ExclusionSet for_symbol(const PolySymbol& p, double tau);

    const std::vector<Complex>& critical_values() const noexcept { return values_; }
    double tau() const noexcept { return tau_; }

    bool contains(Complex lambda) const;

private:
    std::vector<Complex> values_;
    double tau_;
};

using Region = std::variant<DiskUnion, Annulus, SymbolBand, ExclusionSet>;

// Strict membership: points at distance exactly delta (or tau) are outside.
bool region_contains(const Region& region, Complex lambda);

// p(z_l) for every root z_l of p' (with multiplicity); empty for linear p.
std::vector<Complex> critical_values(const PolySymbol& p);

// All n roots of p(z) = lambda.
std::vector<Complex> symbol_preimages(const PolySymbol& p, Complex lambda);

// min over preimages z of ||z| - 1|.
double band_deviation(const PolySymbol& p, Complex lambda);

struct RootSeparation {
    double min_pair_distance = std::numeric_limits<double>::infinity();
    double min_derivative_modulus = 0.0;
    double min_root_modulus = 0.0;
};

// Separation diagnostics of the preimages of lambda under p.
RootSeparation root_separation_stats(const PolySymbol& p, Complex lambda);

// |rho|^{1/d} e^{i(2 k pi + theta)/d}, k = 0..d-1: the spectrum of jordan_corner(d, rho).
std::vector<Complex> corner_eigenvalues(std::size_t d, Complex rho);

// (g1 + g2 +- sqrt((g1 - g2)^2 + 4 w_k)) / 2 with w_k the d-th roots of rho:
// the spectrum of two_block_corner(d, g1, g2, rho).
std::vector<Complex> two_block_eigenvalues(std::size_t d, Complex gamma1, Complex gamma2, Complex rho);

// Limit probability Pr(e^{-C} < |xi| < e^{C}) = e^{-e^{-2C}} - e^{-e^{2C}}.
// The only supported law is "CN(0,1)".
double annulus_prob_limit(std::string_view law, double c);

// Exact Pr(||rho|^{1/d} - 1| < delta) for rho ~ CN(0,1).
double corner_annulus_exact(std::size_t d, double delta);

// p(e^{i theta}) at `samples` equi-spaced angles, closed by repeating the first point.
std::vector<Complex> symbol_image_curve(const PolySymbol& p, std::size_t samples);

}  // namespace pseudoscope
