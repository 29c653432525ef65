#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/spectra.hpp"

namespace pseudoscope {

namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2.0;
constexpr double kInitialAngle = 0.37;
// Collisions with the same pole after which the pole itself is taken as the root.
constexpr int kCollisionLimit = 3;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Outcome of one Newton evaluation at an iterate.
struct NewtonEval {
    enum class Status { Ok, Root, Collision };
    Status status = Status::Ok;
    Complex ratio;         // g / g'
    bool within_rounding;  // |g| is already at the level of its evaluation error
    Complex pole;          // set for Collision
};

// Simultaneous Aberth-Ehrlich iteration with Gauss-Seidel updates. Roots stop
// moving once their relative update drops below the tolerance or their
// backward error reaches rounding level.
template <class Evaluate>
std::vector<bool> aberth_iterate(std::vector<Complex>& z, Evaluate&& evaluate,
                                 const AberthOptions& options) {
    const std::size_t n = z.size();
    std::vector<bool> converged(n, false);
    std::vector<int> collisions(n, 0);
    const std::size_t total_sweeps = options.max_sweeps + options.polish_sweeps;
    for (std::size_t sweep = 0; sweep < total_sweeps; ++sweep) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (converged[i]) {
                continue;
            }
            const NewtonEval e = evaluate(z[i]);
            if (e.status == NewtonEval::Status::Root) {
                converged[i] = true;
                continue;
            }
            if (e.status == NewtonEval::Status::Collision) {
                if (++collisions[i] >= kCollisionLimit) {
                    z[i] = e.pole;
                    converged[i] = true;
                    continue;
                }
                const double kick = 1e-8 * std::max(1.0, std::abs(z[i]));
                z[i] += std::polar(kick, kInitialAngle + collisions[i]);
                all_done = false;
                continue;
            }
            if (e.within_rounding) {
                converged[i] = true;
                continue;
            }
            Complex repulsion{};
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    repulsion += 1.0 / (z[i] - z[j]);
                }
            }
            const Complex step = e.ratio / (1.0 - e.ratio * repulsion);
            if (!finite(step) || !finite(repulsion)) {
                // Coincident iterates: nudge apart and retry next sweep.
                z[i] += std::polar(1e-8 * std::max(1.0, std::abs(z[i])),
                                   kInitialAngle * static_cast<double>(i + 1));
                all_done = false;
                continue;
            }
            z[i] -= step;
            if (std::abs(step) <= options.tolerance * std::abs(z[i])) {
                converged[i] = true;
            } else {
                all_done = false;
            }
        }
        if (all_done) {
            break;
        }
    }
    return converged;
}

void throw_unconverged(const char* where, const std::vector<bool>& converged,
                       const std::vector<Complex>& z) {
    const auto missing = std::count(converged.begin(), converged.end(), false);
    throw RootConvergenceError(std::string(where) + ": " + std::to_string(missing) + " of " +
                                   std::to_string(z.size()) + " roots did not converge",
                               converged, z);
}

// ---------------------------------------------------------------------------
// Monic polynomials

// Coefficients a_0..a_n of a monic polynomial with a_n = 1.
struct FullPolynomial {
    std::vector<Complex> a;
    std::size_t degree() const { return a.size() - 1; }
};

struct HornerResult {
    Complex ratio;           // p / p'
    double backward_ratio;   // |p(z)| / sum_j |a_j| |z|^j
    bool root;
};

HornerResult horner_newton(const FullPolynomial& p, Complex z) {
    const std::size_t n = p.degree();
    if (std::abs(z) <= 1.0) {
        Complex val = p.a[n];
        Complex der{};
        double scale = std::abs(p.a[n]);
        const double r = std::abs(z);
        for (std::size_t j = n; j-- > 0;) {
            der = der * z + val;
            val = val * z + p.a[j];
            scale = scale * r + std::abs(p.a[j]);
        }
        if (val == Complex{}) {
            return {{}, 0.0, true};
        }
        return {val / der, std::abs(val) / scale, false};
    }
    // Reversed polynomial in w = 1/z keeps every intermediate bounded.
    const Complex w = 1.0 / z;
    const double rw = std::abs(w);
    Complex val = p.a[0];
    Complex der{};
    double scale = std::abs(p.a[0]);
    for (std::size_t j = 1; j <= n; ++j) {
        der = der * w + val;
        val = val * w + p.a[j];
        scale = scale * rw + std::abs(p.a[j]);
    }
    if (val == Complex{}) {
        return {{}, 0.0, true};
    }
    // p(z) = z^n r(w), p'(z) = z^{n-1} (n r(w) - w r'(w)).
    const Complex ratio = z * val / (static_cast<double>(n) * val - w * der);
    return {ratio, std::abs(val) / scale, false};
}

// Starting points from the upper convex hull of (j, log|a_j|).
std::vector<Complex> newton_polygon_start(const FullPolynomial& p) {
    const std::size_t n = p.degree();
    std::vector<std::size_t> hull;
    std::vector<double> lg(n + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j <= n; ++j) {
        if (p.a[j] != Complex{}) {
            lg[j] = std::log(std::abs(p.a[j]));
        }
    }
    for (std::size_t j = 0; j <= n; ++j) {
        if (!std::isfinite(lg[j])) {
            continue;
        }
        while (hull.size() >= 2) {
            const std::size_t i0 = hull[hull.size() - 2];
            const std::size_t i1 = hull.back();
            // Drop i1 when it lies on or below the chord from i0 to j.
            const double cross = (static_cast<double>(i1) - static_cast<double>(i0)) * (lg[j] - lg[i0]) -
                                 (lg[i1] - lg[i0]) * (static_cast<double>(j) - static_cast<double>(i0));
            if (cross >= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(j);
    }
    std::vector<Complex> z;
    z.reserve(n);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const std::size_t i = hull[h];
        const std::size_t k = hull[h + 1];
        const double m = static_cast<double>(k - i);
        const double radius = std::exp((lg[i] - lg[k]) / m);
        for (std::size_t t = 0; t < k - i; ++t) {
            const double angle = 2.0 * std::numbers::pi * (static_cast<double>(t) / m +
                                                           static_cast<double>(i) / static_cast<double>(n)) +
                                 kInitialAngle;
            z.push_back(std::polar(radius, angle));
        }
    }
    return z;
}

// Roots of z^2 + b z + c without cancellation.
std::pair<Complex, Complex> quadratic_roots(Complex b, Complex c) {
    Complex disc = std::sqrt(b * b - 4.0 * c);
    if ((std::conj(b) * disc).real() < 0.0) {
        disc = -disc;
    }
    const Complex q = -0.5 * (b + disc);
    if (q == Complex{}) {
        return {Complex{}, Complex{}};
    }
    return {q, c / q};
}

}  // namespace

Spectrum poly_roots(const MonicPolynomial& p, const AberthOptions& options) {
    if (p.degree() == 0) {
        throw InvalidArgument("poly_roots: polynomial degree must be at least 1");
    }
    for (const Complex& c : p.coeffs()) {
        if (!finite(c)) {
            throw InvalidArgument("poly_roots: non-finite coefficient");
        }
    }
    Spectrum out;
    out.solver = SolverKind::JordanPoly;

    FullPolynomial full;
    full.a.assign(p.coeffs().begin(), p.coeffs().end());
    full.a.push_back(1.0);
    // Exact zero roots factor out of the constant term.
    std::size_t zeros = 0;
    while (zeros < p.degree() && full.a[zeros] == Complex{}) {
        ++zeros;
    }
    out.eigenvalues.assign(zeros, Complex{});
    full.a.erase(full.a.begin(), full.a.begin() + static_cast<std::ptrdiff_t>(zeros));
    const std::size_t n = full.degree();

    std::vector<Complex> z;
    if (n == 1) {
        z = {-full.a[0]};
    } else if (n == 2) {
        const auto [r1, r2] = quadratic_roots(full.a[1], full.a[0]);
        z = {r1, r2};
    } else if (n > 2) {
        z = newton_polygon_start(full);
        const double tolerance_be = 4.0 * static_cast<double>(n + 1) * kUnitRoundoff;
        auto evaluate = [&](Complex x) {
            const HornerResult h = horner_newton(full, x);
            NewtonEval e;
            if (h.root) {
                e.status = NewtonEval::Status::Root;
                return e;
            }
            e.ratio = h.ratio;
            e.within_rounding = h.backward_ratio <= tolerance_be;
            return e;
        };
        const std::vector<bool> converged = aberth_iterate(z, evaluate, options);
        if (std::find(converged.begin(), converged.end(), false) != converged.end()) {
            throw_unconverged("poly_roots", converged, z);
        }
    }
    double residual = 0.0;
    for (const Complex& x : z) {
        const HornerResult h = horner_newton(full, x);
        residual = std::max(residual, h.root ? 0.0 : h.backward_ratio);
    }
    out.residual = residual;
    out.eigenvalues.insert(out.eigenvalues.end(), z.begin(), z.end());
    return out;
}

// ---------------------------------------------------------------------------
// Secular equation g(l) = det(l - T) (1 - c v†(l - T)^{-1} u)

namespace {

class SecularFunction {
public:
    SecularFunction(const UpperTriangularMatrix& t, const RankOnePerturbation& p)
        : t_(t), p_(p), c_(p.scale()) {}

    struct Value {
        Complex log_derivative_f;  // f'/f
        double residual;           // |f| / (1 + c |v|†|x|)
        bool root;                 // f == 0 exactly
    };

    // Evaluates f and f'/f through one fused pair of scaled resolvent solves. Throws
    // NearSingularShift when lambda hits a diagonal entry.
    Value evaluate(Complex lambda) const {
        const ScaledResolventPair r = triangular_resolvent_solve_pair_scaled(t_, lambda, p_.u());
        const Complex cs = c_ * dot(p_.v(), r.x);   // c s 2^{-e}
        const Complex cs2 = c_ * dot(p_.v(), r.y);  // c s2 2^{-e}
        double magnitude = 0.0;                     // c |v|†|x| 2^{-e}
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            magnitude += std::abs(p_.v()[i]) * std::abs(r.x[i]);
        }
        magnitude *= c_;
        const double one = std::ldexp(1.0, -r.exponent);
        const Complex f_scaled = one - cs;          // f 2^{-e}
        Value v;
        // Relative to the rounding scale of the inner product, which exceeds
        // |c s| whenever its terms cancel.
        v.residual = std::abs(f_scaled) / (one + magnitude);
        v.root = f_scaled == Complex{};
        if (!v.root) {
            v.log_derivative_f = cs2 / f_scaled;
        }
        return v;
    }

private:
    const UpperTriangularMatrix& t_;
    const RankOnePerturbation& p_;
    double c_;
};

// Symbol coefficients (a_0, ..., a_b) when T is a banded Toeplitz matrix with
// b >= 1, i.e. every superdiagonal is constant.
std::optional<std::vector<Complex>> toeplitz_symbol(const UpperTriangularMatrix& t) {
    if (t.is_diagonal()) {
        return std::nullopt;
    }
    std::vector<Complex> coeffs;
    for (std::size_t k = 0; k <= t.bandwidth(); ++k) {
        const auto band = t.superdiagonal(k);
        if (std::adjacent_find(band.begin(), band.end(), std::not_equal_to<>()) != band.end()) {
            return std::nullopt;
        }
        coeffs.push_back(band.empty() ? Complex{} : band.front());
    }
    return coeffs;
}

}  // namespace

Spectrum eigen_resolvent_aberth(const UpperTriangularMatrix& t, const RankOnePerturbation& p,
                                const AberthOptions& options) {
    const std::size_t d = t.dim();
    if (p.dim() != d) {
        throw DimensionMismatch("eigen_resolvent_aberth: matrix dimension " + std::to_string(d) +
                                " vs perturbation dimension " + std::to_string(p.dim()));
    }
    const auto diag = t.diagonal();

    // Distinct diagonal values with their multiplicities.
    std::vector<std::pair<Complex, double>> poles;
    {
        std::map<std::pair<double, double>, std::size_t> count;
        for (const Complex& g : diag) {
            ++count[{g.real(), g.imag()}];
        }
        for (const auto& [key, m] : count) {
            poles.push_back({Complex(key.first, key.second), static_cast<double>(m)});
        }
    }

    Spectrum out;
    out.solver = SolverKind::ResolventAberth;
    std::size_t moving = d;
    if (t.is_diagonal()) {
        // A value of multiplicity m stays an eigenvalue m - 1 times; the
        // secular equation only moves one copy of it.
        for (auto& [g, m] : poles) {
            for (double k = 1.0; k < m; k += 1.0) {
                out.eigenvalues.push_back(g);
            }
            m = 1.0;
        }
        moving = poles.size();
    }

    std::vector<Complex> z(moving);
    if (const auto symbol = toeplitz_symbol(t)) {
        // Perturbed eigenvalues of p(J) gather near the image p(|z| = 1),
        // which a circle around a_0 need not even enclose.
        const PolySymbol curve(*symbol);
        for (std::size_t k = 0; k < moving; ++k) {
            z[k] = curve(std::polar(1.0, (2.0 * std::numbers::pi * static_cast<double>(k) + kInitialAngle) /
                                             static_cast<double>(moving)));
        }
    } else {
        Complex mean{};
        for (const Complex& g : diag) {
            mean += g;
        }
        mean /= static_cast<double>(d);
        double spread = 0.0;
        for (const Complex& g : diag) {
            spread = std::max(spread, std::abs(g - mean));
        }
        const double radius = 1.2 * (spread + p.eps());
        for (std::size_t k = 0; k < moving; ++k) {
            z[k] = mean + std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                                     static_cast<double>(moving) +
                                                 kInitialAngle);
        }
    }

    const SecularFunction f(t, p);
    const double tolerance_be = 4.0 * static_cast<double>(d + 1) * kUnitRoundoff;
    auto evaluate = [&](Complex lambda) {
        NewtonEval e;
        SecularFunction::Value v;
        try {
            v = f.evaluate(lambda);
        } catch (const NearSingularShift& err) {
            e.status = NewtonEval::Status::Collision;
            e.pole = diag[err.index()];
            return e;
        }
        if (v.root) {
            e.status = NewtonEval::Status::Root;
            return e;
        }
        Complex g = v.log_derivative_f;
        for (const auto& [pole, m] : poles) {
            g += m / (lambda - pole);
        }
        e.ratio = 1.0 / g;
        e.within_rounding = v.residual <= tolerance_be;
        return e;
    };
    const std::vector<bool> converged = aberth_iterate(z, evaluate, options);
    if (std::find(converged.begin(), converged.end(), false) != converged.end()) {
        throw_unconverged("eigen_resolvent_aberth", converged, z);
    }

    // Inside the symbol curve f is so steep that |f| says little once the
    // iterate has stopped moving; the Newton correction measures that instead.
    double residual = 0.0;
    for (const Complex& lambda : z) {
        const NewtonEval e = evaluate(lambda);
        if (e.status != NewtonEval::Status::Ok) {
            continue;  // exact root, or root accepted at a pole: no finite f there
        }
        const double newton = std::abs(e.ratio) / std::max(1.0, std::abs(lambda));
        residual = std::max(residual, std::min(f.evaluate(lambda).residual, newton));
    }
    out.residual = residual;
    out.eigenvalues.insert(out.eigenvalues.end(), z.begin(), z.end());
    return out;
}

Spectrum eigen_resolvent_aberth(std::span<const Complex> diagonal, const RankOnePerturbation& p,
                                const AberthOptions& options) {
    return eigen_resolvent_aberth(UpperTriangularMatrix::from_diagonal(diagonal), p, options);
}

}  // namespace pseudoscope
