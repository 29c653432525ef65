#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/spectra.hpp"

namespace pseudoscope {

namespace {

double l1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

// Diagonal similarity by powers of two that equalizes row and column norms,
// so badly scaled entries such as a huge corner value do not dominate the
// QR rounding errors.
void balance(ComplexMatrix& a) {
    const std::size_t n = a.dim();
    constexpr double kRadix = 2.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0;
            double r = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    c += l1(a(j, i));
                    r += l1(a(i, j));
                }
            }
            if (c == 0.0 || r == 0.0) {
                continue;
            }
            double g = r / kRadix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= kRadix;
                c *= kRadix * kRadix;
            }
            g = r * kRadix;
            while (c > g) {
                f /= kRadix;
                c /= kRadix * kRadix;
            }
            if ((c + r) / f < 0.95 * s) {
                changed = true;
                for (std::size_t j = 0; j < n; ++j) {
                    a(i, j) /= f;
                    a(j, i) *= f;
                }
            }
        }
    }
}

// Householder reduction to upper Hessenberg form (eigenvalues only, so the
// reflectors are not accumulated).
void reduce_to_hessenberg(ComplexMatrix& h) {
    const std::size_t n = h.dim();
    std::vector<Complex> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            scale = std::max(scale, l1(h(i, k)));
        }
        if (scale == 0.0) {
            continue;
        }
        double sum = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k) / scale;
            sum += std::norm(v[i]);
        }
        const double alpha_mod = std::sqrt(sum);
        const Complex x0 = v[k + 1];
        const Complex phase = x0 == Complex{} ? Complex(1.0) : x0 / std::abs(x0);
        // v = x + phase |x| e1 avoids cancellation; H v = -phase |x| e1.
        v[k + 1] = x0 + phase * alpha_mod;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            vnorm2 += std::norm(v[i]);
        }
        if (vnorm2 == 0.0) {
            continue;
        }
        const double beta = 2.0 / vnorm2;
        // Left: rows k+1..n-1, columns k..n-1.
        for (std::size_t j = k; j < n; ++j) {
            Complex s{};
            for (std::size_t i = k + 1; i < n; ++i) {
                s += std::conj(v[i]) * h(i, j);
            }
            s *= beta;
            for (std::size_t i = k + 1; i < n; ++i) {
                h(i, j) -= v[i] * s;
            }
        }
        // Right: all rows, columns k+1..n-1.
        for (std::size_t i = 0; i < n; ++i) {
            Complex s{};
            for (std::size_t j = k + 1; j < n; ++j) {
                s += h(i, j) * v[j];
            }
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) {
                h(i, j) -= s * std::conj(v[j]);
            }
        }
        h(k + 1, k) = -phase * alpha_mod * scale;
        for (std::size_t i = k + 2; i < n; ++i) {
            h(i, k) = Complex{};
        }
    }
}

// Unitary rotation G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
struct Givens {
    double c;
    Complex s;
};

Givens make_givens(Complex a, Complex b) {
    if (b == Complex{}) {
        return {1.0, Complex{}};
    }
    if (a == Complex{}) {
        return {0.0, std::conj(b) / std::abs(b)};
    }
    const double abs_a = std::abs(a);
    const double r = std::hypot(abs_a, std::abs(b));
    return {abs_a / r, (a / abs_a) * std::conj(b) / r};
}

void rotate_rows(ComplexMatrix& h, const Givens& g, std::size_t p, std::size_t j0, std::size_t j1) {
    for (std::size_t j = j0; j <= j1; ++j) {
        const Complex x = h(p, j);
        const Complex y = h(p + 1, j);
        h(p, j) = g.c * x + g.s * y;
        h(p + 1, j) = -std::conj(g.s) * x + g.c * y;
    }
}

void rotate_cols(ComplexMatrix& h, const Givens& g, std::size_t p, std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i <= i1; ++i) {
        const Complex x = h(i, p);
        const Complex y = h(i, p + 1);
        h(i, p) = g.c * x + std::conj(g.s) * y;
        h(i, p + 1) = -g.s * x + g.c * y;
    }
}

// Eigenvalue of the trailing 2x2 block closer to its last diagonal entry.
Complex wilkinson_shift(const ComplexMatrix& h, std::size_t iu) {
    const Complex a = h(iu - 1, iu - 1);
    const Complex b = h(iu - 1, iu);
    const Complex c = h(iu, iu - 1);
    const Complex d = h(iu, iu);
    const double scale = l1(a) + l1(b) + l1(c) + l1(d);
    if (scale == 0.0) {
        return Complex{};
    }
    const Complex as = a / scale, bs = b / scale, cs = c / scale, ds = d / scale;
    const Complex half_tr = 0.5 * (as + ds);
    const Complex det = as * ds - bs * cs;
    const Complex disc = std::sqrt(half_tr * half_tr - det);
    Complex e1 = half_tr + disc;
    Complex e2 = half_tr - disc;
    // Recompute the smaller one from the determinant to avoid cancellation.
    if (std::abs(e1) < std::abs(e2)) {
        std::swap(e1, e2);
    }
    if (e1 != Complex{}) {
        e2 = det / e1;
    }
    return scale * (std::abs(e1 - ds) < std::abs(e2 - ds) ? e1 : e2);
}

std::vector<Complex> hessenberg_qr_eigenvalues(ComplexMatrix& h) {
    const std::size_t n = h.dim();
    std::vector<Complex> eig(n);
    if (n == 0) {
        return eig;
    }
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    const double tiny = std::numeric_limits<double>::min() / kEps;
    const double hnorm = h.frobenius_norm();
    const std::size_t max_iterations = std::max<std::size_t>(30 * n, 30);
    std::size_t total = 0;
    std::size_t since_deflation = 0;
    std::size_t iu = n - 1;
    while (true) {
        if (iu == 0) {
            eig[0] = h(0, 0);
            break;
        }
        std::size_t il = iu;
        while (il > 0) {
            const double sub = l1(h(il, il - 1));
            double ref = l1(h(il - 1, il - 1)) + l1(h(il, il));
            if (ref == 0.0) {
                ref = hnorm;
            }
            if (sub <= kEps * ref || sub < tiny) {
                h(il, il - 1) = Complex{};
                break;
            }
            --il;
        }
        if (il == iu) {
            eig[iu] = h(iu, iu);
            --iu;
            since_deflation = 0;
            continue;
        }
        if (++total > max_iterations) {
            throw ConvergenceError("dense_eigenvalues: QR iteration did not converge within " +
                                   std::to_string(max_iterations) + " sweeps");
        }
        ++since_deflation;
        Complex shift;
        if (since_deflation % 10 == 0) {
            // Exceptional shift breaks cycles the Wilkinson shift can fall into.
            double ex = std::abs(h(iu, iu - 1).real());
            if (iu >= il + 2) {
                ex += std::abs(h(iu - 1, iu - 2).real());
            }
            shift = h(iu, iu) + 0.75 * ex;
        } else {
            shift = wilkinson_shift(h, iu);
        }
        Givens g = make_givens(h(il, il) - shift, h(il + 1, il));
        rotate_rows(h, g, il, il, iu);
        rotate_cols(h, g, il, il, std::min(il + 2, iu));
        for (std::size_t k = il + 1; k < iu; ++k) {
            g = make_givens(h(k, k - 1), h(k + 1, k - 1));
            rotate_rows(h, g, k, k - 1, iu);
            h(k + 1, k - 1) = Complex{};
            rotate_cols(h, g, k, il, std::min(k + 2, iu));
        }
    }
    return eig;
}

std::vector<Complex> dense_eigenvalues_only(ComplexMatrix a) {
    for (const Complex& z : a.data()) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw InvalidArgument("dense_eigenvalues: matrix has non-finite entries");
        }
    }
    balance(a);
    reduce_to_hessenberg(a);
    return hessenberg_qr_eigenvalues(a);
}

}  // namespace

Spectrum dense_eigenvalues(const ComplexMatrix& a, const DenseEigenOptions& options) {
    if (a.dim() == 0) {
        throw InvalidArgument("dense_eigenvalues: empty matrix");
    }
    Spectrum out;
    out.solver = SolverKind::DenseQr;
    out.eigenvalues = dense_eigenvalues_only(a);
    if (options.probe_residual) {
        SeededRng rng(options.probe_seed);
        ComplexMatrix g(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) {
            for (Complex& z : g.row(i)) {
                z = rng.next_complex_normal();
            }
        }
        const double gn = g.frobenius_norm();
        const double an = a.frobenius_norm();
        ComplexMatrix probe = a;
        if (an > 0.0 && gn > 0.0) {
            probe += g * Complex(1e-13 * an / gn, 0.0);
        }
        out.residual = spectrum_match_distance(out.eigenvalues, dense_eigenvalues_only(probe));
    }
    return out;
}

}  // namespace pseudoscope
