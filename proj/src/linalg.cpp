#include "pseudoscope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/rng.hpp"

namespace pseudoscope {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": length " + std::to_string(a) +
                                " does not match " + std::to_string(b));
    }
}

double max_part(Complex z) { return std::max(std::abs(z.real()), std::abs(z.imag())); }

}  // namespace

double norm(std::span<const Complex> x) {
    double scale = 0.0;
    for (const Complex& z : x) {
        scale = std::max(scale, max_part(z));
    }
    if (scale == 0.0 || !std::isfinite(scale)) {
        return scale;
    }
    double sum = 0.0;
    for (const Complex& z : x) {
        sum += std::norm(z / scale);
    }
    return scale * std::sqrt(sum);
}

Complex dot(std::span<const Complex> v, std::span<const Complex> u) {
    require_same_length(v.size(), u.size(), "dot");
    Complex sum{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        sum += std::conj(v[i]) * u[i];
    }
    return sum;
}

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> entries) {
    ComplexMatrix m(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        m(i, i) = entries[i];
    }
    return m;
}

double ComplexMatrix::frobenius_norm() const { return norm(data_); }

Complex ComplexMatrix::trace() const {
    Complex sum{};
    for (std::size_t i = 0; i < dim_; ++i) {
        sum += (*this)(i, i);
    }
    return sum;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix m(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            m(j, i) = std::conj((*this)(i, j));
        }
    }
    return m;
}

ComplexVector ComplexMatrix::apply(std::span<const Complex> x) const {
    require_same_length(x.size(), dim_, "ComplexMatrix::apply");
    ComplexVector y(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        Complex sum{};
        const Complex* r = data_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j) {
            sum += r[j] * x[j];
        }
        y[i] = sum;
    }
    return y;
}

ComplexVector ComplexMatrix::apply_adjoint(std::span<const Complex> x) const {
    require_same_length(x.size(), dim_, "ComplexMatrix::apply_adjoint");
    ComplexVector y(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const Complex xi = x[i];
        const Complex* r = data_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j) {
            y[j] += std::conj(r[j]) * xi;
        }
    }
    return y;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_length(other.dim_, dim_, "ComplexMatrix::operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_length(other.dim_, dim_, "ComplexMatrix::operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= other.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
    for (Complex& z : data_) {
        z *= scale;
    }
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_length(a.dim_, b.dim_, "ComplexMatrix product");
    const std::size_t n = a.dim_;
    ComplexMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// UpperTriangularMatrix

UpperTriangularMatrix::UpperTriangularMatrix(std::size_t dim) : dim_(dim) {
    if (dim > 0) {
        diagonals_.emplace_back(dim);
    }
}

UpperTriangularMatrix UpperTriangularMatrix::from_diagonal(std::span<const Complex> entries) {
    UpperTriangularMatrix t(entries.size());
    std::copy(entries.begin(), entries.end(), t.diagonals_[0].begin());
    return t;
}

Complex UpperTriangularMatrix::operator()(std::size_t i, std::size_t j) const {
    if (i >= dim_ || j >= dim_) {
        throw DimensionMismatch("UpperTriangularMatrix: index out of range");
    }
    if (j < i || j - i >= diagonals_.size()) {
        return {};
    }
    return diagonals_[j - i][i];
}

void UpperTriangularMatrix::set(std::size_t i, std::size_t j, Complex value) {
    if (i >= dim_ || j >= dim_) {
        throw DimensionMismatch("UpperTriangularMatrix: index out of range");
    }
    if (j < i) {
        throw DimensionMismatch("UpperTriangularMatrix: entry (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") lies below the diagonal");
    }
    const std::size_t k = j - i;
    if (k >= diagonals_.size()) {
        if (value == Complex{}) {
            return;
        }
        for (std::size_t m = diagonals_.size(); m <= k; ++m) {
            diagonals_.emplace_back(dim_ - m);
        }
    }
    diagonals_[k][i] = value;
    refresh_bandwidth();
}

void UpperTriangularMatrix::refresh_bandwidth() {
    bandwidth_ = 0;
    for (std::size_t k = diagonals_.size(); k-- > 1;) {
        if (std::any_of(diagonals_[k].begin(), diagonals_[k].end(),
                        [](Complex z) { return z != Complex{}; })) {
            bandwidth_ = k;
            break;
        }
    }
}

std::span<const Complex> UpperTriangularMatrix::superdiagonal(std::size_t k) const {
    if (k >= diagonals_.size()) {
        throw DimensionMismatch("UpperTriangularMatrix: superdiagonal " + std::to_string(k) +
                                " is not stored");
    }
    return diagonals_[k];
}

double UpperTriangularMatrix::max_diagonal_modulus() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        m = std::max(m, std::abs(diagonals_[0][i]));
    }
    return m;
}

Complex UpperTriangularMatrix::trace() const {
    Complex sum{};
    for (std::size_t i = 0; i < dim_; ++i) {
        sum += diagonals_[0][i];
    }
    return sum;
}

ComplexMatrix UpperTriangularMatrix::dense() const {
    ComplexMatrix m(dim_);
    for (std::size_t k = 0; k < diagonals_.size(); ++k) {
        for (std::size_t i = 0; i + k < dim_; ++i) {
            m(i, i + k) = diagonals_[k][i];
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// PolySymbol

PolySymbol::PolySymbol(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) {
        throw InvalidArgument("polynomial symbol needs degree >= 1 (at least two coefficients)");
    }
    if (coeffs_.back() == Complex{}) {
        throw InvalidArgument("polynomial symbol has a zero leading coefficient");
    }
    for (const Complex& a : coeffs_) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw InvalidArgument("polynomial symbol has a non-finite coefficient");
        }
    }
}

Complex PolySymbol::operator()(Complex z) const {
    Complex acc{};
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
        acc = acc * z + coeffs_[k];
    }
    return acc;
}

Complex PolySymbol::derivative(Complex z) const {
    Complex acc{};
    for (std::size_t k = coeffs_.size(); k-- > 1;) {
        acc = acc * z + static_cast<double>(k) * coeffs_[k];
    }
    return acc;
}

bool PolySymbol::is_binomial() const {
    for (std::size_t k = 1; k + 1 < coeffs_.size(); ++k) {
        if (coeffs_[k] != Complex{}) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Structured constructors

UpperTriangularMatrix jordan_nilpotent(std::size_t d) {
    UpperTriangularMatrix j(d);
    for (std::size_t i = 0; i + 1 < d; ++i) {
        j.set(i, i + 1, 1.0);
    }
    return j;
}

ComplexMatrix jordan_corner(std::size_t d, Complex rho) {
    ComplexMatrix m = jordan_nilpotent(d).dense();
    if (d > 0) {
        m(d - 1, 0) += rho;
    }
    return m;
}

ComplexMatrix two_block_corner(std::size_t d, Complex gamma1, Complex gamma2, Complex rho) {
    const std::size_t n = 2 * d;
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = i < d ? gamma1 : gamma2;
        if (i + 1 < n) {
            m(i, i + 1) = 1.0;
        }
    }
    if (n > 0) {
        m(n - 1, 0) += rho;
    }
    return m;
}

UpperTriangularMatrix toeplitz_from_symbol(const PolySymbol& p, std::size_t d) {
    if (p.degree() >= d) {
        throw DimensionMismatch("symbol degree " + std::to_string(p.degree()) +
                                " must be below the dimension " + std::to_string(d));
    }
    UpperTriangularMatrix t(d);
    const auto a = p.coeffs();
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = 0; i + k < d; ++i) {
            t.set(i, i + k, a[k]);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Spectral norm

namespace {

// Removes the component along unit vector q; returns the remaining norm.
double orthogonalize_against(ComplexVector& x, const ComplexVector& q) {
    for (int pass = 0; pass < 2; ++pass) {
        const Complex proj = dot(q, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] -= proj * q[i];
        }
    }
    return norm(x);
}

void normalize(ComplexVector& x, double n) {
    for (Complex& z : x) {
        z /= n;
    }
}

ComplexVector random_unit_vector(std::size_t d, SeededRng& rng) {
    ComplexVector x(d);
    for (Complex& z : x) {
        z = rng.next_complex_normal();
    }
    normalize(x, norm(x));
    return x;
}

}  // namespace

double spectral_norm(const ComplexMatrix& a, const PowerIterationOptions& options) {
    const std::size_t d = a.dim();
    if (d == 0) {
        return 0.0;
    }
    for (const Complex& z : a.data()) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw Error("spectral_norm: matrix has non-finite entries");
        }
    }
    if (a.frobenius_norm() == 0.0) {
        return 0.0;
    }
    const std::size_t max_iterations =
        options.max_iterations != 0 ? options.max_iterations : std::max<std::size_t>(10 * d, 1000);
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    SeededRng rng(options.restart_seed);

    // Power iteration on A†A carried on a two-vector block with a
    // Rayleigh-Ritz step, so that nearly equal top singular values do not
    // stall convergence. With d = 1 the block is a single vector.
    ComplexVector x1(d, Complex(1.0 / sqrt_d, 0.0));
    ComplexVector x2;
    if (d > 1) {
        x2.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            x2[k] = std::polar(1.0 / sqrt_d, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                                 static_cast<double>(d));
        }
    }
    ComplexVector top = x1;
    double residual = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt == 1) {
            x1 = random_unit_vector(d, rng);
            if (d > 1) {
                x2 = random_unit_vector(d, rng);
                normalize(x2, orthogonalize_against(x2, x1));
            }
        }
        double previous = -1.0;
        for (std::size_t it = 0; it < max_iterations; ++it) {
            const ComplexVector y1 = a.apply(x1);
            ComplexVector z1 = a.apply_adjoint(y1);
            // Ritz values of A†A on span{x1, x2}: Gram matrix [[g11, g12], [conj(g12), g22]].
            const double g11 = std::pow(norm(y1), 2);
            double theta = g11;
            Complex c1 = 1.0, c2 = 0.0;
            ComplexVector z2;
            if (!x2.empty()) {
                const ComplexVector y2 = a.apply(x2);
                z2 = a.apply_adjoint(y2);
                const double g22 = std::pow(norm(y2), 2);
                const Complex g12 = dot(y1, y2);
                const double half_diff = 0.5 * (g11 - g22);
                const double root = std::hypot(half_diff, std::abs(g12));
                theta = 0.5 * (g11 + g22) + root;
                // Top Ritz vector c1 x1 + c2 x2.
                if (std::abs(g12) > 0.0) {
                    const Complex b1 = g12;
                    const Complex b2 = theta - g11;
                    const double bn = std::hypot(std::abs(b1), std::abs(b2));
                    c1 = b1 / bn;
                    c2 = b2 / bn;
                } else if (g22 > g11) {
                    c1 = 0.0;
                    c2 = 1.0;
                }
            }
            if (theta == 0.0) {
                // Block inside the null space: nothing more to learn from it.
                break;
            }
            double r2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                Complex u = c1 * x1[i];
                Complex bu = c1 * z1[i];
                if (!x2.empty()) {
                    u += c2 * x2[i];
                    bu += c2 * z2[i];
                }
                top[i] = u;
                r2 += std::norm(bu - theta * u);
            }
            residual = std::sqrt(r2) / theta;
            if (previous >= 0.0 && std::abs(theta - previous) <= options.tolerance * theta) {
                return std::sqrt(theta);
            }
            previous = theta;
            const double n1 = norm(z1);
            if (n1 == 0.0) {
                x1 = random_unit_vector(d, rng);
            } else {
                x1 = std::move(z1);
                normalize(x1, n1);
            }
            if (!x2.empty()) {
                x2 = std::move(z2);
                double n2 = orthogonalize_against(x2, x1);
                if (n2 <= 1e-13 * std::max(n1, 1e-300)) {
                    // A†A has rank one along this block; refill with a fresh direction.
                    x2 = random_unit_vector(d, rng);
                    n2 = orthogonalize_against(x2, x1);
                }
                normalize(x2, n2);
            }
        }
    }
    throw PowerIterationError("spectral_norm: power iteration did not converge", top, residual);
}

// ---------------------------------------------------------------------------
// Quadratic forms

Complex quadratic_form(std::span<const Complex> v, const ComplexMatrix& a,
                       std::span<const Complex> u) {
    require_same_length(v.size(), a.dim(), "quadratic_form (v)");
    require_same_length(u.size(), a.dim(), "quadratic_form (u)");
    return dot(v, a.apply(u));
}

Complex quadratic_form(std::span<const Complex> v, const UpperTriangularMatrix& a,
                       std::span<const Complex> u) {
    require_same_length(v.size(), a.dim(), "quadratic_form (v)");
    require_same_length(u.size(), a.dim(), "quadratic_form (u)");
    const std::size_t d = a.dim();
    Complex sum{};
    for (std::size_t k = 0; k <= a.bandwidth() && k < d; ++k) {
        const auto diag = a.superdiagonal(k);
        for (std::size_t i = 0; i + k < d; ++i) {
            sum += std::conj(v[i]) * diag[i] * u[i + k];
        }
    }
    return sum;
}

ComplexVector jordan_quadratic_forms(std::span<const Complex> u, std::span<const Complex> v) {
    require_same_length(v.size(), u.size(), "jordan_quadratic_forms");
    const std::size_t d = u.size();
    ComplexVector q(d);
    for (std::size_t k = 0; k < d; ++k) {
        Complex sum{};
        for (std::size_t l = 0; l + k < d; ++l) {
            sum += std::conj(v[l]) * u[l + k];
        }
        q[k] = sum;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Resolvent solves

double resolvent_guard(const UpperTriangularMatrix& t) { return 1e-14 * t.max_diagonal_modulus(); }

namespace {

Complex checked_pivot(const UpperTriangularMatrix& t, Complex lambda, std::size_t i, double guard) {
    const Complex pivot = lambda - t.diagonal()[i];
    if (std::abs(pivot) <= guard) {
        throw NearSingularShift("resolvent shift collides with diagonal entry " + std::to_string(i),
                                i);
    }
    return pivot;
}

}  // namespace

ComplexVector triangular_resolvent_solve(const UpperTriangularMatrix& t, Complex lambda,
                                         std::span<const Complex> b) {
    require_same_length(b.size(), t.dim(), "triangular_resolvent_solve");
    const std::size_t d = t.dim();
    const std::size_t bw = t.bandwidth();
    const double guard = resolvent_guard(t);
    std::vector<std::span<const Complex>> diags;
    for (std::size_t k = 0; k <= bw; ++k) {
        diags.push_back(t.superdiagonal(k));
    }
    ComplexVector x(d);
    for (std::size_t i = d; i-- > 0;) {
        Complex acc = b[i];
        for (std::size_t k = 1; k <= bw && i + k < d; ++k) {
            acc += diags[k][i] * x[i + k];
        }
        x[i] = acc / checked_pivot(t, lambda, i, guard);
    }
    return x;
}

ScaledVector triangular_resolvent_solve_scaled(const UpperTriangularMatrix& t, Complex lambda,
                                               std::span<const Complex> b) {
    require_same_length(b.size(), t.dim(), "triangular_resolvent_solve_scaled");
    constexpr double kBig = 0x1.0p+500;
    constexpr int kStep = 500;
    const std::size_t d = t.dim();
    const std::size_t bw = t.bandwidth();
    const double guard = resolvent_guard(t);
    std::vector<std::span<const Complex>> diags;
    for (std::size_t k = 0; k <= bw; ++k) {
        diags.push_back(t.superdiagonal(k));
    }
    ScaledVector out{ComplexVector(d), 0};
    ComplexVector& x = out.values;
    for (std::size_t i = d; i-- > 0;) {
        Complex acc = out.exponent == 0
                          ? b[i]
                          : Complex(std::ldexp(b[i].real(), -out.exponent),
                                    std::ldexp(b[i].imag(), -out.exponent));
        for (std::size_t k = 1; k <= bw && i + k < d; ++k) {
            acc += diags[k][i] * x[i + k];
        }
        x[i] = acc / checked_pivot(t, lambda, i, guard);
        if (max_part(x[i]) > kBig) {
            for (std::size_t j = i; j < d; ++j) {
                x[j] = Complex(std::ldexp(x[j].real(), -kStep), std::ldexp(x[j].imag(), -kStep));
            }
            out.exponent += kStep;
        }
    }
    return out;
}

ScaledResolventPair triangular_resolvent_solve_pair_scaled(const UpperTriangularMatrix& t, Complex lambda,
                                                           std::span<const Complex> b) {
    require_same_length(b.size(), t.dim(), "triangular_resolvent_solve_pair_scaled");
    constexpr double kBig = 0x1.0p+500;
    constexpr int kStep = 500;
    const std::size_t d = t.dim();
    const std::size_t bw = t.bandwidth();
    const double guard = resolvent_guard(t);
    std::vector<std::span<const Complex>> diags;
    for (std::size_t k = 0; k <= bw; ++k) {
        diags.push_back(t.superdiagonal(k));
    }
    ScaledResolventPair out{ComplexVector(d), ComplexVector(d), 0};
    ComplexVector& x = out.x;
    ComplexVector& y = out.y;
    auto shrink = [](Complex z) { return Complex(std::ldexp(z.real(), -kStep), std::ldexp(z.imag(), -kStep)); };
    for (std::size_t i = d; i-- > 0;) {
        Complex acc_x = out.exponent == 0
                            ? b[i]
                            : Complex(std::ldexp(b[i].real(), -out.exponent), std::ldexp(b[i].imag(), -out.exponent));
        Complex acc_y{};
        for (std::size_t k = 1; k <= bw && i + k < d; ++k) {
            acc_x += diags[k][i] * x[i + k];
            acc_y += diags[k][i] * y[i + k];
        }
        const Complex pivot = checked_pivot(t, lambda, i, guard);
        x[i] = acc_x / pivot;
        y[i] = (acc_y + x[i]) / pivot;
        if (std::max(max_part(x[i]), max_part(y[i])) > kBig) {
            for (std::size_t j = i; j < d; ++j) {
                x[j] = shrink(x[j]);
                y[j] = shrink(y[j]);
            }
            out.exponent += kStep;
        }
    }
    return out;
}

}  // namespace pseudoscope
