#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pseudoscope {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// Euclidean norm sqrt(x†x), computed with scaling so it never overflows.
double norm(std::span<const Complex> x);

// Conjugate inner product v†u.
Complex dot(std::span<const Complex> v, std::span<const Complex> u);

// Dense square matrix in row-major order.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t dim);

    static ComplexMatrix identity(std::size_t dim);
    static ComplexMatrix diagonal(std::span<const Complex> entries);

    std::size_t dim() const noexcept { return dim_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

    std::span<Complex> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    std::span<const Complex> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<const Complex> data() const noexcept { return data_; }

    double frobenius_norm() const;
    Complex trace() const;
    ComplexMatrix adjoint() const;

    // Matrix-vector product A·x.
    ComplexVector apply(std::span<const Complex> x) const;
    // Product A†·x without forming the adjoint.
    ComplexVector apply_adjoint(std::span<const Complex> x) const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex scale);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
    friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) = default;

private:
    std::size_t dim_ = 0;
    std::vector<Complex> data_;
};

// Upper-triangular matrix stored by diagonals: superdiagonal k holds T[i][i+k].
// Entries below the diagonal are structurally zero.
class UpperTriangularMatrix {
public:
    UpperTriangularMatrix() = default;
    explicit UpperTriangularMatrix(std::size_t dim);

    static UpperTriangularMatrix from_diagonal(std::span<const Complex> entries);

    std::size_t dim() const noexcept { return dim_; }
    // Index of the highest superdiagonal holding a nonzero entry (0 for diagonal matrices).
    std::size_t bandwidth() const noexcept { return bandwidth_; }
    bool is_diagonal() const noexcept { return bandwidth_ == 0; }

    Complex operator()(std::size_t i, std::size_t j) const;
    // Sets T[i][j]; throws DimensionMismatch for i > j or out-of-range indices.
    void set(std::size_t i, std::size_t j, Complex value);

    std::span<const Complex> diagonal() const { return superdiagonal(0); }
    // Requires k <= bandwidth(); higher diagonals are all zero.
    std::span<const Complex> superdiagonal(std::size_t k) const;

    double max_diagonal_modulus() const;
    Complex trace() const;
    ComplexMatrix dense() const;

private:
    void refresh_bandwidth();

    std::size_t dim_ = 0;
    std::vector<std::vector<Complex>> diagonals_;
    std::size_t bandwidth_ = 0;
};

// Polynomial symbol p(z) = a_0 + a_1 z + ... + a_n z^n with a_n != 0 and n >= 1.
class PolySymbol {
public:
    explicit PolySymbol(std::vector<Complex> coeffs);

    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }

    Complex operator()(Complex z) const;
    Complex derivative(Complex z) const;
    // True when only a_0 and a_n are nonzero (includes every linear symbol).
    bool is_binomial() const;

    friend bool operator==(const PolySymbol& a, const PolySymbol& b) = default;

private:
    std::vector<Complex> coeffs_;
};

// Nilpotent Jordan block: ones on the first superdiagonal.
UpperTriangularMatrix jordan_nilpotent(std::size_t d);

// Jordan block with the extra entry rho at the bottom-left corner.
ComplexMatrix jordan_corner(std::size_t d, Complex rho);

// 2d x 2d matrix: gamma1 on the first d diagonal entries, gamma2 on the last d,
// ones on the full superdiagonal and rho in the bottom-left corner.
ComplexMatrix two_block_corner(std::size_t d, Complex gamma1, Complex gamma2, Complex rho);

// Upper-triangular Toeplitz matrix p(J) of dimension d.
UpperTriangularMatrix toeplitz_from_symbol(const PolySymbol& p, std::size_t d);

struct PowerIterationOptions {
    double tolerance = 1e-12;
    // 0 selects max(10 d, 1000).
    std::size_t max_iterations = 0;
    std::uint64_t restart_seed = 0x9e3779b97f4a7c15ULL;
};

// Largest singular value via power iteration on A†A.
double spectral_norm(const ComplexMatrix& a, const PowerIterationOptions& options = {});

// v†Au.
Complex quadratic_form(std::span<const Complex> v, const ComplexMatrix& a, std::span<const Complex> u);
Complex quadratic_form(std::span<const Complex> v, const UpperTriangularMatrix& a,
                       std::span<const Complex> u);

// q_k = v†J^k u for k = 0..d-1.
ComplexVector jordan_quadratic_forms(std::span<const Complex> u, std::span<const Complex> v);

// Shifts closer than this to a diagonal entry are rejected by the resolvent solvers.
double resolvent_guard(const UpperTriangularMatrix& t);

// Solves (lambda I - T) x = b by back-substitution.
ComplexVector triangular_resolvent_solve(const UpperTriangularMatrix& t, Complex lambda,
                                         std::span<const Complex> b);

// Solution represented as values * 2^exponent, so that it survives when the
// entries of x exceed the double range.
struct ScaledVector {
    ComplexVector values;
    int exponent = 0;
};

// Back-substitution with rescaling on growth; same guard as triangular_resolvent_solve.
ScaledVector triangular_resolvent_solve_scaled(const UpperTriangularMatrix& t, Complex lambda,
                                               std::span<const Complex> b);

// x = (lambda - T)^{-1} b and y = (lambda - T)^{-2} b from one fused
// back-substitution, both stored as values * 2^exponent with a shared exponent.
// Solving for y afterwards from a rescaled x would lose the entries of x that
// underflowed, although near a high-order pole they all feed y.
struct ScaledResolventPair {
    ComplexVector x;
    ComplexVector y;
    int exponent = 0;
};

ScaledResolventPair triangular_resolvent_solve_pair_scaled(const UpperTriangularMatrix& t, Complex lambda,
                                                           std::span<const Complex> b);

}  // namespace pseudoscope
