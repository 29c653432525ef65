#include "pseudoscope/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "pseudoscope/errors.hpp"

namespace pseudoscope {

std::string_view to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::JordanPoly:
            return "jordan-poly";
        case SolverKind::ResolventAberth:
            return "resolvent-aberth";
        case SolverKind::DenseQr:
            return "dense-qr";
    }
    return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
    if (name == "jordan-poly") {
        return SolverKind::JordanPoly;
    }
    if (name == "resolvent-aberth") {
        return SolverKind::ResolventAberth;
    }
    if (name == "dense-qr") {
        return SolverKind::DenseQr;
    }
    throw InvalidArgument("unknown solver '" + std::string(name) +
                          "' (expected jordan-poly, resolvent-aberth or dense-qr)");
}

MonicPolynomial::MonicPolynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
    for (const Complex& c : coeffs_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw InvalidArgument("MonicPolynomial: non-finite coefficient");
        }
    }
}

Complex MonicPolynomial::operator()(Complex z) const {
    Complex acc = 1.0;
    for (std::size_t j = coeffs_.size(); j-- > 0;) {
        acc = acc * z + coeffs_[j];
    }
    return acc;
}

MonicPolynomial charpoly_jordan_rank1(const RankOnePerturbation& p) {
    const ComplexVector q = jordan_quadratic_forms(p.u(), p.v());
    const std::size_t d = q.size();
    std::vector<Complex> c(d);
    for (std::size_t j = 0; j < d; ++j) {
        c[j] = -p.scale() * q[d - 1 - j];
    }
    return MonicPolynomial(std::move(c));
}

// ---------------------------------------------------------------------------
// Bottleneck matching

namespace {

bool lexicographic(Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

// Hopcroft-Karp on the bipartite graph {(i, j) : dist(i, j) <= threshold}.
class ThresholdMatcher {
public:
    ThresholdMatcher(const std::vector<double>& dist, std::size_t n) : dist_(dist), n_(n) {}

    bool perfect(double threshold) {
        adj_.assign(n_, {});
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (dist_[i * n_ + j] <= threshold) {
                    adj_[i].push_back(j);
                }
            }
            if (adj_[i].empty()) {
                return false;
            }
        }
        match_left_.assign(n_, kNone);
        match_right_.assign(n_, kNone);
        std::size_t matched = 0;
        while (bfs()) {
            for (std::size_t i = 0; i < n_; ++i) {
                if (match_left_[i] == kNone && dfs(i)) {
                    ++matched;
                }
            }
        }
        return matched == n_;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    bool bfs() {
        layer_.assign(n_, kNone);
        std::queue<std::size_t> queue;
        for (std::size_t i = 0; i < n_; ++i) {
            if (match_left_[i] == kNone) {
                layer_[i] = 0;
                queue.push(i);
            }
        }
        bool found = false;
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop();
            for (std::size_t j : adj_[i]) {
                const std::size_t k = match_right_[j];
                if (k == kNone) {
                    found = true;
                } else if (layer_[k] == kNone) {
                    layer_[k] = layer_[i] + 1;
                    queue.push(k);
                }
            }
        }
        return found;
    }

    bool dfs(std::size_t i) {
        for (std::size_t j : adj_[i]) {
            const std::size_t k = match_right_[j];
            if (k == kNone || (layer_[k] == layer_[i] + 1 && dfs(k))) {
                match_left_[i] = j;
                match_right_[j] = i;
                return true;
            }
        }
        layer_[i] = kNone;
        return false;
    }

    const std::vector<double>& dist_;
    std::size_t n_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> match_left_;
    std::vector<std::size_t> match_right_;
    std::vector<std::size_t> layer_;
};

}  // namespace

double spectrum_match_distance(std::span<const Complex> a_in, std::span<const Complex> b_in) {
    if (a_in.size() != b_in.size()) {
        throw DimensionMismatch("spectrum_match_distance: spectra have " +
                                std::to_string(a_in.size()) + " and " +
                                std::to_string(b_in.size()) + " eigenvalues");
    }
    const std::size_t n = a_in.size();
    if (n == 0) {
        return 0.0;
    }
    std::vector<Complex> a(a_in.begin(), a_in.end());
    std::vector<Complex> b(b_in.begin(), b_in.end());
    std::sort(a.begin(), a.end(), lexicographic);
    std::sort(b.begin(), b.end(), lexicographic);

    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dist[i * n + j] = std::abs(a[i] - b[j]);
        }
    }
    // Greedy nearest-unused pairing gives an upper bound.
    double upper = 0.0;
    {
        std::vector<bool> used(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = n;
            for (std::size_t j = 0; j < n; ++j) {
                if (!used[j] && (best == n || dist[i * n + j] < dist[i * n + best])) {
                    best = j;
                }
            }
            used[best] = true;
            upper = std::max(upper, dist[i * n + best]);
        }
    }
    // Every point must reach its nearest partner, giving a lower bound.
    double lower = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_min = std::numeric_limits<double>::infinity();
        double col_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            row_min = std::min(row_min, dist[i * n + j]);
            col_min = std::min(col_min, dist[j * n + i]);
        }
        lower = std::max({lower, row_min, col_min});
    }
    std::vector<double> candidates;
    for (double x : dist) {
        if (x >= lower && x <= upper) {
            candidates.push_back(x);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    ThresholdMatcher matcher(dist, n);
    std::size_t lo = 0;
    std::size_t hi = candidates.size() - 1;  // candidates.back() == upper is feasible
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (matcher.perfect(candidates[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return candidates[lo];
}

double spectrum_match_distance(const Spectrum& a, const Spectrum& b) {
    return spectrum_match_distance(a.eigenvalues, b.eigenvalues);
}

}  // namespace pseudoscope
