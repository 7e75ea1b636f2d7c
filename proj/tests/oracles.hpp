#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the solvers it is meant to check.

#include "spectral_trickle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using spectral_trickle::Matrix;
using spectral_trickle::Vector;

// Cyclic Jacobi rotations; eigenvalues of a symmetric matrix, descending.
inline std::vector<double> jacobi_eigenvalues(Matrix A, double tol = 1e-14, int max_sweeps = 200)
{
    const auto n = A.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < tol * tol) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = A(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

// Facets containing tau, renormalized, keyed by the full configuration.
inline std::map<std::vector<int>, double> conditional_by_filter(const spectral_trickle::SpinSystem& sys,
                                                                const std::vector<int>& tau)
{
    std::map<std::vector<int>, double> out;
    double total = 0.0;
    for (std::size_t i = 0; i < sys.num_facets(); ++i) {
        const auto f = sys.facet(i);
        bool ok = true;
        for (std::size_t v = 0; v < tau.size(); ++v)
            if (tau[v] >= 0 && tau[v] != f[v]) ok = false;
        if (!ok) continue;
        out[std::vector<int>(f.begin(), f.end())] += sys.weight(i);
        total += sys.weight(i);
    }
    for (auto& [k, w] : out) w /= total;
    return out;
}

// lambda2 of the link skeleton of tau, built from scratch: pair marginals by
// facet filtering, normalized adjacency, Jacobi eigenvalues.
inline double link_lambda2(const spectral_trickle::SpinSystem& sys, const std::vector<int>& tau)
{
    const auto cond = conditional_by_filter(sys, tau);
    std::map<std::pair<int, int>, int> id;  // (site, spin) -> index
    for (const auto& [f, w] : cond)
        for (std::size_t v = 0; v < f.size(); ++v)
            if (tau[v] < 0) id.emplace(std::make_pair(static_cast<int>(v), f[v]), 0);
    int k = 0;
    for (auto& [key, idx] : id) idx = k++;
    Matrix A = Matrix::Zero(k, k);
    for (const auto& [f, w] : cond)
        for (std::size_t a = 0; a < f.size(); ++a)
            for (std::size_t b = 0; b < f.size(); ++b)
                if (a != b && tau[a] < 0 && tau[b] < 0)
                    A(id[{static_cast<int>(a), f[a]}], id[{static_cast<int>(b), f[b]}]) += w;
    Vector deg = A.rowwise().sum();
    Matrix N(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) N(i, j) = A(i, j) / std::sqrt(deg(i) * deg(j));
    return jacobi_eigenvalues(N)[1];
}

// Sum over walks u -> v of length <= max_len whose interior avoids
// blocked ∪ B, accumulated length by length.
inline double walk_sum(const spectral_trickle::WalkGraph& g, spectral_trickle::SiteSet blocked, int u, int v, int max_len)
{
    const int n = g.num_vertices();
    auto allowed = [&](int x) { return !g.is_boundary(x) && !blocked.contains(x); };
    double total = (u == v) ? 1.0 : 0.0;
    if (g.is_boundary(u)) return total;
    std::vector<double> mass(static_cast<std::size_t>(n), 0.0);
    for (int y = 0; y < n; ++y) mass[static_cast<std::size_t>(y)] = g.W(u, y);
    for (int len = 1; len <= max_len; ++len) {
        total += mass[static_cast<std::size_t>(v)];
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        for (int x = 0; x < n; ++x) {
            if (!allowed(x)) continue;
            for (int y = 0; y < n; ++y) next[static_cast<std::size_t>(y)] += mass[static_cast<std::size_t>(x)] * g.W(x, y);
        }
        mass = std::move(next);
    }
    return total;
}

// Full mixed derivative D_{w_1} ... D_{w_m} p of a degree-m homogeneous
// polynomial by polarization: sum over subsets S of (-1)^{m-|S|} p(sum_S w).
inline double polarized_derivative(const std::function<double(const Vector&)>& p, const std::vector<Vector>& ws)
{
    const std::size_t m = ws.size();
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        Vector s = Vector::Zero(ws.front().size());
        int count = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (mask >> i & 1U) {
                s += ws[i];
                ++count;
            }
        total += ((m - static_cast<std::size_t>(count)) % 2 ? -1.0 : 1.0) * p(s);
    }
    return total;
}

inline Matrix random_nonnegative(int n, std::mt19937_64& rng, double zero_prob = 0.3)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = unit(rng) < zero_prob ? 0.0 : unit(rng);
    return A;
}

// Random absorbing walk graph: random interior edges plus one pendant
// boundary vertex per interior vertex.
inline spectral_trickle::WalkGraph random_walk_graph(int n, std::mt19937_64& rng, double self_loop_prob = 0.3)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix W = Matrix::Zero(2 * n, 2 * n);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v)
            if ((u != v && unit(rng) < 0.7) || (u == v && unit(rng) < self_loop_prob)) W(u, v) = unit(rng);
        W(u, n + u) = 0.05 + unit(rng);
        W.row(u) /= W.row(u).sum();
        W(n + u, u) = 1.0;
    }
    std::vector<std::string> in, bd;
    for (int u = 0; u < n; ++u) {
        in.push_back("v" + std::to_string(u));
        bd.push_back("b" + std::to_string(u));
    }
    return spectral_trickle::WalkGraph::create(in, bd, W, 1e-12);
}

}  // namespace oracle
