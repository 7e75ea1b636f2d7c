#pragma once

#include "common.hpp"
#include "complex.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace spectral_trickle {

// Simple random walk on a weighted graph.
struct WalkOperator {
    Matrix A;       // symmetric, zero diagonal
    Vector degree;  // row sums of A
    Matrix P;       // D^-1 A
    Vector mu;      // degree / total degree
    std::vector<Vertex> labels;
    std::vector<Vertex> pruned;  // zero-degree vertices dropped on construction

    int size() const { return static_cast<int>(A.rows()); }
};

inline WalkOperator make_walk_operator(const Matrix& A, const std::vector<Vertex>& labels)
{
    if (A.rows() != A.cols() || static_cast<std::size_t>(A.rows()) != labels.size())
        throw Error(ErrorKind::invalid_input, "adjacency matrix and labels disagree in size");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw Error(ErrorKind::invalid_input, "adjacency matrix is not symmetric");
    const Vector deg = A.rowwise().sum();
    std::vector<int> keep;
    WalkOperator op;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (deg(i) > 0.0)
            keep.push_back(static_cast<int>(i));
        else
            op.pruned.push_back(labels[static_cast<std::size_t>(i)]);
    }
    if (keep.empty()) throw Error(ErrorKind::empty_link, "graph has no edges");
    const auto n = static_cast<Eigen::Index>(keep.size());
    op.A.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) op.A(i, j) = A(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    op.A = 0.5 * (op.A + op.A.transpose()).eval();
    op.degree = op.A.rowwise().sum();
    op.P = op.degree.cwiseInverse().asDiagonal() * op.A;
    op.mu = op.degree / op.degree.sum();
    for (int i : keep) op.labels.push_back(labels[static_cast<std::size_t>(i)]);
    return op;
}

// Weighted 1-skeleton of a link: A(x,y) = P_{omega ~ mu_tau}[x, y in omega].
inline WalkOperator skeleton_operator(const LinkView& lv)
{
    if (lv.codim() < 2) throw Error(ErrorKind::invalid_input, "skeleton needs a link of codimension >= 2");
    const auto& verts = lv.vertices();
    const auto n = static_cast<Eigen::Index>(verts.size());
    Matrix A = Matrix::Zero(n, n);
    const auto& sites = lv.residual_sites();
    std::vector<int> idx(sites.size());
    for (std::size_t k = 0; k < lv.facets().size(); ++k) {
        const auto f = lv.system().facet(lv.facets()[k]);
        for (std::size_t i = 0; i < sites.size(); ++i)
            idx[i] = lv.index_of({sites[i], f[static_cast<std::size_t>(sites[i])]});
        const double w = lv.conditional()[k];
        for (std::size_t i = 0; i < sites.size(); ++i)
            for (std::size_t j = i + 1; j < sites.size(); ++j) {
                A(idx[i], idx[j]) += w;
                A(idx[j], idx[i]) += w;
            }
    }
    return make_walk_operator(A, verts);
}

// Bipartite graph G_{u,v} of a link on S_u ∪ S_v.
inline WalkOperator bipartite_pair_operator(const LinkView& lv, int u, int v)
{
    if (u == v) throw Error(ErrorKind::invalid_input, "pair operator needs distinct sites");
    const auto& res = lv.residual_sites();
    if (std::find(res.begin(), res.end(), u) == res.end() || std::find(res.begin(), res.end(), v) == res.end())
        throw Error(ErrorKind::invalid_input, "pair operator sites must be residual in the link");
    std::vector<Vertex> labels;
    for (const auto& x : lv.vertices())
        if (x.site == u || x.site == v) labels.push_back(x);
    const auto n = static_cast<Eigen::Index>(labels.size());
    auto pos = [&](Vertex x) {
        return static_cast<Eigen::Index>(std::lower_bound(labels.begin(), labels.end(), x) - labels.begin());
    };
    Matrix A = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < lv.facets().size(); ++k) {
        const auto f = lv.system().facet(lv.facets()[k]);
        const auto i = pos({u, f[static_cast<std::size_t>(u)]});
        const auto j = pos({v, f[static_cast<std::size_t>(v)]});
        A(i, j) += lv.conditional()[k];
        A(j, i) += lv.conditional()[k];
    }
    return make_walk_operator(A, labels);
}

// Eigenvalues of P in descending order, from the symmetric conjugate
// D^{1/2} P D^{-1/2} = D^{-1/2} A D^{-1/2}.
inline Vector walk_spectrum(const WalkOperator& op)
{
    const Vector s = op.degree.cwiseSqrt().cwiseInverse();
    const Matrix N = s.asDiagonal() * op.A * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (N + N.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "symmetric eigensolve failed");
    return es.eigenvalues().reverse();
}

inline double lambda2_selfadjoint(const WalkOperator& op)
{
    if (op.size() < 2) throw Error(ErrorKind::invalid_input, "lambda2 needs at least two vertices");
    return walk_spectrum(op)(1);
}

inline Vector symmetric_eigenvalues(const Matrix& H)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "symmetric eigensolve failed");
    return es.eigenvalues().reverse();
}

inline double lambda_max_symmetric(const Matrix& H)
{
    if (H.size() == 0) return 0.0;
    return symmetric_eigenvalues(H)(0);
}

inline double positivity_threshold(const Matrix& H, double rel = Tolerances{}.positivity_rel)
{
    return rel * std::max(1.0, H.norm());
}

inline int count_positive(const Matrix& H, double rel = Tolerances{}.positivity_rel)
{
    if (H.size() == 0) return 0;
    const double tol = positivity_threshold(H, rel);
    const Vector ev = symmetric_eigenvalues(H);
    return static_cast<int>((ev.array() > tol).count());
}

inline bool one_positive_eigenvalue(const Matrix& H, double rel = Tolerances{}.positivity_rel)
{
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff()))
        throw Error(ErrorKind::invalid_input, "matrix is not symmetric");
    return count_positive(H, rel) <= 1;
}

inline Matrix symmetrize(const Matrix& A)
{
    if (A.rows() != A.cols()) throw Error(ErrorKind::invalid_input, "symmetrize needs a square matrix");
    return A.cwiseProduct(A.transpose()).cwiseSqrt();
}

// ---------------------------------------------------------------------------
// Spectral radius of nonnegative matrices
// ---------------------------------------------------------------------------

struct SpectralRadius {
    double value = 0.0;
    double lower = 0.0;  // Collatz-Wielandt bracket, maximized over blocks
    double upper = 0.0;
    bool converged = true;
    double gelfand = 0.0;  // |A^(2^j)|_F^(1/2^j) cross-check
};

// Strongly connected components of the support graph (Tarjan, iterative).
inline std::vector<std::vector<int>> strong_components(const Matrix& A, double threshold = 0.0)
{
    const int n = static_cast<int>(A.rows());
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int counter = 0;
    for (int root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] >= 0) continue;
        std::vector<std::pair<int, int>> frames{{root, 0}};
        index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
        stack.push_back(root);
        on_stack[static_cast<std::size_t>(root)] = true;
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            const auto vs = static_cast<std::size_t>(v);
            if (next < n) {
                const int w = next++;
                const auto ws = static_cast<std::size_t>(w);
                if (!(A(v, w) > threshold)) continue;
                if (index[ws] < 0) {
                    index[ws] = low[ws] = counter++;
                    stack.push_back(w);
                    on_stack[ws] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[ws]) {
                    low[vs] = std::min(low[vs], index[ws]);
                }
                continue;
            }
            if (low[vs] == index[vs]) {
                std::vector<int> comp;
                int w = -1;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
            const int finished = v;
            frames.pop_back();
            if (!frames.empty()) {
                const auto ps = static_cast<std::size_t>(frames.back().first);
                low[ps] = std::min(low[ps], low[static_cast<std::size_t>(finished)]);
            }
        }
    }
    return comps;
}

inline double gelfand_estimate(const Matrix& A, int squarings = 24)
{
    if (A.size() == 0) return 0.0;
    Matrix M = A;
    double log_scale = 0.0;  // A^(2^j) = exp(log_scale) * M
    double estimate = 0.0;
    for (int j = 0; j <= squarings; ++j) {
        const double n = M.norm();
        if (n == 0.0) return 0.0;
        estimate = std::exp((log_scale + std::log(n)) / std::ldexp(1.0, j));
        if (j == squarings) break;
        M /= n;
        log_scale += std::log(n);
        M = M * M;
        log_scale *= 2.0;
    }
    return estimate;
}

namespace detail {

// Perron root of an irreducible nonnegative block by shifted power iteration
// with Collatz-Wielandt bounds.
inline SpectralRadius irreducible_radius(const Matrix& B, double tol, int max_iter)
{
    SpectralRadius r;
    const auto n = B.rows();
    if (n == 1) {
        r.value = r.lower = r.upper = B(0, 0);
        return r;
    }
    const double shift = std::max(B.rowwise().sum().maxCoeff(), 1e-300);
    Vector x = Vector::Ones(n) / static_cast<double>(n);
    r.converged = false;
    for (int it = 0; it < max_iter; ++it) {
        const Vector y = B * x;
        double lo = INFINITY, hi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ratio = y(i) / x(i);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        r.lower = std::max(r.lower, lo);
        r.upper = it == 0 ? hi : std::min(r.upper, hi);
        if (r.upper - r.lower <= tol * std::max(1.0, r.upper)) {
            r.converged = true;
            break;
        }
        x = y + shift * x;
        x /= x.sum();
    }
    r.value = 0.5 * (r.lower + r.upper);
    return r;
}

}  // namespace detail

inline SpectralRadius spectral_radius(const Matrix& A, double tol = 1e-10, int max_iter = 100000)
{
    if (A.rows() != A.cols()) throw Error(ErrorKind::invalid_input, "spectral radius needs a square matrix");
    if (A.size() > 0 && A.minCoeff() < 0.0) throw Error(ErrorKind::invalid_input, "spectral radius needs a nonnegative matrix");
    SpectralRadius out;
    for (const auto& comp : strong_components(A)) {
        const auto m = static_cast<Eigen::Index>(comp.size());
        Matrix B(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) B(i, j) = A(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
        const auto r = detail::irreducible_radius(B, tol, max_iter);
        if (r.value > out.value) out.value = r.value;
        out.lower = std::max(out.lower, r.lower);
        out.upper = std::max(out.upper, r.upper);
        out.converged = out.converged && r.converged;
    }
    out.gelfand = gelfand_estimate(A);
    return out;
}

// ---------------------------------------------------------------------------
// Bipartite and d-partite eigenvalue lemmas
// ---------------------------------------------------------------------------

struct BipartiteConditions {
    bool rank_one_S = false;     // D^-1/2 A D^-1/2 - S has <= 1 positive eigenvalue
    bool rank_one_Sbar = false;  // same with sqrt(sX sY) Id
    bool lambda2_bound = false;  // lambda2(D^-1 A) <= sqrt(sX sY)
    bool shifted_walk = false;   // lambda2(D^-1 A - S) <= 0

    bool all_equal() const
    {
        return rank_one_S == rank_one_Sbar && rank_one_Sbar == lambda2_bound && lambda2_bound == shifted_walk;
    }
};

// Two-colouring of the support graph; throws if an odd cycle exists.
// Vertices of each component's first vertex go to X.
inline std::vector<bool> bipartition(const Matrix& A)
{
    const auto n = A.rows();
    std::vector<int> colour(static_cast<std::size_t>(n), -1);
    for (Eigen::Index s = 0; s < n; ++s) {
        if (colour[static_cast<std::size_t>(s)] >= 0) continue;
        colour[static_cast<std::size_t>(s)] = 0;
        std::vector<Eigen::Index> queue{s};
        while (!queue.empty()) {
            const auto v = queue.back();
            queue.pop_back();
            for (Eigen::Index w = 0; w < n; ++w) {
                if (A(v, w) == 0.0) continue;
                auto& cw = colour[static_cast<std::size_t>(w)];
                const int want = 1 - colour[static_cast<std::size_t>(v)];
                if (cw < 0) {
                    cw = want;
                    queue.push_back(w);
                } else if (cw != want) {
                    throw Error(ErrorKind::not_bipartite, "graph is not bipartite");
                }
            }
        }
    }
    std::vector<bool> in_x(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) in_x[static_cast<std::size_t>(i)] = colour[static_cast<std::size_t>(i)] == 0;
    return in_x;
}

inline BipartiteConditions bipartite_equivalences(const Matrix& A, const Vector& degree, const std::vector<bool>& in_x,
                                                  double s_x, double s_y, double rel = Tolerances{}.positivity_rel)
{
    const auto n = A.rows();
    if (s_x < 0.0 || s_y < 0.0) throw Error(ErrorKind::invalid_input, "s_X and s_Y must be nonnegative");
    if (static_cast<std::size_t>(n) != in_x.size() || degree.size() != n)
        throw Error(ErrorKind::invalid_input, "bipartite inputs disagree in size");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (A(i, j) != 0.0 && in_x[static_cast<std::size_t>(i)] == in_x[static_cast<std::size_t>(j)])
                throw Error(ErrorKind::not_bipartite, "edge inside a part");
    if (!(degree.minCoeff() > 0.0)) throw Error(ErrorKind::invalid_input, "degrees must be positive");

    Vector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = in_x[static_cast<std::size_t>(i)] ? s_x : s_y;
    const double sbar = std::sqrt(s_x * s_y);
    const Vector dm = degree.cwiseSqrt().cwiseInverse();
    Matrix N = dm.asDiagonal() * A * dm.asDiagonal();
    N = 0.5 * (N + N.transpose()).eval();

    BipartiteConditions c;
    const Matrix NS = N - Matrix(s.asDiagonal());
    const Matrix NSbar = N - sbar * Matrix::Identity(n, n);
    c.rank_one_S = count_positive(NS, rel) <= 1;
    c.rank_one_Sbar = count_positive(NSbar, rel) <= 1;
    const Vector spec = symmetric_eigenvalues(N);
    c.lambda2_bound = n < 2 || spec(1) - sbar <= positivity_threshold(NSbar, rel);

    const Matrix PS = degree.cwiseInverse().asDiagonal() * A - Matrix(s.asDiagonal());
    Eigen::EigenSolver<Matrix> es(PS, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "nonsymmetric eigensolve failed");
    std::vector<double> re(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) re[static_cast<std::size_t>(i)] = es.eigenvalues()(i).real();
    std::sort(re.begin(), re.end(), std::greater<>());
    c.shifted_walk = n < 2 || re[1] <= positivity_threshold(NS, rel);
    return c;
}

inline BipartiteConditions bipartite_equivalences(const Matrix& A, const Vector& degree, double s_x, double s_y)
{
    return bipartite_equivalences(A, degree, bipartition(A), s_x, s_y);
}

// lambda_max(M) / (k - 1): the bound on lambda2 of a k-partite skeleton from
// pairwise bounds M(u,v) >= lambda2(P_{u,v}).
inline double dpartite_combine(const Matrix& M)
{
    if (M.rows() != M.cols() || M.rows() < 2) throw Error(ErrorKind::invalid_input, "M must be square with at least two parts");
    if (M.minCoeff() < 0.0) throw Error(ErrorKind::invalid_input, "M has negative entries");
    if (M.diagonal().cwiseAbs().maxCoeff() != 0.0) throw Error(ErrorKind::invalid_input, "M has a nonzero diagonal");
    return lambda_max_symmetric(M) / static_cast<double>(M.rows() - 1);
}

inline double dpartite_combine(const LinkView& lv, const Matrix& M)
{
    if (M.rows() != lv.codim()) throw Error(ErrorKind::invalid_input, "M must be indexed by the residual sites");
    return dpartite_combine(M);
}

}  // namespace spectral_trickle
