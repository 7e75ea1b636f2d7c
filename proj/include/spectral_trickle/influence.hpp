#pragma once

#include "common.hpp"
#include "complex.hpp"
#include "spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace spectral_trickle {

struct InfluenceBundle {
    Matrix I;   // I(u,v) = I_{v->u}
    Matrix cI;  // symmetric pairwise spectral influence
    double rho_I = 0.0;
    double lambda_max_cI = 0.0;
};

// Classical pairwise influence: I(u,v) is the largest total-variation change
// in the law of site u when the spin at v is switched, over all positive
// probability conditionings of V \ {u}.
inline Matrix dobrushin_matrix(const SpinSystem& sys)
{
    const int d = sys.num_sites();
    Matrix I = Matrix::Zero(d, d);
    for (int u = 0; u < d; ++u) {
        const int qu = sys.num_spins(u);
        // Unnormalized law of u given each configuration of V \ {u}.
        std::map<std::vector<int>, std::vector<double>> cond;
        for (std::size_t i = 0; i < sys.num_facets(); ++i) {
            const auto f = sys.facet(i);
            std::vector<int> key(f.begin(), f.end());
            key[static_cast<std::size_t>(u)] = kFree;
            auto& dist = cond[key];
            if (dist.empty()) dist.assign(static_cast<std::size_t>(qu), 0.0);
            dist[static_cast<std::size_t>(f[static_cast<std::size_t>(u)])] += sys.weight(i);
        }
        for (auto& [key, dist] : cond) {
            const double total = SpinSystem::accurate_sum(dist);
            for (double& p : dist) p /= total;
        }
        for (int v = 0; v < d; ++v) {
            if (v == u) continue;
            // Conditionings that agree off {u, v}.
            std::map<std::vector<int>, std::vector<const std::vector<double>*>> groups;
            for (const auto& [key, dist] : cond) {
                auto outer = key;
                outer[static_cast<std::size_t>(v)] = kFree;
                groups[outer].push_back(&dist);
            }
            double best = 0.0;
            for (const auto& [outer, dists] : groups)
                for (std::size_t a = 0; a < dists.size(); ++a)
                    for (std::size_t b = a + 1; b < dists.size(); ++b) {
                        double tv = 0.0;
                        for (int s = 0; s < qu; ++s)
                            tv += std::abs((*dists[a])[static_cast<std::size_t>(s)] - (*dists[b])[static_cast<std::size_t>(s)]);
                        best = std::max(best, 0.5 * tv);
                    }
            I(u, v) = std::min(best, 1.0);
        }
    }
    return I;
}

// lambda2 of a codim-2 link, with the two-vertex convention (value 0).
inline double pair_link_lambda2(const LinkView& lv)
{
    const WalkOperator op = skeleton_operator(lv);
    if (op.size() <= 2) return 0.0;
    return lambda2_selfadjoint(op);
}

inline Matrix spectral_influence_matrix(const SpinSystem& sys)
{
    const int d = sys.num_sites();
    Matrix cI = Matrix::Zero(d, d);
    const SiteSet all = SiteSet::all(d);
    for (int u = 0; u < d; ++u)
        for (int v = u + 1; v < d; ++v) {
            double best = 0.0;
            for (const LinkView& lv : links_on(sys, all.without(u).without(v)))
                best = std::max(best, pair_link_lambda2(lv));
            cI(u, v) = cI(v, u) = best;
        }
    return cI;
}

inline InfluenceBundle influence_bundle(const SpinSystem& sys)
{
    InfluenceBundle b;
    b.I = dobrushin_matrix(sys);
    b.cI = spectral_influence_matrix(sys);
    b.rho_I = spectral_radius(b.I).value;
    b.lambda_max_cI = lambda_max_symmetric(b.cI);
    return b;
}

struct PsiMatrix {
    Matrix Psi;
    std::vector<Vertex> labels;
    double eta = 0.0;
};

inline PsiMatrix psi_matrix(const LinkView& lv)
{
    const auto& verts = lv.vertices();
    const auto n = static_cast<Eigen::Index>(verts.size());
    // Pair marginals P[x, y in omega] for x, y at distinct sites.
    Matrix pair = Matrix::Zero(n, n);
    const auto& sites = lv.residual_sites();
    std::vector<Eigen::Index> idx(sites.size());
    for (std::size_t k = 0; k < lv.facets().size(); ++k) {
        const auto f = lv.system().facet(lv.facets()[k]);
        for (std::size_t i = 0; i < sites.size(); ++i) idx[i] = lv.index_of({sites[i], f[static_cast<std::size_t>(sites[i])]});
        for (std::size_t i = 0; i < sites.size(); ++i)
            for (std::size_t j = 0; j < sites.size(); ++j)
                if (i != j) pair(idx[i], idx[j]) += lv.conditional()[k];
    }
    PsiMatrix out;
    out.labels = verts;
    out.Psi = Matrix::Zero(n, n);
    const auto& p = lv.marginals();
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y)
            if (verts[static_cast<std::size_t>(x)].site != verts[static_cast<std::size_t>(y)].site)
                out.Psi(x, y) = pair(x, y) / p[static_cast<std::size_t>(x)] - p[static_cast<std::size_t>(y)];
    if (n == 0) return out;

    Eigen::EigenSolver<Matrix> es(out.Psi, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "eigensolve of Psi failed");
    double eta = -INFINITY;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-8 * std::max(1.0, out.Psi.norm()))
            throw Error(ErrorKind::numerical, "Psi has a non-real eigenvalue");
        eta = std::max(eta, ev.real());
    }
    out.eta = eta;
    return out;
}

inline PsiMatrix psi_matrix(const SpinSystem& sys) { return psi_matrix(link(sys, Face::empty(sys.num_sites()))); }

// Bound on |lambda| for eigenvalues lambda != ±a of [[0, A], [B, 0]] with
// constant row sums a.
inline double appendix_bipartite_bound(const Matrix& A, const Matrix& B, double a, double tol = 1e-10)
{
    if (A.rows() != B.cols() || A.cols() != B.rows()) throw Error(ErrorKind::invalid_input, "A must be m x n and B n x m");
    if (A.rows() == 0 || B.rows() == 0) throw Error(ErrorKind::invalid_input, "empty blocks");
    const Vector ra = A.rowwise().sum(), rb = B.rowwise().sum();
    if ((ra.array() - a).abs().maxCoeff() > tol || (rb.array() - a).abs().maxCoeff() > tol)
        throw Error(ErrorKind::invalid_input, "row sums are not constant");
    auto spread = [](const Matrix& X) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (Eigen::Index j = i + 1; j < X.rows(); ++j) best = std::max(best, (X.row(i) - X.row(j)).cwiseAbs().sum());
        return best;
    };
    return 0.5 * std::sqrt(spread(A) * spread(B));
}

struct IvsCIReport {
    double lambda_max_cI = 0.0;
    double rho_cI = 0.0;
    double rho_I = 0.0;
    bool lambda_equals_rho = false;  // lambda_max(cI) = rho(cI)
    bool rho_le_rho_I = false;       // rho(cI) <= rho(I)
    bool cI_le_Ibar = false;         // entrywise cI <= symmetrize(I)
    bool holds() const { return lambda_equals_rho && rho_le_rho_I; }
};

inline IvsCIReport verify_I_vs_cI(const Matrix& I, const Matrix& cI, double tol = Tolerances{}.eigen)
{
    IvsCIReport r;
    r.lambda_max_cI = lambda_max_symmetric(cI);
    r.rho_cI = spectral_radius(cI).value;
    r.rho_I = spectral_radius(I).value;
    r.lambda_equals_rho = std::abs(r.lambda_max_cI - r.rho_cI) <= tol;
    r.rho_le_rho_I = r.rho_cI <= r.rho_I + tol;
    r.cI_le_Ibar = (cI - symmetrize(I)).maxCoeff() <= tol;
    return r;
}

inline IvsCIReport verify_I_vs_cI(const SpinSystem& sys)
{
    if (!is_connected(sys).connected) throw Error(ErrorKind::invalid_input, "system is not connected");
    return verify_I_vs_cI(dobrushin_matrix(sys), spectral_influence_matrix(sys));
}

}  // namespace spectral_trickle
