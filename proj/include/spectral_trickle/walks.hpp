#pragma once

#include "common.hpp"
#include "complex.hpp"
#include "spectra.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace spectral_trickle {

// Absorbing random-walk graph. Vertices 0..n-1 are interior (aligned with the
// sites of a system), n..n+b-1 are boundary. Walks stop on reaching B; rows of
// boundary vertices are stored but never used by the solvers.
class WalkGraph {
public:
    static WalkGraph create(std::vector<std::string> interior, std::vector<std::string> boundary, Matrix W,
                            double tol = Tolerances{}.stochastic)
    {
        const auto n = static_cast<Eigen::Index>(interior.size() + boundary.size());
        if (interior.empty()) throw Error(ErrorKind::invalid_input, "walk graph needs interior vertices");
        if (interior.size() > 64) throw Error(ErrorKind::invalid_input, "at most 64 interior vertices are supported");
        if (W.rows() != n || W.cols() != n) throw Error(ErrorKind::invalid_input, "walk matrix has the wrong size");
        if (!W.allFinite() || W.minCoeff() < 0.0) throw Error(ErrorKind::invalid_input, "walk weights must be finite and >= 0");
        for (std::size_t i = 0; i < interior.size(); ++i) {
            const double s = W.row(static_cast<Eigen::Index>(i)).sum();
            if (std::abs(s - 1.0) > tol)
                throw Error(ErrorKind::invalid_input, "row of '" + interior[i] + "' sums to " + std::to_string(s) + ", not 1");
        }
        WalkGraph g;
        g.interior_ = std::move(interior);
        g.boundary_ = std::move(boundary);
        g.W_ = std::move(W);
        return g;
    }

    int num_interior() const { return static_cast<int>(interior_.size()); }
    int num_boundary() const { return static_cast<int>(boundary_.size()); }
    int num_vertices() const { return num_interior() + num_boundary(); }
    bool is_boundary(int x) const { return x >= num_interior(); }
    const Matrix& W() const { return W_; }
    double W(int a, int b) const { return W_(a, b); }
    const std::vector<std::string>& interior_names() const { return interior_; }
    const std::vector<std::string>& boundary_names() const { return boundary_; }
    std::string name(int x) const
    {
        return is_boundary(x) ? boundary_[static_cast<std::size_t>(x - num_interior())] : interior_[static_cast<std::size_t>(x)];
    }
    int index(const std::string& name) const
    {
        for (int x = 0; x < num_vertices(); ++x)
            if (this->name(x) == name) return x;
        throw Error(ErrorKind::invalid_input, "unknown walk vertex '" + name + "'");
    }

private:
    std::vector<std::string> interior_;
    std::vector<std::string> boundary_;
    Matrix W_;
};

struct Absorbing {
    bool ok = true;
    std::vector<int> unreachable;  // interior vertices with no path to B ∪ extra
};

inline Absorbing validate_absorbing(const WalkGraph& g, SiteSet extra = {})
{
    const int n = g.num_interior();
    std::vector<bool> reaches(static_cast<std::size_t>(g.num_vertices()), false);
    for (int x = 0; x < g.num_vertices(); ++x) reaches[static_cast<std::size_t>(x)] = g.is_boundary(x) || extra.contains(x);
    // Backward fixed point over interior vertices.
    for (bool changed = true; changed;) {
        changed = false;
        for (int u = 0; u < n; ++u) {
            if (reaches[static_cast<std::size_t>(u)]) continue;
            for (int x = 0; x < g.num_vertices(); ++x) {
                if (g.W(u, x) > 0.0 && reaches[static_cast<std::size_t>(x)]) {
                    reaches[static_cast<std::size_t>(u)] = changed = true;
                    break;
                }
            }
        }
    }
    Absorbing out;
    for (int u = 0; u < n; ++u)
        if (!reaches[static_cast<std::size_t>(u)]) out.unreachable.push_back(u);
    out.ok = out.unreachable.empty();
    return out;
}

// Walk graph from the optional "walk" section of a system document; interior
// vertices are the system's sites in order.
inline WalkGraph walk_from_json(const nlohmann::json& jwalk, const SpinSystem& sys)
{
    try {
        std::vector<std::string> interior = sys.site_names();
        std::vector<std::string> boundary = jwalk.at("boundary").get<std::vector<std::string>>();
        std::map<std::string, int> idx;
        for (std::size_t i = 0; i < interior.size(); ++i) idx[interior[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < boundary.size(); ++i)
            if (!idx.emplace(boundary[i], static_cast<int>(interior.size() + i)).second)
                throw Error(ErrorKind::invalid_input, "walk vertex name '" + boundary[i] + "' is used twice");
        const auto n = static_cast<Eigen::Index>(idx.size());
        Matrix W = Matrix::Zero(n, n);
        for (const auto& e : jwalk.at("edges")) {
            const auto from = e.at("from").get<std::string>();
            const auto to = e.at("to").get<std::string>();
            if (!idx.count(from) || !idx.count(to)) throw Error(ErrorKind::invalid_input, "walk edge names an unknown vertex");
            W(idx[from], idx[to]) += e.at("p").get<double>();
        }
        return WalkGraph::create(std::move(interior), std::move(boundary), std::move(W));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("malformed walk section: ") + e.what());
    }
}

inline nlohmann::json to_json(const WalkGraph& g)
{
    nlohmann::json j;
    j["boundary"] = g.boundary_names();
    j["edges"] = nlohmann::json::array();
    for (int a = 0; a < g.num_vertices(); ++a)
        for (int b = 0; b < g.num_vertices(); ++b)
            if (g.W(a, b) > 0.0) j["edges"].push_back({{"from", g.name(a)}, {"to", g.name(b)}, {"p", g.W(a, b)}});
    return j;
}

// ---------------------------------------------------------------------------
// Hitting probabilities
// ---------------------------------------------------------------------------

// For every start x, the total weight of walks x -> v whose interior avoids
// U ∪ B ∪ {v}, i.e. W_{U∪{v}}[x -> v]. Boundary starts only have the trivial walk.
inline Vector first_passage_to(const WalkGraph& g, SiteSet U, int v)
{
    const int n = g.num_interior();
    std::vector<int> free;
    for (int x = 0; x < n; ++x)
        if (x != v && !U.contains(x)) free.push_back(x);
    const auto f = static_cast<Eigen::Index>(free.size());

    Vector through = Vector::Zero(f);  // (I - W_FF)^-1 W(F, v)
    if (f > 0) {
        // Every free vertex must be able to leave F, otherwise I - W_FF is singular.
        SiteSet blocked = U;
        if (v < n) blocked = blocked.with(v);
        if (!validate_absorbing(g, blocked).ok)
            throw Error(ErrorKind::not_absorbing, "walk graph is not absorbing for this query");
        Matrix IminusN = Matrix::Identity(f, f);
        Vector c(f);
        for (Eigen::Index i = 0; i < f; ++i) {
            c(i) = g.W(free[static_cast<std::size_t>(i)], v);
            for (Eigen::Index j = 0; j < f; ++j) IminusN(i, j) -= g.W(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
        }
        through = IminusN.partialPivLu().solve(c);
        if (!through.allFinite()) throw Error(ErrorKind::numerical, "hitting solve produced non-finite values");
    }

    Vector out = Vector::Zero(g.num_vertices());
    for (int x = 0; x < g.num_vertices(); ++x) {
        if (g.is_boundary(x)) {
            out(x) = x == v ? 1.0 : 0.0;
            continue;
        }
        double s = (x == v ? 1.0 : 0.0) + g.W(x, v);
        for (Eigen::Index j = 0; j < f; ++j) s += g.W(x, free[static_cast<std::size_t>(j)]) * through(j);
        out(x) = clamp_roundoff(s);
    }
    return out;
}

inline double first_passage(const WalkGraph& g, SiteSet U, int u, int v) { return first_passage_to(g, U, v)(u); }

// W_U[u -> v]: walks from u to v whose interior avoids U ∪ B.
inline double hitting_prob(const WalkGraph& g, SiteSet U, int u, int v)
{
    if (u < 0 || v < 0 || u >= g.num_vertices() || v >= g.num_vertices())
        throw Error(ErrorKind::out_of_range, "hitting query names an unknown vertex");
    if (g.is_boundary(v) || U.contains(v)) return first_passage(g, U, u, v);
    if (g.is_boundary(u) && u != v) return 0.0;
    const Vector fp = first_passage_to(g, U, v);
    const double first_return = fp(v) - 1.0;
    if (!(first_return < 1.0)) throw Error(ErrorKind::not_absorbing, "walk returns to its start almost surely");
    const double loop = 1.0 / (1.0 - first_return);
    return u == v ? loop : fp(u) * loop;
}

struct HittingMatrix {
    std::vector<int> sites;  // residual interior vertices, ascending
    Matrix Mprime;           // Mprime(i,j) = W_{extra ∪ {j}}[i -> j], zero diagonal
    Matrix M;                // symmetrize(Mprime)
};

inline HittingMatrix hitting_matrix(const WalkGraph& g, SiteSet extra)
{
    HittingMatrix h;
    for (int x = 0; x < g.num_interior(); ++x)
        if (!extra.contains(x)) h.sites.push_back(x);
    const auto m = static_cast<Eigen::Index>(h.sites.size());
    h.Mprime = Matrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Vector fp = first_passage_to(g, extra, h.sites[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < m; ++i)
            if (i != j) h.Mprime(i, j) = fp(h.sites[static_cast<std::size_t>(i)]);
    }
    h.M = symmetrize(h.Mprime);
    return h;
}

// E_{Q ~ W[u]}[d(Q) - 2] with extra merged into the boundary.
inline double expected_distinct(const WalkGraph& g, SiteSet extra, int u)
{
    if (u < 0 || u >= g.num_interior() || extra.contains(u)) throw Error(ErrorKind::invalid_input, "start must be a residual interior vertex");
    double s = 0.0;
    for (int v = 0; v < g.num_interior(); ++v)
        if (v != u && !extra.contains(v)) s += first_passage(g, extra, u, v);
    return s;
}

// Probability of ending at each vertex of B ∪ extra, indexed by vertex id.
inline Vector absorption_probabilities(const WalkGraph& g, SiteSet extra, int u)
{
    Vector p = Vector::Zero(g.num_vertices());
    for (int b = 0; b < g.num_vertices(); ++b)
        if (g.is_boundary(b) || extra.contains(b)) p(b) = b == u ? 1.0 : first_passage(g, extra, u, b);
    if (g.is_boundary(u) || extra.contains(u)) {
        p.setZero();
        p(u) = 1.0;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct WalkRecord {
    std::vector<int> vertices;
    std::size_t length() const { return vertices.size(); }  // |Q|
    int distinct = 0;                                       // d(Q)
};

class WalkSampler {
public:
    WalkSampler(const WalkGraph& g, SiteSet extra) : g_(&g), extra_(extra)
    {
        const int n = g.num_vertices();
        cumulative_.resize(static_cast<std::size_t>(g.num_interior()));
        for (int u = 0; u < g.num_interior(); ++u) {
            auto& row = cumulative_[static_cast<std::size_t>(u)];
            row.resize(static_cast<std::size_t>(n));
            double s = 0.0;
            for (int x = 0; x < n; ++x) row[static_cast<std::size_t>(x)] = (s += g.W(u, x));
        }
    }

    WalkRecord sample(int u, std::mt19937_64& rng, std::size_t step_cap = 10'000'000) const
    {
        WalkRecord rec;
        rec.vertices.push_back(u);
        std::vector<bool> seen(static_cast<std::size_t>(g_->num_vertices()), false);
        seen[static_cast<std::size_t>(u)] = true;
        rec.distinct = 1;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int x = u;
        while (!(g_->is_boundary(x) || (extra_.contains(x) && rec.vertices.size() > 1))) {
            if (rec.vertices.size() > step_cap) throw Error(ErrorKind::not_absorbing, "walk exceeded the step cap");
            const auto& row = cumulative_[static_cast<std::size_t>(x)];
            const double r = unit(rng) * row.back();
            x = static_cast<int>(std::upper_bound(row.begin(), row.end(), r) - row.begin());
            x = std::min(x, g_->num_vertices() - 1);
            rec.vertices.push_back(x);
            if (!seen[static_cast<std::size_t>(x)]) {
                seen[static_cast<std::size_t>(x)] = true;
                ++rec.distinct;
            }
        }
        return rec;
    }

private:
    const WalkGraph* g_;
    SiteSet extra_;
    std::vector<std::vector<double>> cumulative_;
};

inline WalkRecord sample_walk(const WalkGraph& g, SiteSet extra, int u, std::uint64_t seed)
{
    if (u < 0 || u >= g.num_interior() || extra.contains(u)) throw Error(ErrorKind::invalid_input, "start must be a residual interior vertex");
    std::mt19937_64 rng(seed);
    return WalkSampler(g, extra).sample(u, rng);
}

// The walk of the path-complex argument: interior sites in `order`, boundary
// vertices at both ends, every step left or right with probability 1/2.
inline WalkGraph path_walk(const std::vector<std::string>& sites, const std::vector<int>& order)
{
    const int d = static_cast<int>(sites.size());
    if (static_cast<int>(order.size()) != d) throw Error(ErrorKind::invalid_input, "ordering must list every site once");
    std::vector<int> seen(static_cast<std::size_t>(d), 0);
    for (int v : order) {
        if (v < 0 || v >= d || seen[static_cast<std::size_t>(v)]++) throw Error(ErrorKind::invalid_input, "ordering must be a permutation");
    }
    const int left = d, right = d + 1;
    Matrix W = Matrix::Zero(d + 2, d + 2);
    for (int i = 0; i < d; ++i) {
        const int v = order[static_cast<std::size_t>(i)];
        W(v, i == 0 ? left : order[static_cast<std::size_t>(i - 1)]) += 0.5;
        W(v, i + 1 == d ? right : order[static_cast<std::size_t>(i + 1)]) += 0.5;
    }
    W(left, order.front()) = 1.0;
    W(right, order.back()) = 1.0;
    return WalkGraph::create(sites, {"left", "right"}, W);
}

}  // namespace spectral_trickle
