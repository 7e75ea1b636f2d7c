#pragma once

// Commutative pi maps built from hitting probabilities, the recursive
// polynomials p_sigma, their Hessians and directional derivatives.

#include "common.hpp"
#include "complex.hpp"
#include "spectra.hpp"
#include "walks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace spectral_trickle {

struct FaceHash {
    std::size_t operator()(const Face& f) const noexcept
    {
        std::size_t h = 1469598103934665603ULL;
        for (int s : f.spins()) h = (h ^ static_cast<std::size_t>(s + 2)) * 1099511628211ULL;
        return h;
    }
};

// Vectors over X_sigma(1) are stored densely over all vertices of the system
// (global vertex ids); entries outside the link are ignored and kept at zero.
class LorentzContext {
public:
    static constexpr int kMaxSites = 12;
    static constexpr double kFaceTableBudget = 5e7;

    struct FaceInfo {
        double mass = 0.0;                // mu-probability of containing the face
        std::vector<int> link_vertices;   // global ids of X_face(1), ascending
    };

    LorentzContext(const SpinSystem& sys, const WalkGraph& walk) : sys_(&sys), walk_(&walk)
    {
        const int d = sys.num_sites();
        if (walk.num_interior() != d) throw Error(ErrorKind::invalid_input, "walk graph interior must match the sites");
        if (d > kMaxSites) throw Error(ErrorKind::gate_exceeded, "pi-map tables are limited to 12 sites");
        const std::size_t masks = std::size_t{1} << d;
        fp_.assign(masks * static_cast<std::size_t>(d), Vector());
        for (std::size_t m = 0; m < masks; ++m) {
            const SiteSet S(m);
            for (int u = 0; u < d; ++u) {
                if (S.contains(u)) continue;
                fp_[m * static_cast<std::size_t>(d) + static_cast<std::size_t>(u)] = first_passage_to(walk, S, u).head(d);
            }
        }
    }

    const SpinSystem& system() const { return *sys_; }
    const WalkGraph& walk() const { return *walk_; }
    int num_vertices() const { return sys_->vertex_count(); }

    // phi_S(v, u) = W_{S ∪ {u}}[v -> u].
    double phi(SiteSet S, int v, int u) const
    {
        double value = first_passage_vec(S, u)(v);
        if (!overrides_.empty()) {
            const auto it = overrides_.find({S.bits(), v, u});
            if (it != overrides_.end()) value += it->second;
        }
        return value;
    }

    // W_S[u -> w] with revisits of w allowed.
    double hit(SiteSet S, int u, int w) const
    {
        const Vector& fp = first_passage_vec(S, w);
        const double loop = 1.0 / (2.0 - fp(w));
        return u == w ? loop : fp(u) * loop;
    }

    // Negative-control hook: shifts one phi value, breaking the walk structure.
    void override_phi(SiteSet S, int v, int u, double delta) { overrides_[{S.bits(), v, u}] += delta; }
    void clear_overrides() { overrides_.clear(); }

    const FaceInfo& face(const Face& f) const
    {
        build_face_table();
        const auto it = faces_.find(f);
        if (it == faces_.end()) throw Error(ErrorKind::empty_link, "face " + sys_->face_label(f) + " has zero probability");
        return it->second;
    }
    bool has_face(const Face& f) const
    {
        build_face_table();
        return faces_.count(f) > 0;
    }
    const std::vector<int>& link_vertices(const Face& f) const { return face(f).link_vertices; }
    double mass(const Face& f) const { return face(f).mass; }
    Face extend(const Face& f, int vertex_id) const { return f.with(sys_->vertex(vertex_id)); }

    // Faces rho ⊇ sigma (including sigma) in face order.
    std::vector<Face> faces_above(const Face& sigma) const
    {
        build_face_table();
        std::vector<Face> out;
        for (const auto& [f, info] : faces_) {
            bool above = true;
            for (int v = 0; v < sigma.num_sites() && above; ++v)
                if (sigma.assigned(v) && f.spin(v) != sigma.spin(v)) above = false;
            if (above) out.push_back(f);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    const Vector& first_passage_vec(SiteSet S, int u) const
    {
        const Vector& fp = fp_[static_cast<std::size_t>(S.bits()) * static_cast<std::size_t>(sys_->num_sites()) + static_cast<std::size_t>(u)];
        if (fp.size() == 0) throw Error(ErrorKind::invalid_input, "hitting target lies in the blocked set");
        return fp;
    }

    void build_face_table() const
    {
        std::call_once(faces_once_, [this] {
            const int d = sys_->num_sites();
            if (std::ldexp(static_cast<double>(sys_->num_facets()), d) > kFaceTableBudget)
                throw Error(ErrorKind::gate_exceeded, "face table exceeds the enumeration budget");
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
                for (const LinkView& lv : links_on(*sys_, SiteSet(m))) {
                    FaceInfo info;
                    info.mass = lv.mass();
                    for (const auto& x : lv.vertices()) info.link_vertices.push_back(sys_->vertex_id(x));
                    faces_.emplace(lv.base(), std::move(info));
                }
            }
        });
    }

    const SpinSystem* sys_;
    const WalkGraph* walk_;
    std::vector<Vector> fp_;  // [mask * d + target] -> first passage over interior sites
    std::map<std::tuple<std::uint64_t, int, int>, double> overrides_;
    mutable std::once_flag faces_once_;
    mutable std::unordered_map<Face, FaceInfo, FaceHash> faces_;
};

// ---------------------------------------------------------------------------
// pi maps
// ---------------------------------------------------------------------------

// pi_{sigma + x}(t) on X_{sigma ∪ {x}}(1).
inline Vector pi_apply(const LorentzContext& ctx, const Face& sigma, int x, const Vector& t)
{
    const auto& sys = ctx.system();
    const auto& from = ctx.link_vertices(sigma);
    if (!std::binary_search(from.begin(), from.end(), x)) throw Error(ErrorKind::invalid_input, "vertex is not in the link");
    const Vertex vx = sys.vertex(x);
    const SiteSet S = sigma.sites();
    Vector out = Vector::Zero(t.size());
    for (int y : ctx.link_vertices(sigma.with(vx))) out(y) = t(y) - ctx.phi(S, sys.vertex(y).site, vx.site) * t(x);
    return out;
}

// pi_{sigma + tau}(t), applying the vertices of tau \ sigma in site order.
inline Vector pi_to_face(const LorentzContext& ctx, const Face& sigma, const Face& tau, Vector t)
{
    Face cur = sigma;
    for (int v = 0; v < tau.num_sites(); ++v) {
        if (!tau.assigned(v) || sigma.assigned(v)) continue;
        const int x = ctx.system().vertex_id({v, tau.spin(v)});
        t = pi_apply(ctx, cur, x, t);
        cur = cur.with({v, tau.spin(v)});
    }
    return t;
}

inline bool check_commutativity(const LorentzContext& ctx, const Face& sigma, int x, int y, int trials, std::uint64_t seed,
                                double tol = Tolerances{}.algebraic)
{
    const Vertex vx = ctx.system().vertex(x), vy = ctx.system().vertex(y);
    const Face both = sigma.with(vx).with(vy);
    if (vx.site == vy.site || !ctx.has_face(both)) throw Error(ErrorKind::invalid_input, "vertices do not form an edge of the link");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto& support = ctx.link_vertices(sigma);
    const auto& target = ctx.link_vertices(both);
    for (int trial = 0; trial < trials; ++trial) {
        Vector t = Vector::Zero(ctx.num_vertices());
        for (int z : support) t(z) = unit(rng);
        const Vector a = pi_apply(ctx, sigma.with(vx), y, pi_apply(ctx, sigma, x, t));
        const Vector b = pi_apply(ctx, sigma.with(vy), x, pi_apply(ctx, sigma, y, t));
        for (int z : target)
            if (std::abs(a(z) - b(z)) > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// alpha vectors and cones
// ---------------------------------------------------------------------------

// alpha_sigma(w)_{us} = W_{V(sigma)}[u -> w] on X_sigma(1).
inline Vector alpha_vector(const LorentzContext& ctx, const Face& sigma, int w)
{
    if (sigma.assigned(w)) throw Error(ErrorKind::invalid_input, "alpha target must be a free site");
    const SiteSet S = sigma.sites();
    Vector a = Vector::Zero(ctx.num_vertices());
    for (int x : ctx.link_vertices(sigma)) a(x) = ctx.hit(S, ctx.system().vertex(x).site, w);
    for (int x : ctx.link_vertices(sigma))
        if (ctx.system().vertex(x).site == w && a(x) < 1.0 - Tolerances{}.algebraic)
            throw Error(ErrorKind::numerical, "alpha entry at its own site is below 1");
    return a;
}

inline Vector alpha_sum(const LorentzContext& ctx, const Face& sigma)
{
    Vector s = Vector::Zero(ctx.num_vertices());
    for (int w : sigma.free_sites()) s += alpha_vector(ctx, sigma, w);
    return s;
}

enum class ConeMode { strict, closure };

inline bool cone_member(const LorentzContext& ctx, const Face& sigma, const Vector& v, ConeMode mode, int max_codim = 6)
{
    if (sigma.codim() > max_codim) throw Error(ErrorKind::gate_exceeded, "cone membership is limited to codimension 6");
    for (const Face& rho : ctx.faces_above(sigma)) {
        if (rho.codim() == 0) continue;
        const Vector t = pi_to_face(ctx, sigma, rho, v);
        for (int x : ctx.link_vertices(rho)) {
            if (mode == ConeMode::strict ? !(t(x) > 0.0) : t(x) < -1e-12) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// The polynomials p_sigma
// ---------------------------------------------------------------------------

namespace detail {

inline double poly_eval_rec(const LorentzContext& ctx, const Face& tau, const Vector& t,
                            std::unordered_map<Face, double, FaceHash>* memo)
{
    const int k = tau.codim();
    if (k == 0) return ctx.mass(tau);
    if (memo) {
        const auto it = memo->find(tau);
        if (it != memo->end()) return it->second;
    }
    double s = 0.0;
    for (int x : ctx.link_vertices(tau)) {
        if (t(x) == 0.0) continue;
        s += t(x) * poly_eval_rec(ctx, ctx.extend(tau, x), pi_apply(ctx, tau, x, t), memo);
    }
    s /= k;
    if (memo) memo->emplace(tau, s);
    return s;
}

}  // namespace detail

// p_sigma(t). Memoizing by face is valid because the pi maps commute, so the
// argument reaching a face does not depend on the order of extension.
inline double poly_eval(const LorentzContext& ctx, const Face& sigma, const Vector& t, bool memoize = true)
{
    std::unordered_map<Face, double, FaceHash> memo;
    return detail::poly_eval_rec(ctx, sigma, t, memoize ? &memo : nullptr);
}

// Sparse polynomial over global vertex ids; monomials are sorted id lists.
class Polynomial {
public:
    using Monomial = std::vector<int>;

    void add(Monomial m, double c)
    {
        std::sort(m.begin(), m.end());
        const double v = (terms_[m] += c);
        if (v == 0.0) terms_.erase(m);
    }
    const std::map<Monomial, double>& terms() const { return terms_; }
    double coefficient(Monomial m) const
    {
        std::sort(m.begin(), m.end());
        const auto it = terms_.find(m);
        return it == terms_.end() ? 0.0 : it->second;
    }

    double evaluate(const Vector& t) const
    {
        double s = 0.0;
        for (const auto& [m, c] : terms_) {
            double p = c;
            for (int x : m) p *= t(x);
            s += p;
        }
        return s;
    }

    Polynomial derivative(int x) const
    {
        Polynomial out;
        for (const auto& [m, c] : terms_) {
            const auto power = std::count(m.begin(), m.end(), x);
            if (power == 0) continue;
            Monomial rest = m;
            rest.erase(std::find(rest.begin(), rest.end(), x));
            out.add(std::move(rest), c * static_cast<double>(power));
        }
        return out;
    }

    Polynomial directional(const Vector& w) const
    {
        std::vector<int> vars;
        for (const auto& [m, c] : terms_) vars.insert(vars.end(), m.begin(), m.end());
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        Polynomial out;
        for (int x : vars) {
            if (w(x) == 0.0) continue;
            const Polynomial dx = derivative(x);
            for (const auto& [m, c] : dx.terms_) out.add(m, c * w(x));
        }
        return out;
    }

    Matrix hessian(const Vector& t) const
    {
        const auto n = t.size();
        Matrix H = Matrix::Zero(n, n);
        for (const auto& [m, c] : terms_) {
            for (std::size_t i = 0; i < m.size(); ++i)
                for (std::size_t j = 0; j < m.size(); ++j) {
                    if (i == j) continue;
                    double p = c;
                    for (std::size_t k = 0; k < m.size(); ++k)
                        if (k != i && k != j) p *= t(m[k]);
                    H(m[i], m[j]) += p;
                }
        }
        return H;
    }

    // Substitutes t_y -> t_y - coeff[y] * t_x for every y in coeff.
    Polynomial substitute(int x, const std::map<int, double>& coeff) const
    {
        Polynomial out;
        for (const auto& [m, c] : terms_) {
            std::vector<std::pair<Monomial, double>> partial{{{}, c}};
            for (int y : m) {
                std::vector<std::pair<Monomial, double>> next;
                const auto it = coeff.find(y);
                for (auto& [pm, pc] : partial) {
                    Monomial keep = pm;
                    keep.push_back(y);
                    next.emplace_back(std::move(keep), pc);
                    if (it != coeff.end() && it->second != 0.0) {
                        Monomial swap = pm;
                        swap.push_back(x);
                        next.emplace_back(std::move(swap), -pc * it->second);
                    }
                }
                partial = std::move(next);
            }
            for (auto& [pm, pc] : partial) out.add(std::move(pm), pc);
        }
        return out;
    }

private:
    std::map<Monomial, double> terms_;
};

// Exact monomial expansion of p_sigma, by running the recursion symbolically.
inline Polynomial dense_expand(const LorentzContext& ctx, const Face& sigma)
{
    if (sigma.codim() > 4) throw Error(ErrorKind::gate_exceeded, "dense expansion is limited to codimension 4");
    if (ctx.link_vertices(sigma).size() > 24 && sigma.codim() > 0)
        throw Error(ErrorKind::gate_exceeded, "dense expansion is limited to 24 variables");
    std::map<Face, Polynomial> memo;
    auto rec = [&](auto&& self, const Face& tau) -> Polynomial {
        if (const auto it = memo.find(tau); it != memo.end()) return it->second;
        Polynomial p;
        const int k = tau.codim();
        if (k == 0) {
            p.add({}, ctx.mass(tau));
        } else {
            const SiteSet S = tau.sites();
            for (int x : ctx.link_vertices(tau)) {
                const Face child = ctx.extend(tau, x);
                const int xs = ctx.system().vertex(x).site;
                std::map<int, double> coeff;
                for (int y : ctx.link_vertices(child)) coeff[y] = ctx.phi(S, ctx.system().vertex(y).site, xs);
                const Polynomial moved = self(self, child).substitute(x, coeff);
                for (const auto& [m, c] : moved.terms()) {
                    auto mx = m;
                    mx.push_back(x);
                    p.add(std::move(mx), c / k);
                }
            }
        }
        memo.emplace(tau, p);
        return p;
    };
    return rec(rec, sigma);
}

// ---------------------------------------------------------------------------
// Hessians and directional derivatives
// ---------------------------------------------------------------------------

struct LabeledMatrix {
    Matrix H;
    std::vector<int> labels;  // global vertex ids
};

// Hessian of the quadratic p_sigma (codim 2): the skeleton adjacency with
// global weights minus phi(v, u) * degree on the u-spins (and symmetrically).
inline LabeledMatrix codim2_hessian(const LorentzContext& ctx, const Face& sigma)
{
    if (sigma.codim() != 2) throw Error(ErrorKind::invalid_input, "codim2_hessian needs a face of codimension 2");
    const auto& sys = ctx.system();
    LabeledMatrix out;
    out.labels = ctx.link_vertices(sigma);
    const auto n = static_cast<Eigen::Index>(out.labels.size());
    out.H = Matrix::Zero(n, n);
    const SiteSet S = sigma.sites();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vertex a = sys.vertex(out.labels[static_cast<std::size_t>(i)]);
        double degree = 0.0;
        int other_site = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vertex b = sys.vertex(out.labels[static_cast<std::size_t>(j)]);
            if (a.site == b.site) continue;
            other_site = b.site;
            const Face facet = sigma.with(a).with(b);
            const double w = ctx.has_face(facet) ? ctx.mass(facet) : 0.0;
            out.H(i, j) = w;
            degree += w;
        }
        if (other_site >= 0) out.H(i, i) = -ctx.phi(S, other_site, a.site) * degree;
    }
    return out;
}

// F_tau(w_1, ..., w_k) with k = codim(tau): the full mixed directional
// derivative of p_tau.
inline double multilinear_form(const LorentzContext& ctx, const Face& tau, const std::vector<Vector>& ws, std::size_t first = 0)
{
    const int k = tau.codim();
    if (static_cast<std::size_t>(k) != ws.size() - first)
        throw Error(ErrorKind::invalid_input, "number of directions must equal the codimension");
    if (k == 0) return ctx.mass(tau);
    double s = 0.0;
    for (int x : ctx.link_vertices(tau)) {
        const double c = ws[first](x);
        if (c == 0.0) continue;
        std::vector<Vector> next(ws.size());
        for (std::size_t i = first + 1; i < ws.size(); ++i) next[i] = pi_apply(ctx, tau, x, ws[i]);
        s += c * multilinear_form(ctx, ctx.extend(tau, x), next, first + 1);
    }
    return s;
}

// Hessian of D_{w_1} ... D_{w_{m-2}} p_sigma over X_sigma(1), m = codim(sigma).
inline LabeledMatrix lorentzian_hessian(const LorentzContext& ctx, const Face& sigma, const std::vector<Vector>& ws)
{
    const int m = sigma.codim();
    if (m < 2 || static_cast<int>(ws.size()) != m - 2)
        throw Error(ErrorKind::invalid_input, "need codim >= 2 and codim - 2 directions");
    const auto& sys = ctx.system();
    LabeledMatrix out;
    out.labels = ctx.link_vertices(sigma);
    const auto n = static_cast<Eigen::Index>(out.labels.size());
    out.H = Matrix::Zero(n, n);

    std::map<Face, double> cache;
    auto G = [&](const Face& tau) {
        if (const auto it = cache.find(tau); it != cache.end()) return it->second;
        std::vector<Vector> moved;
        for (const auto& w : ws) moved.push_back(pi_to_face(ctx, sigma, tau, w));
        const double g = multilinear_form(ctx, tau, moved);
        cache.emplace(tau, g);
        return g;
    };
    const SiteSet S = sigma.sites();
    for (Eigen::Index i = 0; i < n; ++i) {
        const int a = out.labels[static_cast<std::size_t>(i)];
        const Vertex va = sys.vertex(a);
        const Face fa = sigma.with(va);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vertex vb = sys.vertex(out.labels[static_cast<std::size_t>(j)]);
            if (vb.site == va.site) continue;
            const Face fab = fa.with(vb);
            if (ctx.has_face(fab)) out.H(i, j) = G(fab);
        }
        double diag = 0.0;
        for (int y : ctx.link_vertices(fa)) diag -= ctx.phi(S, sys.vertex(y).site, va.site) * G(ctx.extend(fa, y));
        out.H(i, i) = diag;
    }
    out.H = 0.5 * (out.H + out.H.transpose()).eval();
    return out;
}

// Closed form of the derivative of p_sigma along alpha(v_1), ..., alpha(v_m).
inline double directional_product(const LorentzContext& ctx, const Face& sigma, const std::vector<int>& ordering)
{
    auto free = sigma.free_sites();
    auto sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != free) throw Error(ErrorKind::invalid_input, "ordering must be a permutation of the free sites");
    double product = ctx.mass(sigma);
    SiteSet S = sigma.sites();
    for (int v : ordering) {
        product *= ctx.hit(S, v, v);
        S = S.with(v);
    }
    return product;
}

// Same quantity through the multilinear recursion, for cross-checks.
inline double directional_product_recursive(const LorentzContext& ctx, const Face& sigma, const std::vector<int>& ordering)
{
    std::vector<Vector> ws;
    for (int v : ordering) ws.push_back(alpha_vector(ctx, sigma, v));
    return multilinear_form(ctx, sigma, ws);
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct Codim2Hypothesis {
    bool ok = true;
    double worst_slack = INFINITY;  // min over faces of bound - lambda2
    std::vector<Face> violations;
};

// lambda2(P_sigma) <= sqrt(phi_{V(sigma)}(u,v) phi_{V(sigma)}(v,u)) for every
// codim-2 face sigma with free sites u, v. phi(S, v, u) = W_{S ∪ {u}}[v -> u].
template <class Phi>
Codim2Hypothesis codim2_hypothesis(const SpinSystem& sys, Phi&& phi, double tol = Tolerances{}.eigen)
{
    Codim2Hypothesis h;
    const int d = sys.num_sites();
    if (d < 2) return h;
    for (SiteSet S : subsets_of_size(d, d - 2)) {
        int u = -1, v = -1;
        for (int x = 0; x < d; ++x)
            if (!S.contains(x)) (u < 0 ? u : v) = x;
        const double bound = std::sqrt(phi(S, u, v) * phi(S, v, u));
        for (const LinkView& lv : links_on(sys, S)) {
            const double lambda = lambda2_selfadjoint(skeleton_operator(lv));
            h.worst_slack = std::min(h.worst_slack, bound - lambda);
            if (lambda > bound + tol) {
                h.ok = false;
                h.violations.push_back(lv.base());
            }
        }
    }
    return h;
}

inline Codim2Hypothesis check_codim2_hypothesis(const LorentzContext& ctx, double tol = Tolerances{}.eigen)
{
    return codim2_hypothesis(ctx.system(), [&](SiteSet S, int v, int u) { return ctx.phi(S, v, u); }, tol);
}

inline Codim2Hypothesis check_codim2_hypothesis(const SpinSystem& sys, const WalkGraph& walk, double tol = Tolerances{}.eigen)
{
    return codim2_hypothesis(sys, [&](SiteSet S, int v, int u) { return first_passage(walk, S, v, u); }, tol);
}

struct HuvCertificate {
    int u = 0, v = 0;
    LabeledMatrix H;  // A_{u,v} - D_{u,v} M_{u,v}
    double bound = 0.0;
    double lambda2_actual = 0.0;
    bool one_positive = false;
    bool hypothesis_ok = false;
    bool pass = false;
};

inline HuvCertificate huv_certificate(const LorentzContext& ctx, int u, int v, bool hypothesis_ok,
                                      double tol = Tolerances{}.eigen)
{
    const auto& sys = ctx.system();
    if (u == v) throw Error(ErrorKind::invalid_input, "H_{u,v} needs distinct sites");
    const LinkView root = link(sys, Face::empty(sys.num_sites()));
    const WalkOperator op = bipartite_pair_operator(root, u, v);
    HuvCertificate c;
    c.u = u;
    c.v = v;
    c.hypothesis_ok = hypothesis_ok;
    const double wu = ctx.phi({}, v, u);  // W_u[v -> u]
    const double wv = ctx.phi({}, u, v);  // W_v[u -> v]
    const auto n = static_cast<Eigen::Index>(op.labels.size());
    c.H.H = op.A;
    for (Eigen::Index i = 0; i < n; ++i) {
        c.H.labels.push_back(sys.vertex_id(op.labels[static_cast<std::size_t>(i)]));
        c.H.H(i, i) -= op.degree(i) * (op.labels[static_cast<std::size_t>(i)].site == u ? wu : wv);
    }
    c.bound = std::sqrt(wu * wv);
    c.lambda2_actual = op.size() >= 2 ? lambda2_selfadjoint(op) : 0.0;
    c.one_positive = one_positive_eigenvalue(c.H.H);
    c.pass = hypothesis_ok && c.lambda2_actual <= c.bound + tol;
    return c;
}

struct SweepReport {
    int samples = 0;
    int rejected = 0;  // strict candidates that failed cone_member
    int p_failures = 0;
    int q_failures = 0;
    std::vector<std::string> counterexamples;
    bool ok() const { return p_failures == 0 && q_failures == 0; }
};

// Sampled check of the Lorentzian properties of p_sigma: (P) full directional
// derivatives along cone directions are positive, (Q) the Hessian after
// codim - 2 derivatives has at most one positive eigenvalue. Directions are
// alpha vectors (closure) and positive combinations of them (interior).
inline SweepReport lorentzian_sweep(const LorentzContext& ctx, const Face& sigma, int num_directions, std::uint64_t seed,
                                    double rel = Tolerances{}.positivity_rel)
{
    const int m = sigma.codim();
    if (m < 2) throw Error(ErrorKind::invalid_input, "sweep needs codimension >= 2");
    const auto free = sigma.free_sites();
    std::vector<Vector> alphas;
    for (int w : free) alphas.push_back(alpha_vector(ctx, sigma, w));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(0.05, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, alphas.size() - 1);

    auto interior_sample = [&]() -> std::optional<Vector> {
        Vector v = Vector::Zero(ctx.num_vertices());
        for (const auto& a : alphas) v += coef(rng) * a;
        if (!cone_member(ctx, sigma, v, ConeMode::strict)) return std::nullopt;
        return v;
    };

    SweepReport r;
    for (int s = 0; s < num_directions; ++s) {
        const bool closure = s % 2 == 1;
        std::vector<Vector> ws;
        bool rejected = false;
        for (int i = 0; i < m; ++i) {
            if (closure) {
                ws.push_back(alphas[pick(rng)]);
            } else if (auto v = interior_sample()) {
                ws.push_back(*v);
            } else {
                rejected = true;
                break;
            }
        }
        if (rejected) {
            ++r.rejected;
            continue;
        }
        ++r.samples;
        const double full = multilinear_form(ctx, sigma, ws);
        const double scale = ctx.mass(sigma);
        const bool p_ok = closure ? full >= -1e-12 * scale : full > 0.0;
        const std::vector<Vector> head(ws.begin(), ws.begin() + (m - 2));
        const bool q_ok = count_positive(lorentzian_hessian(ctx, sigma, head).H, rel) <= 1;
        if (!p_ok) ++r.p_failures;
        if (!q_ok) ++r.q_failures;
        if ((!p_ok || !q_ok) && r.counterexamples.size() < 5)
            r.counterexamples.push_back("sample " + std::to_string(s) + (p_ok ? "" : " (P)") + (q_ok ? "" : " (Q)"));
    }
    return r;
}

}  // namespace spectral_trickle
