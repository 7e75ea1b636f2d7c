#pragma once

#include "common.hpp"
#include "complex.hpp"
#include "influence.hpp"
#include "lorentz.hpp"
#include "parallel.hpp"
#include "spectra.hpp"
#include "walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

namespace spectral_trickle {

struct TheoremWalk {
    WalkGraph graph;
    std::vector<double> epsilon;  // per site, epsilon of its cI component
    std::vector<int> component;   // component id per site
    double lambda_max = 0.0;      // lambda_max(cI)
};

namespace detail {

// Perron vector of a nonnegative symmetric irreducible block, by power
// iteration on C + I from the all-ones vector, L1-normalized.
inline Vector perron_vector(const Matrix& C, double tol = 1e-12, int max_iter = 1'000'000)
{
    const auto n = C.rows();
    Vector x = Vector::Ones(n) / static_cast<double>(n);
    for (int it = 0; it < max_iter; ++it) {
        Vector y = C * x + x;
        y /= y.sum();
        const double change = (y - x).cwiseAbs().sum();
        x = std::move(y);
        if (change <= tol) return x;
    }
    throw Error(ErrorKind::numerical, "Perron iteration did not converge");
}

}  // namespace detail

inline TheoremWalk construct_walk_from_cI(const SpinSystem& sys, const Matrix& cI, const Tolerances& tol = {})
{
    const int d = sys.num_sites();
    if (cI.rows() != d || cI.cols() != d) throw Error(ErrorKind::invalid_input, "cI must be indexed by the sites");
    TheoremWalk tw;
    tw.lambda_max = lambda_max_symmetric(cI);
    if (tw.lambda_max >= 1.0 - 1e-12)
        throw Error(ErrorKind::no_spectral_gap, "lambda_max(cI) = " + std::to_string(tw.lambda_max) + " leaves no spectral gap");

    // Components of the support graph.
    tw.component.assign(static_cast<std::size_t>(d), -1);
    int count = 0;
    for (int s = 0; s < d; ++s) {
        if (tw.component[static_cast<std::size_t>(s)] >= 0) continue;
        std::vector<int> stack{s};
        tw.component[static_cast<std::size_t>(s)] = count;
        while (!stack.empty()) {
            const int a = stack.back();
            stack.pop_back();
            for (int b = 0; b < d; ++b)
                if (cI(a, b) > tol.support && tw.component[static_cast<std::size_t>(b)] < 0) {
                    tw.component[static_cast<std::size_t>(b)] = count;
                    stack.push_back(b);
                }
        }
        ++count;
    }

    Matrix W = Matrix::Zero(2 * d, 2 * d);
    tw.epsilon.assign(static_cast<std::size_t>(d), 1.0);
    for (int c = 0; c < count; ++c) {
        std::vector<int> members;
        for (int v = 0; v < d; ++v)
            if (tw.component[static_cast<std::size_t>(v)] == c) members.push_back(v);
        const auto m = static_cast<Eigen::Index>(members.size());
        Matrix C = Matrix::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) {
                const double w = cI(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(j)]);
                C(i, j) = w > tol.support ? w : 0.0;
            }
        const double eps = 1.0 - lambda_max_symmetric(C);
        const Vector x = detail::perron_vector(C);
        if (!(x.minCoeff() > 0.0)) throw Error(ErrorKind::numerical, "Perron vector is not positive");
        for (Eigen::Index i = 0; i < m; ++i) {
            const int u = members[static_cast<std::size_t>(i)];
            double row = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                if (C(i, j) == 0.0) continue;
                W(u, members[static_cast<std::size_t>(j)]) = C(i, j) * x(j) / x(i);
                row += W(u, members[static_cast<std::size_t>(j)]);
            }
            if (std::abs((1.0 - row) - eps) > 1e-9)
                throw Error(ErrorKind::numerical, "boundary weight disagrees with the component gap");
            W(u, d + u) = 1.0 - row;
            W(d + u, u) = 1.0;
            tw.epsilon[static_cast<std::size_t>(u)] = eps;
        }
    }
    std::vector<std::string> boundary;
    for (int v = 0; v < d; ++v) boundary.push_back("b_" + sys.site_name(v));
    tw.graph = WalkGraph::create(sys.site_names(), std::move(boundary), std::move(W), tol.stochastic);
    if (!validate_absorbing(tw.graph).ok) throw Error(ErrorKind::not_absorbing, "constructed walk is not absorbing");
    return tw;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

enum class Verdict { pass, fail, not_applicable };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not_applicable";
    }
    return "?";
}

struct Certificate {
    Face face;
    int codim = 0;
    double bound_M = 0.0;         // lambda_max(M_tau) / (k - 1)
    double bound_distinct = 0.0;  // max_u E[d(Q) - 2] / (k - 1)
    double bound_main = std::numeric_limits<double>::quiet_NaN();  // (1-eps)^2 / ((k-1) eps)
    double actual = 0.0;          // lambda2(P_tau)
    bool hypothesis_ok = false;
    Verdict verdict = Verdict::not_applicable;  // actual vs bound_M and bound_distinct
    bool main_ok = true;                        // actual vs bound_main, when set

    bool pass() const { return verdict == Verdict::pass; }
    // A failure that contradicts a claimed bound.
    bool violation() const { return hypothesis_ok && verdict == Verdict::fail; }
};

// Certifies links against one walk graph. M_tau depends only on V(tau), so
// the hitting matrices are cached per site set.
class Certifier {
public:
    Certifier(const SpinSystem& sys, const WalkGraph& walk, bool hypothesis_ok, Tolerances tol = {})
        : sys_(&sys), walk_(&walk), hypothesis_ok_(hypothesis_ok), tol_(tol)
    {
        if (walk.num_interior() != sys.num_sites()) throw Error(ErrorKind::invalid_input, "walk graph interior must match the sites");
    }

    const HittingMatrix& hitting(SiteSet S) const
    {
        {
            std::lock_guard lock(mutex_);
            if (const auto it = cache_.find(S); it != cache_.end()) return it->second;
        }
        HittingMatrix h = hitting_matrix(*walk_, S);
        std::lock_guard lock(mutex_);
        return cache_.emplace(S, std::move(h)).first->second;
    }

    Certificate certify(const LinkView& lv, std::optional<double> epsilon = std::nullopt) const
    {
        Certificate c;
        c.face = lv.base();
        c.codim = lv.codim();
        c.hypothesis_ok = hypothesis_ok_;
        if (c.codim < 2) throw Error(ErrorKind::invalid_input, "certificates need codimension >= 2");
        const double k1 = static_cast<double>(c.codim - 1);

        const HittingMatrix& h = hitting(lv.base().sites());
        c.bound_M = lambda_max_symmetric(h.M) / k1;
        c.bound_distinct = h.Mprime.rowwise().sum().maxCoeff() / k1;
        if (epsilon) c.bound_main = (1.0 - *epsilon) * (1.0 - *epsilon) / (k1 * *epsilon);

        if (skeleton_components(lv).size() > 1) {
            c.actual = 1.0;
            c.verdict = Verdict::not_applicable;
            return c;
        }
        c.actual = lambda2_selfadjoint(skeleton_operator(lv));
        const double bound = std::min(c.bound_M, c.bound_distinct);
        c.verdict = c.actual <= bound + tol_.eigen ? Verdict::pass : Verdict::fail;
        if (epsilon) c.main_ok = c.actual <= c.bound_main + tol_.eigen;
        return c;
    }

    // Every link of codimension >= min_codim (default 2), in face order.
    std::vector<Certificate> certify_all(std::optional<double> epsilon = std::nullopt, int min_codim = 2,
                                         int max_codim = std::numeric_limits<int>::max()) const
    {
        const int d = sys_->num_sites();
        std::vector<SiteSet> masks;
        for (int k = std::max(2, min_codim); k <= std::min(d, max_codim); ++k)
            for (SiteSet S : subsets_of_size(d, d - k)) masks.push_back(S);
        std::vector<std::vector<Certificate>> slots(masks.size());
        parallel_for(masks.size(), [&](std::size_t i) {
            for (const LinkView& lv : links_on(*sys_, masks[i])) slots[i].push_back(certify(lv, epsilon));
        });
        std::vector<Certificate> out;
        for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
        std::sort(out.begin(), out.end(), [](const Certificate& a, const Certificate& b) { return a.face < b.face; });
        return out;
    }

private:
    const SpinSystem* sys_;
    const WalkGraph* walk_;
    bool hypothesis_ok_;
    Tolerances tol_;
    mutable std::mutex mutex_;
    mutable std::map<SiteSet, HittingMatrix> cache_;
};

inline Certificate certify_link(const SpinSystem& sys, const WalkGraph& walk, const Face& tau, const Tolerances& tol = {})
{
    const bool hyp = check_codim2_hypothesis(sys, walk, tol.eigen).ok;
    return Certifier(sys, walk, hyp, tol).certify(link(sys, tau));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MainTheoremReport {
    double lambda_max_cI = 0.0;
    double epsilon = 0.0;
    Codim2Hypothesis hypothesis;
    std::vector<Certificate> certificates;
    bool stated_bound_ok = true;  // lambda2 <= (1-eps)^2 / ((k-1) eps) on every link
    bool walk_bound_ok = true;    // lambda2 <= (1-eps) / ((k-1) eps) on every link
    double eta = 0.0;             // max_tau lambda2(P_tau) (codim - 1)
    bool eta_ok = true;           // eta <= (1-eps)^2 / eps
    double worst_stated_slack = INFINITY;
    int certificate_failures = 0;
    int not_applicable = 0;
};

inline MainTheoremReport main_theorem_report(const SpinSystem& sys, const Matrix& cI, const Tolerances& tol = {})
{
    MainTheoremReport r;
    r.lambda_max_cI = lambda_max_symmetric(cI);
    r.epsilon = 1.0 - r.lambda_max_cI;
    if (!(r.epsilon > 0.0)) throw Error(ErrorKind::no_spectral_gap, "epsilon = 1 - lambda_max(cI) must be positive");
    const TheoremWalk tw = construct_walk_from_cI(sys, cI, tol);
    r.hypothesis = check_codim2_hypothesis(sys, tw.graph, tol.eigen);
    const Certifier cert(sys, tw.graph, r.hypothesis.ok, tol);
    r.certificates = cert.certify_all(r.epsilon);
    const double e = r.epsilon;
    for (const auto& c : r.certificates) {
        if (c.verdict == Verdict::not_applicable) {
            ++r.not_applicable;
            continue;
        }
        const double k1 = static_cast<double>(c.codim - 1);
        if (c.verdict == Verdict::fail) ++r.certificate_failures;
        r.stated_bound_ok = r.stated_bound_ok && c.main_ok;
        r.worst_stated_slack = std::min(r.worst_stated_slack, c.bound_main - c.actual);
        r.walk_bound_ok = r.walk_bound_ok && c.actual <= (1.0 - e) / (k1 * e) + tol.eigen;
        r.eta = std::max(r.eta, c.actual * k1);
    }
    r.eta_ok = r.eta <= (1.0 - e) * (1.0 - e) / e + tol.eigen;
    return r;
}

inline MainTheoremReport main_theorem_report(const SpinSystem& sys, const Tolerances& tol = {})
{
    return main_theorem_report(sys, spectral_influence_matrix(sys), tol);
}

struct OppenheimReport {
    double epsilon = 0.0;
    bool hypothesis_ok = true;  // codim-2 links have lambda2 <= (1-eps)/d
    bool conclusion_ok = true;
    std::vector<Face> hypothesis_violations;
    std::vector<Face> conclusion_violations;
    double worst_slack = INFINITY;
    int checked = 0;
};

inline OppenheimReport oppenheim_check(const SpinSystem& sys, double epsilon, const Tolerances& tol = {})
{
    OppenheimReport r;
    r.epsilon = epsilon;
    const int d = sys.num_sites();
    const double dd = static_cast<double>(d);
    for (int k = 2; k <= d; ++k) {
        const double bound = (1.0 - epsilon) / (dd - static_cast<double>(k - 2) * (1.0 - epsilon));
        for (SiteSet S : subsets_of_size(d, d - k)) {
            for (const LinkView& lv : links_on(sys, S)) {
                const double lambda = lambda2_selfadjoint(skeleton_operator(lv));
                if (k == 2 && lambda > (1.0 - epsilon) / dd + tol.eigen) {
                    r.hypothesis_ok = false;
                    r.hypothesis_violations.push_back(lv.base());
                }
                ++r.checked;
                r.worst_slack = std::min(r.worst_slack, bound - lambda);
                if (lambda > bound + tol.eigen) {
                    r.conclusion_ok = false;
                    r.conclusion_violations.push_back(lv.base());
                }
            }
        }
    }
    return r;
}

struct PathComplexReport {
    bool top_link_ok = true;
    std::vector<Face> top_link_violations;
    Vector row_sums;          // sum_j W_i[j -> i] per site, expected (d-1)/2
    bool row_sums_ok = true;
    std::vector<Certificate> certificates;
    double max_lambda2 = -INFINITY;
    bool half_bound_ok = true;  // lambda2(P_tau) <= 1/2 for every tau of codim >= 2
};

// `order` lists the sites along the path.
inline PathComplexReport path_complex_certify(const SpinSystem& sys, const std::vector<int>& order, const Tolerances& tol = {})
{
    PathComplexReport r;
    const int d = sys.num_sites();
    const WalkGraph walk = path_walk(sys.site_names(), order);
    std::vector<int> pos(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;

    for (SiteSet S : subsets_of_size(d, d - 2)) {
        int u = -1, v = -1;
        for (int x = 0; x < d; ++x)
            if (!S.contains(x)) (u < 0 ? u : v) = x;
        const bool consecutive = std::abs(pos[static_cast<std::size_t>(u)] - pos[static_cast<std::size_t>(v)]) == 1;
        const double limit = consecutive ? 0.5 : 0.0;
        for (const LinkView& lv : links_on(sys, S)) {
            if (lambda2_selfadjoint(skeleton_operator(lv)) > limit + tol.eigen) {
                r.top_link_ok = false;
                r.top_link_violations.push_back(lv.base());
            }
        }
    }

    // Column j of Mprime holds W_j[i -> j] over sources i.
    const HittingMatrix h = hitting_matrix(walk, {});
    r.row_sums = h.Mprime.colwise().sum().transpose();
    r.row_sums_ok = (r.row_sums.array() - 0.5 * (d - 1)).abs().maxCoeff() <= tol.algebraic;

    const bool hyp = check_codim2_hypothesis(sys, walk, tol.eigen).ok;
    r.certificates = Certifier(sys, walk, hyp, tol).certify_all();
    for (const auto& c : r.certificates) {
        if (c.verdict == Verdict::not_applicable) continue;
        r.max_lambda2 = std::max(r.max_lambda2, c.actual);
        r.half_bound_ok = r.half_bound_ok && c.actual <= 0.5 + tol.eigen;
    }
    return r;
}

}  // namespace spectral_trickle
