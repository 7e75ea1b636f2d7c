#pragma once

#include "common.hpp"
#include "complex.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

namespace spectral_trickle {

// Down-up walk: pick a site uniformly, resample its spin from the
// conditional law given all other spins. State i is facet i of the system.
struct GlauberChain {
    const SpinSystem* system = nullptr;
    Matrix P;
    Vector mu;
    int size() const { return static_cast<int>(mu.size()); }
};

namespace detail {

// group[u][i]: id of the class of facet i under masking site u;
// members[u][g]: facets in class g.
struct ResampleClasses {
    std::vector<std::vector<int>> group;
    std::vector<std::vector<std::vector<int>>> members;
};

inline ResampleClasses resample_classes(const SpinSystem& sys)
{
    ResampleClasses rc;
    const int d = sys.num_sites();
    rc.group.assign(static_cast<std::size_t>(d), std::vector<int>(sys.num_facets()));
    rc.members.resize(static_cast<std::size_t>(d));
    for (int u = 0; u < d; ++u) {
        std::map<std::vector<int>, int> ids;
        for (std::size_t i = 0; i < sys.num_facets(); ++i) {
            const auto f = sys.facet(i);
            std::vector<int> key(f.begin(), f.end());
            key[static_cast<std::size_t>(u)] = kFree;
            const auto [it, fresh] = ids.emplace(std::move(key), static_cast<int>(ids.size()));
            if (fresh) rc.members[static_cast<std::size_t>(u)].emplace_back();
            rc.group[static_cast<std::size_t>(u)][i] = it->second;
            rc.members[static_cast<std::size_t>(u)][static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
        }
    }
    return rc;
}

}  // namespace detail

inline GlauberChain transition_matrix(const SpinSystem& sys, std::size_t gate = 20000)
{
    const std::size_t n = sys.num_facets();
    if (n > gate) throw Error(ErrorKind::gate_exceeded, "exact Glauber matrix limited to " + std::to_string(gate) + " states");
    GlauberChain c;
    c.system = &sys;
    c.mu = Eigen::Map<const Vector>(sys.weights().data(), static_cast<Eigen::Index>(n));
    c.P = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto rc = detail::resample_classes(sys);
    const double inv_d = 1.0 / sys.num_sites();
    for (const auto& classes : rc.members) {
        for (const auto& cls : classes) {
            double total = 0.0;
            for (int j : cls) total += sys.weight(static_cast<std::size_t>(j));
            for (int i : cls)
                for (int j : cls) c.P(i, j) += inv_d * sys.weight(static_cast<std::size_t>(j)) / total;
        }
    }
    return c;
}

// Eigenvalues of P_G in descending order, via sqrt(mu) conjugation.
inline Vector glauber_spectrum(const GlauberChain& c)
{
    const Vector s = c.mu.cwiseSqrt();
    Matrix S = s.asDiagonal() * c.P * s.cwiseInverse().asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "Glauber eigensolve failed");
    return es.eigenvalues().reverse();
}

inline double spectral_gap(const GlauberChain& c)
{
    if (c.size() < 2) return 1.0;
    return 1.0 - glauber_spectrum(c)(1);
}

inline double tv_distance(const Vector& p, const Vector& q)
{
    if (p.size() != q.size()) throw Error(ErrorKind::invalid_input, "distributions have different sizes");
    return 0.5 * (p - q).cwiseAbs().sum();
}

// Law of the chain after t steps from a fixed start.
inline Vector distribution_after(const GlauberChain& c, int start, int steps)
{
    Vector p = Vector::Zero(c.size());
    p(start) = 1.0;
    const Matrix Pt = c.P.transpose();
    for (int t = 0; t < steps; ++t) p = Pt * p;
    return p;
}

class GlauberSampler {
public:
    explicit GlauberSampler(const SpinSystem& sys) : sys_(&sys), classes_(detail::resample_classes(sys)) {}

    int step(int state, std::mt19937_64& rng) const
    {
        std::uniform_int_distribution<int> site(0, sys_->num_sites() - 1);
        const auto u = static_cast<std::size_t>(site(rng));
        const auto& cls = classes_.members[u][static_cast<std::size_t>(classes_.group[u][static_cast<std::size_t>(state)])];
        double total = 0.0;
        for (int j : cls) total += sys_->weight(static_cast<std::size_t>(j));
        double r = std::uniform_real_distribution<double>(0.0, total)(rng);
        for (int j : cls) {
            r -= sys_->weight(static_cast<std::size_t>(j));
            if (r < 0.0) return j;
        }
        return cls.back();
    }

private:
    const SpinSystem* sys_;
    detail::ResampleClasses classes_;
};

struct ChainRun {
    int start = 0;
    int final_state = 0;
    std::size_t steps = 0;
    std::vector<std::vector<double>> batch_visits;  // [batch][facet], visit counts after each step
};

inline ChainRun run_chain(const SpinSystem& sys, int start, std::size_t steps, std::uint64_t seed, int batches = 0)
{
    if (start < 0 || static_cast<std::size_t>(start) >= sys.num_facets() || sys.weight(static_cast<std::size_t>(start)) <= 0.0)
        throw Error(ErrorKind::invalid_input, "start state must be a positive-weight facet");
    ChainRun run;
    run.start = run.final_state = start;
    run.steps = steps;
    std::mt19937_64 rng(seed);
    const GlauberSampler sampler(sys);
    if (batches > 0) run.batch_visits.assign(static_cast<std::size_t>(batches), std::vector<double>(sys.num_facets(), 0.0));
    const std::size_t per_batch = batches > 0 ? std::max<std::size_t>(1, steps / static_cast<std::size_t>(batches)) : 0;
    int state = start;
    for (std::size_t t = 0; t < steps; ++t) {
        state = sampler.step(state, rng);
        if (batches > 0) {
            const std::size_t b = std::min<std::size_t>(t / per_batch, static_cast<std::size_t>(batches - 1));
            run.batch_visits[b][static_cast<std::size_t>(state)] += 1.0;
        }
    }
    run.final_state = state;
    return run;
}

struct MarginalEstimate {
    Vertex vertex;
    double exact = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;  // batch means
};

// Site marginals from the batched visit counts of a run, with batch-means
// standard errors, next to the exact marginals of mu.
inline std::vector<MarginalEstimate> marginal_estimates(const SpinSystem& sys, const ChainRun& run)
{
    const std::size_t nb = run.batch_visits.size();
    if (nb < 2) throw Error(ErrorKind::invalid_input, "marginal estimates need at least two batches");
    std::vector<MarginalEstimate> out;
    for (int v = 0; v < sys.num_sites(); ++v)
        for (int s = 0; s < sys.num_spins(v); ++s) {
            MarginalEstimate m;
            m.vertex = {v, s};
            std::vector<double> means(nb, 0.0);
            for (std::size_t i = 0; i < sys.num_facets(); ++i) {
                if (sys.facet(i)[static_cast<std::size_t>(v)] != s) continue;
                m.exact += sys.weight(i);
                for (std::size_t b = 0; b < nb; ++b) means[b] += run.batch_visits[b][i];
            }
            double total = 0.0;
            std::vector<double> sizes(nb, 0.0);
            for (std::size_t b = 0; b < nb; ++b)
                for (double c : run.batch_visits[b]) sizes[b] += c;
            for (std::size_t b = 0; b < nb; ++b) {
                means[b] /= sizes[b];
                total += means[b];
            }
            m.estimate = total / static_cast<double>(nb);
            double var = 0.0;
            for (double x : means) var += (x - m.estimate) * (x - m.estimate);
            var /= static_cast<double>(nb - 1);
            m.standard_error = std::sqrt(var / static_cast<double>(nb));
            out.push_back(m);
        }
    return out;
}

}  // namespace spectral_trickle
