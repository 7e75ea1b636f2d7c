#pragma once

// Weighted d-partite complexes, viewed as multi-state spin systems: sites,
// per-site spin lists, and an explicit distribution over full configurations.

#include "common.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spectral_trickle {

inline constexpr int kFree = -1;

// A (site, spin) pair, i.e. a vertex of the complex.
struct Vertex {
    int site = 0;
    int spin = 0;
    friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

// Partial assignment of spins to sites. Unassigned sites hold kFree, so the
// natural vector order is lexicographic in site order with free sites first.
class Face {
public:
    Face() = default;
    explicit Face(std::vector<int> spins) : spins_(std::move(spins)) {}
    static Face empty(int num_sites) { return Face(std::vector<int>(static_cast<std::size_t>(num_sites), kFree)); }
    static Face from(std::span<const int> config) { return Face(std::vector<int>(config.begin(), config.end())); }

    int num_sites() const { return static_cast<int>(spins_.size()); }
    int spin(int site) const { return spins_[static_cast<std::size_t>(site)]; }
    bool assigned(int site) const { return spin(site) != kFree; }
    int dim() const
    {
        return static_cast<int>(std::count_if(spins_.begin(), spins_.end(), [](int s) { return s != kFree; }));
    }
    int codim() const { return num_sites() - dim(); }
    SiteSet sites() const
    {
        SiteSet s;
        for (int v = 0; v < num_sites(); ++v)
            if (assigned(v)) s = s.with(v);
        return s;
    }
    std::vector<int> free_sites() const
    {
        std::vector<int> out;
        for (int v = 0; v < num_sites(); ++v)
            if (!assigned(v)) out.push_back(v);
        return out;
    }

    Face with(Vertex x) const
    {
        Face f = *this;
        f.spins_[static_cast<std::size_t>(x.site)] = x.spin;
        return f;
    }
    // Union of two compatible faces; throws if they disagree on a site.
    Face united(const Face& other) const
    {
        Face f = *this;
        for (int v = 0; v < num_sites(); ++v) {
            if (!other.assigned(v)) continue;
            if (f.assigned(v) && f.spin(v) != other.spin(v))
                throw Error(ErrorKind::invalid_input, "incompatible faces");
            f.spins_[static_cast<std::size_t>(v)] = other.spin(v);
        }
        return f;
    }
    bool contained_in(std::span<const int> config) const
    {
        for (std::size_t v = 0; v < spins_.size(); ++v)
            if (spins_[v] != kFree && spins_[v] != config[v]) return false;
        return true;
    }
    const std::vector<int>& spins() const { return spins_; }

    friend bool operator==(const Face&, const Face&) = default;
    friend auto operator<=>(const Face& a, const Face& b) { return a.spins_ <=> b.spins_; }

private:
    std::vector<int> spins_;
};

struct PruneReport {
    std::size_t zero_weight_facets = 0;
    std::vector<std::string> pruned_spins;  // "site:spin"
    bool empty() const { return zero_weight_facets == 0 && pruned_spins.empty(); }
};

class SpinSystem {
public:
    // Validates, drops zero-weight facets and unused spins, and normalizes.
    // Weights that already sum to one up to rounding are kept bit-exact, so
    // normalization is idempotent across save/load.
    static SpinSystem create(std::vector<std::string> sites, std::vector<std::vector<std::string>> spins,
                             const std::vector<std::vector<int>>& configs, const std::vector<double>& weights)
    {
        const std::size_t d = sites.size();
        if (d == 0) throw Error(ErrorKind::invalid_input, "system has no sites");
        if (d > 64) throw Error(ErrorKind::invalid_input, "at most 64 sites are supported");
        if (spins.size() != d) throw Error(ErrorKind::invalid_input, "spin list count does not match site count");
        if (configs.size() != weights.size()) throw Error(ErrorKind::invalid_input, "facet/weight count mismatch");
        for (std::size_t v = 0; v < d; ++v) {
            if (spins[v].empty()) throw Error(ErrorKind::invalid_input, "site '" + sites[v] + "' has an empty spin list");
            std::set<std::string> uniq(spins[v].begin(), spins[v].end());
            if (uniq.size() != spins[v].size())
                throw Error(ErrorKind::invalid_input, "site '" + sites[v] + "' has duplicate spins");
        }
        {
            std::set<std::string> uniq(sites.begin(), sites.end());
            if (uniq.size() != d) throw Error(ErrorKind::invalid_input, "duplicate site names");
        }

        SpinSystem sys;
        std::vector<std::vector<int>> kept;
        std::vector<double> kept_w;
        std::set<std::vector<int>> seen;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            const auto& c = configs[i];
            if (c.size() != d) throw Error(ErrorKind::invalid_input, "facet does not assign every site");
            for (std::size_t v = 0; v < d; ++v)
                if (c[v] < 0 || c[v] >= static_cast<int>(spins[v].size()))
                    throw Error(ErrorKind::unknown_spin, "unknown spin at site '" + sites[v] + "'");
            const double w = weights[i];
            if (!std::isfinite(w) || w < 0.0) throw Error(ErrorKind::invalid_input, "facet weight must be finite and >= 0");
            if (!seen.insert(c).second) throw Error(ErrorKind::invalid_input, "duplicate facet");
            if (w == 0.0) {
                ++sys.pruning_.zero_weight_facets;
                continue;
            }
            kept.push_back(c);
            kept_w.push_back(w);
        }
        if (kept.empty()) throw Error(ErrorKind::invalid_input, "all facet weights are zero");

        // Drop spins that appear in no positive-weight facet and reindex.
        std::vector<std::vector<int>> remap(d);
        sys.spins_.resize(d);
        for (std::size_t v = 0; v < d; ++v) {
            std::vector<bool> used(spins[v].size(), false);
            for (const auto& c : kept) used[static_cast<std::size_t>(c[v])] = true;
            remap[v].assign(spins[v].size(), kFree);
            for (std::size_t s = 0; s < spins[v].size(); ++s) {
                if (used[s]) {
                    remap[v][s] = static_cast<int>(sys.spins_[v].size());
                    sys.spins_[v].push_back(spins[v][s]);
                } else {
                    sys.pruning_.pruned_spins.push_back(sites[v] + ":" + spins[v][s]);
                }
            }
        }
        sys.sites_ = std::move(sites);
        sys.d_ = static_cast<int>(d);
        sys.configs_.reserve(kept.size() * d);
        for (const auto& c : kept)
            for (std::size_t v = 0; v < d; ++v) sys.configs_.push_back(remap[v][static_cast<std::size_t>(c[v])]);

        const double total = accurate_sum(kept_w);
        if (!(total > 0.0) || !std::isfinite(total)) throw Error(ErrorKind::invalid_input, "weights do not normalize");
        const bool already_normalized = std::abs(total - 1.0) <= 8.0 * static_cast<double>(kept_w.size()) * 1.1102230246251565e-16;
        sys.weights_ = kept_w;
        if (!already_normalized)
            for (double& w : sys.weights_) w /= total;

        sys.offsets_.assign(d + 1, 0);
        for (std::size_t v = 0; v < d; ++v)
            sys.offsets_[v + 1] = sys.offsets_[v] + static_cast<int>(sys.spins_[v].size());
        return sys;
    }

    int num_sites() const { return d_; }
    const std::vector<std::string>& site_names() const { return sites_; }
    const std::string& site_name(int v) const { return sites_[static_cast<std::size_t>(v)]; }
    int num_spins(int v) const { return static_cast<int>(spins_[static_cast<std::size_t>(v)].size()); }
    const std::vector<std::string>& spin_names(int v) const { return spins_[static_cast<std::size_t>(v)]; }
    const std::string& spin_name(int v, int s) const { return spins_[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)]; }

    std::size_t num_facets() const { return weights_.size(); }
    std::span<const int> facet(std::size_t i) const
    {
        return {configs_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    const PruneReport& pruning() const { return pruning_; }

    // Global vertex numbering of X(1): site-major, spin-minor.
    int vertex_count() const { return offsets_.back(); }
    int vertex_id(Vertex x) const { return offsets_[static_cast<std::size_t>(x.site)] + x.spin; }
    Vertex vertex(int id) const
    {
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), id);
        const int site = static_cast<int>(it - offsets_.begin()) - 1;
        return {site, id - offsets_[static_cast<std::size_t>(site)]};
    }

    int site_index(const std::string& name) const
    {
        const auto it = std::find(sites_.begin(), sites_.end(), name);
        if (it == sites_.end()) throw Error(ErrorKind::invalid_input, "unknown site '" + name + "'");
        return static_cast<int>(it - sites_.begin());
    }
    int spin_index(int v, const std::string& name) const
    {
        const auto& list = spins_[static_cast<std::size_t>(v)];
        const auto it = std::find(list.begin(), list.end(), name);
        if (it == list.end()) throw Error(ErrorKind::unknown_spin, "unknown spin '" + name + "' at site '" + site_name(v) + "'");
        return static_cast<int>(it - list.begin());
    }

    std::string face_label(const Face& f) const
    {
        std::string out = "{";
        bool first = true;
        for (int v = 0; v < d_; ++v) {
            if (!f.assigned(v)) continue;
            if (!first) out += ",";
            out += site_name(v) + "=" + spin_name(v, f.spin(v));
            first = false;
        }
        return out + "}";
    }

    static double accurate_sum(const std::vector<double>& xs)
    {
        // Neumaier compensated summation.
        double sum = 0.0, c = 0.0;
        for (double x : xs) {
            const double t = sum + x;
            c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
            sum = t;
        }
        return sum + c;
    }

private:
    int d_ = 0;
    std::vector<std::string> sites_;
    std::vector<std::vector<std::string>> spins_;
    std::vector<int> configs_;
    std::vector<double> weights_;
    std::vector<int> offsets_;
    PruneReport pruning_;
};

// ---------------------------------------------------------------------------
// JSON document <-> SpinSystem
// ---------------------------------------------------------------------------

inline SpinSystem load_system(const nlohmann::json& doc)
{
    try {
        if (!doc.is_object() || !doc.contains("sites") || !doc.contains("facets"))
            throw Error(ErrorKind::invalid_input, "document must be an object with 'sites' and 'facets'");
        const auto& jsites = doc.at("sites");
        if (!jsites.is_array()) throw Error(ErrorKind::invalid_input, "'sites' must be an array");
        std::vector<std::string> sites;
        std::vector<std::vector<std::string>> spins;
        for (const auto& js : jsites) {
            sites.push_back(js.at("name").get<std::string>());
            spins.push_back(js.at("spins").get<std::vector<std::string>>());
        }
        std::map<std::string, std::size_t> site_of;
        for (std::size_t v = 0; v < sites.size(); ++v) site_of[sites[v]] = v;

        std::vector<std::vector<int>> configs;
        std::vector<double> weights;
        const auto& jfacets = doc.at("facets");
        if (!jfacets.is_array()) throw Error(ErrorKind::invalid_input, "'facets' must be an array");
        for (const auto& jf : jfacets) {
            const auto& assignment = jf.at("assignment");
            if (!assignment.is_object()) throw Error(ErrorKind::invalid_input, "facet assignment must be an object");
            std::vector<int> config(sites.size(), kFree);
            for (const auto& [site, spin] : assignment.items()) {
                const auto it = site_of.find(site);
                if (it == site_of.end()) throw Error(ErrorKind::invalid_input, "facet names unknown site '" + site + "'");
                const auto& list = spins[it->second];
                const auto name = spin.get<std::string>();
                const auto pos = std::find(list.begin(), list.end(), name);
                if (pos == list.end())
                    throw Error(ErrorKind::unknown_spin, "unknown spin '" + name + "' at site '" + site + "'");
                config[it->second] = static_cast<int>(pos - list.begin());
            }
            if (std::find(config.begin(), config.end(), kFree) != config.end())
                throw Error(ErrorKind::invalid_input, "facet does not assign every site");
            configs.push_back(std::move(config));
            const auto& jw = jf.at("weight");
            if (!jw.is_number()) throw Error(ErrorKind::invalid_input, "facet weight must be a number");
            weights.push_back(jw.get<double>());
        }
        return SpinSystem::create(std::move(sites), std::move(spins), configs, weights);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("malformed document: ") + e.what());
    }
}

inline nlohmann::json to_json(const SpinSystem& sys)
{
    nlohmann::json doc;
    doc["sites"] = nlohmann::json::array();
    for (int v = 0; v < sys.num_sites(); ++v)
        doc["sites"].push_back({{"name", sys.site_name(v)}, {"spins", sys.spin_names(v)}});
    doc["facets"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sys.num_facets(); ++i) {
        nlohmann::json assignment = nlohmann::json::object();
        const auto f = sys.facet(i);
        for (int v = 0; v < sys.num_sites(); ++v) assignment[sys.site_name(v)] = sys.spin_name(v, f[static_cast<std::size_t>(v)]);
        doc["facets"].push_back({{"assignment", assignment}, {"weight", sys.weight(i)}});
    }
    return doc;
}

inline bool identical(const SpinSystem& a, const SpinSystem& b)
{
    if (a.num_sites() != b.num_sites() || a.num_facets() != b.num_facets()) return false;
    for (int v = 0; v < a.num_sites(); ++v)
        if (a.site_name(v) != b.site_name(v) || a.spin_names(v) != b.spin_names(v)) return false;
    for (std::size_t i = 0; i < a.num_facets(); ++i) {
        if (a.weight(i) != b.weight(i)) return false;
        const auto fa = a.facet(i), fb = b.facet(i);
        if (!std::equal(fa.begin(), fa.end(), fb.begin())) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Links
// ---------------------------------------------------------------------------

// The conditioned system (X_tau, mu_tau). Holds a pointer to its parent; the
// parent must outlive the view.
class LinkView {
public:
    static LinkView from_facets(const SpinSystem& sys, Face base, std::vector<std::size_t> facets,
                                std::vector<double> raw_weights)
    {
        LinkView lv;
        lv.sys_ = &sys;
        lv.base_ = std::move(base);
        lv.facets_ = std::move(facets);
        const double total = SpinSystem::accurate_sum(raw_weights);
        if (lv.facets_.empty() || !(total > 0.0))
            throw Error(ErrorKind::empty_link, "empty link: face " + sys.face_label(lv.base_) + " has zero probability");
        lv.conditional_ = std::move(raw_weights);
        for (double& w : lv.conditional_) w /= total;
        lv.finish();
        return lv;
    }

    const SpinSystem& system() const { return *sys_; }
    const Face& base() const { return base_; }
    int codim() const { return base_.codim(); }
    const std::vector<int>& residual_sites() const { return residual_; }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<double>& marginals() const { return marginals_; }
    const std::vector<std::size_t>& facets() const { return facets_; }
    const std::vector<double>& conditional() const { return conditional_; }
    // P_{sigma ~ mu}[base ⊆ sigma]
    double mass() const { return mass_; }

    int index_of(Vertex x) const
    {
        const auto it = std::lower_bound(vertices_.begin(), vertices_.end(), x);
        return (it != vertices_.end() && *it == x) ? static_cast<int>(it - vertices_.begin()) : -1;
    }
    std::vector<int> residual_spins(int site) const
    {
        std::vector<int> out;
        for (const auto& x : vertices_)
            if (x.site == site) out.push_back(x.spin);
        return out;
    }
    // P_{omega ~ mu_tau}[x, y in omega]
    double pair_marginal(Vertex x, Vertex y) const
    {
        double p = 0.0;
        for (std::size_t k = 0; k < facets_.size(); ++k) {
            const auto f = sys_->facet(facets_[k]);
            if (f[static_cast<std::size_t>(x.site)] == x.spin && f[static_cast<std::size_t>(y.site)] == y.spin)
                p += conditional_[k];
        }
        return p;
    }

private:
    friend LinkView link(const SpinSystem&, const Face&);
    friend LinkView link(const LinkView&, const Face&);

    void finish()
    {
        const int d = sys_->num_sites();
        residual_ = base_.free_sites();
        mass_ = 0.0;
        std::vector<double> raw;
        raw.reserve(facets_.size());
        for (std::size_t f : facets_) raw.push_back(sys_->weight(f));
        mass_ = SpinSystem::accurate_sum(raw);
        std::map<Vertex, double> marg;
        for (std::size_t k = 0; k < facets_.size(); ++k) {
            const auto f = sys_->facet(facets_[k]);
            for (int v = 0; v < d; ++v)
                if (!base_.assigned(v)) marg[{v, f[static_cast<std::size_t>(v)]}] += conditional_[k];
        }
        for (const auto& [x, p] : marg) {
            if (p <= 0.0) continue;
            vertices_.push_back(x);
            marginals_.push_back(p);
        }
    }

    const SpinSystem* sys_ = nullptr;
    Face base_;
    std::vector<int> residual_;
    std::vector<std::size_t> facets_;
    std::vector<double> conditional_;
    std::vector<Vertex> vertices_;
    std::vector<double> marginals_;
    double mass_ = 0.0;
};

inline LinkView link(const SpinSystem& sys, const Face& tau)
{
    if (tau.num_sites() != sys.num_sites()) throw Error(ErrorKind::invalid_input, "face has wrong number of sites");
    std::vector<std::size_t> idx;
    std::vector<double> w;
    for (std::size_t i = 0; i < sys.num_facets(); ++i) {
        if (tau.contained_in(sys.facet(i))) {
            idx.push_back(i);
            w.push_back(sys.weight(i));
        }
    }
    return LinkView::from_facets(sys, tau, std::move(idx), std::move(w));
}

// Conditions an existing link further; the weights come from mu_tau rather
// than mu, so this is the two-step route of the tower property.
inline LinkView link(const LinkView& parent, const Face& extra)
{
    const Face base = parent.base().united(extra);
    std::vector<std::size_t> idx;
    std::vector<double> w;
    for (std::size_t k = 0; k < parent.facets().size(); ++k) {
        if (extra.contained_in(parent.system().facet(parent.facets()[k]))) {
            idx.push_back(parent.facets()[k]);
            w.push_back(parent.conditional()[k]);
        }
    }
    return LinkView::from_facets(parent.system(), base, std::move(idx), std::move(w));
}

// ---------------------------------------------------------------------------
// Face enumeration and connectivity
// ---------------------------------------------------------------------------

// Positive-probability faces assigning exactly the given sites, sorted.
inline std::vector<Face> faces_on(const SpinSystem& sys, SiteSet sites)
{
    std::set<Face> out;
    const int d = sys.num_sites();
    std::vector<int> buf(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < sys.num_facets(); ++i) {
        const auto f = sys.facet(i);
        for (int v = 0; v < d; ++v) buf[static_cast<std::size_t>(v)] = sites.contains(v) ? f[static_cast<std::size_t>(v)] : kFree;
        out.insert(Face(buf));
    }
    return {out.begin(), out.end()};
}

inline std::vector<SiteSet> subsets_of_size(int d, int k)
{
    std::vector<SiteSet> out;
    if (k < 0 || k > d) return out;
    const std::uint64_t limit = d >= 64 ? 0 : (std::uint64_t{1} << d);
    if (d > 30) throw Error(ErrorKind::gate_exceeded, "subset enumeration limited to 30 sites");
    for (std::uint64_t bits = 0; bits < limit; ++bits)
        if (std::popcount(bits) == k) out.emplace_back(bits);
    return out;
}

// All positive-probability links whose base assigns exactly `sites`, in face
// order. One pass over the facets instead of one per face.
inline std::vector<LinkView> links_on(const SpinSystem& sys, SiteSet sites)
{
    std::map<Face, std::pair<std::vector<std::size_t>, std::vector<double>>> groups;
    const int d = sys.num_sites();
    std::vector<int> buf(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < sys.num_facets(); ++i) {
        const auto f = sys.facet(i);
        for (int v = 0; v < d; ++v) buf[static_cast<std::size_t>(v)] = sites.contains(v) ? f[static_cast<std::size_t>(v)] : kFree;
        auto& g = groups[Face(buf)];
        g.first.push_back(i);
        g.second.push_back(sys.weight(i));
    }
    std::vector<LinkView> out;
    out.reserve(groups.size());
    for (auto& [face, g] : groups) out.push_back(LinkView::from_facets(sys, face, std::move(g.first), std::move(g.second)));
    return out;
}

inline std::vector<Face> enumerate_faces(const SpinSystem& sys, int codim)
{
    const int d = sys.num_sites();
    if (codim < 0 || codim > d) throw Error(ErrorKind::out_of_range, "codimension out of range");
    std::vector<Face> out;
    for (SiteSet s : subsets_of_size(d, d - codim)) {
        auto part = faces_on(sys, s);
        out.insert(out.end(), part.begin(), part.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Union-find components of the weighted skeleton of a link.
inline std::vector<std::vector<Vertex>> skeleton_components(const LinkView& lv)
{
    const auto& verts = lv.vertices();
    std::vector<int> parent(verts.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
        return a;
    };
    const auto& sites = lv.residual_sites();
    for (std::size_t k = 0; k < lv.facets().size(); ++k) {
        if (lv.conditional()[k] <= 0.0) continue;
        const auto f = lv.system().facet(lv.facets()[k]);
        int first = -1;
        for (int v : sites) {
            const int idx = lv.index_of({v, f[static_cast<std::size_t>(v)]});
            if (first < 0) {
                first = idx;
                continue;
            }
            parent[static_cast<std::size_t>(find(idx))] = find(first);
        }
    }
    std::map<int, std::vector<Vertex>> groups;
    for (std::size_t i = 0; i < verts.size(); ++i) groups[find(static_cast<int>(i))].push_back(verts[i]);
    std::vector<std::vector<Vertex>> out;
    for (auto& [root, g] : groups) out.push_back(std::move(g));
    return out;
}

struct Connectivity {
    bool connected = true;
    std::optional<Face> witness;
    std::vector<std::vector<Vertex>> components;  // of the witness link
};

// True iff the skeleton of every positive-probability link of codim >= 2 is
// connected. Faces are scanned from the empty face upward.
inline Connectivity is_connected(const SpinSystem& sys)
{
    const int d = sys.num_sites();
    for (int codim = d; codim >= 2; --codim) {
        std::optional<Connectivity> found;
        for (SiteSet s : subsets_of_size(d, d - codim)) {
            for (const LinkView& lv : links_on(sys, s)) {
                auto comps = skeleton_components(lv);
                if (comps.size() > 1 && (!found || lv.base() < *found->witness))
                    found = Connectivity{false, lv.base(), std::move(comps)};
            }
        }
        if (found) return *found;
    }
    return {};
}

// ---------------------------------------------------------------------------
// Fixture generators
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kMaxEnumeratedConfigs = 10'000'000;

namespace detail {

inline std::vector<std::vector<int>> product_configs(const std::vector<int>& sizes)
{
    std::uint64_t total = 1;
    for (int s : sizes) {
        total *= static_cast<std::uint64_t>(s);
        if (total > kMaxEnumeratedConfigs) throw Error(ErrorKind::gate_exceeded, "configuration count exceeds enumeration cap");
    }
    std::vector<std::vector<int>> out;
    out.reserve(total);
    std::vector<int> c(sizes.size(), 0);
    for (std::uint64_t n = 0; n < total; ++n) {
        out.push_back(c);
        for (std::size_t v = sizes.size(); v-- > 0;) {
            if (++c[v] < sizes[v]) break;
            c[v] = 0;
        }
    }
    return out;
}

inline std::vector<std::string> numbered(const std::string& prefix, int n)
{
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace detail

inline SpinSystem uniform_product_system(const std::vector<int>& spins_per_site)
{
    const int d = static_cast<int>(spins_per_site.size());
    auto configs = detail::product_configs(spins_per_site);
    std::vector<std::vector<std::string>> spins;
    for (int q : spins_per_site) spins.push_back(detail::numbered("s", q));
    return SpinSystem::create(detail::numbered("v", d), std::move(spins), configs,
                              std::vector<double>(configs.size(), 1.0));
}

// Uniform distribution over configurations where every sick site has all
// of its neighbours in quarantine. Spin 0 = sick, 1 = quarantine, the rest
// are ordinary activities.
inline SpinSystem quarantine_system(int num_sites, const std::vector<std::pair<int, int>>& edges, int q)
{
    if (q < 2) throw Error(ErrorKind::invalid_input, "quarantine system needs q >= 2");
    if (num_sites < 1) throw Error(ErrorKind::invalid_input, "quarantine system needs at least one site");
    for (auto [a, b] : edges)
        if (a < 0 || b < 0 || a >= num_sites || b >= num_sites || a == b)
            throw Error(ErrorKind::invalid_input, "bad quarantine graph edge");
    std::vector<std::string> labels{"sick", "quarantine"};
    for (int k = 3; k <= q; ++k) labels.push_back("act" + std::to_string(k));
    constexpr int sick = 0, quarantine = 1;
    auto ok = [&](const std::vector<int>& c) {
        for (auto [a, b] : edges) {
            if (c[static_cast<std::size_t>(a)] == sick && c[static_cast<std::size_t>(b)] != quarantine) return false;
            if (c[static_cast<std::size_t>(b)] == sick && c[static_cast<std::size_t>(a)] != quarantine) return false;
        }
        return true;
    };
    std::vector<std::vector<int>> configs;
    for (auto& c : detail::product_configs(std::vector<int>(static_cast<std::size_t>(num_sites), q)))
        if (ok(c)) configs.push_back(std::move(c));
    if (configs.empty()) throw Error(ErrorKind::invalid_input, "no valid configuration");
    return SpinSystem::create(detail::numbered("v", num_sites),
                              std::vector<std::vector<std::string>>(static_cast<std::size_t>(num_sites), labels), configs,
                              std::vector<double>(configs.size(), 1.0));
}

inline SpinSystem random_system(int d, int spins, double density, std::uint64_t seed)
{
    if (d < 2) throw Error(ErrorKind::invalid_input, "random system needs d >= 2");
    if (spins < 1) throw Error(ErrorKind::invalid_input, "random system needs at least one spin");
    if (!(density > 0.0 && density <= 1.0)) throw Error(ErrorKind::invalid_input, "density must lie in (0, 1]");
    const auto all = detail::product_configs(std::vector<int>(static_cast<std::size_t>(d), spins));
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(attempt), std::uint64_t{0x5eed}};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::vector<int>> configs;
        std::vector<double> weights;
        for (const auto& c : all) {
            if (unit(rng) >= density) continue;
            configs.push_back(c);
            weights.push_back(1.0 - unit(rng));  // (0, 1]
        }
        if (configs.empty()) continue;
        auto sys = SpinSystem::create(detail::numbered("v", d),
                                      std::vector<std::vector<std::string>>(static_cast<std::size_t>(d), detail::numbered("s", spins)),
                                      configs, weights);
        if (is_connected(sys).connected) return sys;
    }
    throw Error(ErrorKind::invalid_input, "failed to produce a connected system in 100 attempts");
}

// Full-support Gibbs measure mu ∝ exp(beta * sum_{(u,v) in edges} J_uv(s_u, s_v))
// with J entries i.i.d. uniform on [-1, 1].
inline SpinSystem pairwise_system(int d, int spins, const std::vector<std::pair<int, int>>& edges, double beta,
                                  std::uint64_t seed)
{
    if (d < 2 || spins < 1) throw Error(ErrorKind::invalid_input, "pairwise system needs d >= 2 and spins >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coupling(-1.0, 1.0);
    std::vector<Matrix> J;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        Matrix m(spins, spins);
        for (int a = 0; a < spins; ++a)
            for (int b = 0; b < spins; ++b) m(a, b) = coupling(rng);
        J.push_back(std::move(m));
    }
    auto configs = detail::product_configs(std::vector<int>(static_cast<std::size_t>(d), spins));
    std::vector<double> weights;
    weights.reserve(configs.size());
    for (const auto& c : configs) {
        double energy = 0.0;
        for (std::size_t e = 0; e < edges.size(); ++e)
            energy += J[e](c[static_cast<std::size_t>(edges[e].first)], c[static_cast<std::size_t>(edges[e].second)]);
        weights.push_back(std::exp(beta * energy));
    }
    return SpinSystem::create(detail::numbered("v", d),
                              std::vector<std::vector<std::string>>(static_cast<std::size_t>(d), detail::numbered("s", spins)),
                              configs, weights);
}

// Chain of pairwise couplings between consecutive sites.
inline SpinSystem path_system(int d, int spins, double beta, std::uint64_t seed)
{
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < d; ++i) edges.emplace_back(i, i + 1);
    return pairwise_system(d, spins, edges, beta, seed);
}

}  // namespace spectral_trickle
