#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral_trickle {

inline constexpr const char* kVersion = "0.1.0";

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorKind {
    invalid_input,
    unknown_spin,
    empty_link,
    out_of_range,
    not_bipartite,
    not_absorbing,
    no_spectral_gap,
    gate_exceeded,
    numerical,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Tolerance ladder shared by every module. Defaults are the values every
// check is pinned to; the CLI exposes them as flags.
struct Tolerances {
    double weight_sum = 1e-12;     // normalization and conditional sums
    double stochastic = 1e-12;     // row sums of walk matrices
    double algebraic = 1e-10;      // exact identities (pi maps, hitting decompositions)
    double eigen = 1e-9;           // eigenvalue inequalities
    double positivity_rel = 1e-9;  // sign counting, scaled by max(1, |H|_F)
    double support = 1e-12;        // cI entries below this are treated as zero edges
    double roundoff_zero = 1e-13;  // negative round-off clamped to 0
};

// Subset of at most 64 sites, stored as a bitmask.
class SiteSet {
public:
    constexpr SiteSet() = default;
    constexpr explicit SiteSet(std::uint64_t bits) : bits_(bits) {}

    static SiteSet of(std::initializer_list<int> sites)
    {
        SiteSet s;
        for (int v : sites) s = s.with(v);
        return s;
    }
    static SiteSet all(int n) { return SiteSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1); }

    constexpr bool contains(int v) const { return (bits_ >> v) & 1U; }
    constexpr SiteSet with(int v) const { return SiteSet(bits_ | (std::uint64_t{1} << v)); }
    constexpr SiteSet without(int v) const { return SiteSet(bits_ & ~(std::uint64_t{1} << v)); }
    constexpr SiteSet united(SiteSet o) const { return SiteSet(bits_ | o.bits_); }
    constexpr bool empty() const { return bits_ == 0; }
    int size() const { return std::popcount(bits_); }
    constexpr std::uint64_t bits() const { return bits_; }

    std::vector<int> members() const
    {
        std::vector<int> out;
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
        return out;
    }

    friend constexpr bool operator==(SiteSet, SiteSet) = default;
    friend constexpr auto operator<=>(SiteSet a, SiteSet b) { return a.bits_ <=> b.bits_; }

private:
    std::uint64_t bits_ = 0;
};

inline double clamp_roundoff(double x, double tol = 1e-13)
{
    return (x < 0.0 && x > -tol) ? 0.0 : x;
}

}  // namespace spectral_trickle
