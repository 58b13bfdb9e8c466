#pragma once

// Exact DoF region and sum-DoF computations for the two-pair MIMO two-way
// relay channel. Users 1,2 form one pair and users 3,4 the other; all
// arithmetic here is over exact rationals.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "twrc/error.hpp"

namespace twrc {

using Rational = boost::rational<std::int64_t>;

std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// Antenna counts M1..M4 (users) and N (relay).
struct AntennaConfig {
    std::array<int, 4> m{};
    int n = 0;

    /// M1 >= M2, M3 >= M4 and M1 + M2 >= M3 + M4.
    bool is_canonical() const;

    friend bool operator==(const AntennaConfig&, const AntennaConfig&) = default;
};

std::string to_string(const AntennaConfig& cfg);

struct DoFTuple {
    std::array<Rational, 4> d{};

    DoFTuple() = default;
    DoFTuple(Rational d1, Rational d2, Rational d3, Rational d4) : d{d1, d2, d3, d4} {}

    Rational sum() const { return d[0] + d[1] + d[2] + d[3]; }
    bool is_integer() const;
    bool is_nonnegative() const;
    /// Integer components; throws NonIntegerTuple if any component is fractional.
    std::array<int, 4> as_integers() const;

    const Rational& operator[](std::size_t i) const { return d[i]; }
    Rational& operator[](std::size_t i) { return d[i]; }

    friend bool operator==(const DoFTuple&, const DoFTuple&) = default;
};

std::string to_string(const DoFTuple& d);

/// Records how raw user indices were reordered into canonical form. Within-pair
/// swaps refer to the raw pairs and are applied before the pair exchange.
struct UserPermutation {
    bool within_pair_swap_12 = false;
    bool within_pair_swap_34 = false;
    bool pair_swap = false;

    /// canonical_to_raw()[c] is the raw index of canonical user c.
    std::array<int, 4> canonical_to_raw() const;

    DoFTuple to_canonical(const DoFTuple& raw) const;
    DoFTuple to_raw(const DoFTuple& canonical) const;

    template <typename T>
    std::array<T, 4> to_raw(const std::array<T, 4>& canonical) const {
        std::array<T, 4> raw{};
        const auto map = canonical_to_raw();
        for (int c = 0; c < 4; ++c) raw[map[c]] = canonical[c];
        return raw;
    }
    template <typename T>
    std::array<T, 4> to_canonical(const std::array<T, 4>& raw) const {
        std::array<T, 4> canonical{};
        const auto map = canonical_to_raw();
        for (int c = 0; c < 4; ++c) canonical[c] = raw[map[c]];
        return canonical;
    }

    bool is_identity() const { return !within_pair_swap_12 && !within_pair_swap_34 && !pair_swap; }
};

/// Throws InvalidConfig if any antenna count is below 1.
std::pair<AntennaConfig, UserPermutation> canonicalize(const AntennaConfig& raw);

/// The twelve facets of the region, labelled a..l:
///   a-d  single-user bounds      d1,d2 <= M2;  d3,d4 <= M4
///   e-h  cross-pair bounds       d1+d3, d1+d4, d2+d3, d2+d4 <= N
///   i-l  three-user bounds       d1+d2+d3, d1+d2+d4 <= max(M1+M2, N)
///                                d1+d3+d4, d2+d3+d4 <= max(M3+M4, N)
enum class Facet : std::uint8_t { A, B, C, D, E, F, G, H, I, J, K, L };

inline constexpr int kFacetCount = 12;

std::string_view label(Facet f);
std::optional<Facet> facet_from_label(std::string_view s);

struct RegionConstraint {
    std::array<int, 4> coeffs{};
    Rational rhs;
    Facet label = Facet::A;

    Rational lhs(const DoFTuple& d) const;
    bool satisfied_by(const DoFTuple& d) const { return lhs(d) <= rhs; }
    bool tight_at(const DoFTuple& d) const { return lhs(d) == rhs; }
};

/// Requires a canonical config (throws InvalidConfig otherwise).
std::array<RegionConstraint, kFacetCount> region_constraints(const AntennaConfig& cfg);

/// Exact membership test. Throws InvalidTuple on a negative component.
bool in_region(const AntennaConfig& cfg, const DoFTuple& d);

/// Labels of the constraints `d` violates (empty iff in_region).
std::vector<Facet> violated_facets(const AntennaConfig& cfg, const DoFTuple& d);

/// Labels of the constraints tight at `d`.
std::vector<Facet> tight_facets(const AntennaConfig& cfg, const DoFTuple& d);

enum class Regime : std::uint8_t {
    LargeRelay = 1,   // N >= M1 + M2
    MediumRelay = 2,  // M3 + M4 <= N < M1 + M2
    SmallRelay = 3,   // N < M3 + M4
};

Regime regime_of(const AntennaConfig& cfg);
std::string_view describe(Regime r);

struct SumDofResult {
    Rational value;
    DoFTuple vertex;
    std::vector<Facet> active_labels;
    Regime regime = Regime::LargeRelay;
};

/// Closed-form optimal sum DoF, with an achieving vertex taken from
/// optimal_vertices().
SumDofResult sum_dof_closed_form(const AntennaConfig& cfg);

/// Brute-force LP oracle: enumerates every 4-subset of the 16 hyperplanes
/// (12 facets plus d_i = 0), solves the 4x4 rational system where nonsingular,
/// and maximises d1+d2+d3+d4 over the feasible intersection points.
SumDofResult sum_dof_oracle(const AntennaConfig& cfg);

/// (s, s, t, t) with s = (d1+d2)/2 and t = (d3+d4)/2.
DoFTuple symmetrize(const DoFTuple& d);

/// Achieving vertex together with where it came from. `utilized` holds the
/// per-user antenna counts left active when the vertex relies on antenna
/// deactivation at the users (2N optimum with a relay smaller than M3+M4).
struct OptimalVertex {
    DoFTuple tuple;
    std::string source;
    std::optional<std::array<int, 4>> utilized;
};

/// Symmetric optimal vertices (d2, d2, d4, d4) of the regime's vertex table
/// whose sum equals the closed-form optimum. Every entry is in the region.
std::vector<OptimalVertex> optimal_vertices_detailed(const AntennaConfig& cfg);
std::vector<DoFTuple> optimal_vertices(const AntennaConfig& cfg);

}  // namespace twrc
