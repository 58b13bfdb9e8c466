#include "twrc/dof_region.hpp"

#include <algorithm>
#include <sstream>

namespace twrc {

std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

bool AntennaConfig::is_canonical() const {
    return m[0] >= m[1] && m[2] >= m[3] && m[0] + m[1] >= m[2] + m[3];
}

std::string to_string(const AntennaConfig& cfg) {
    std::ostringstream os;
    os << cfg.m[0] << ',' << cfg.m[1] << ',' << cfg.m[2] << ',' << cfg.m[3] << ',' << cfg.n;
    return os.str();
}

bool DoFTuple::is_integer() const {
    return std::all_of(d.begin(), d.end(), [](const Rational& x) { return x.denominator() == 1; });
}

bool DoFTuple::is_nonnegative() const {
    return std::all_of(d.begin(), d.end(), [](const Rational& x) { return x >= 0; });
}

std::array<int, 4> DoFTuple::as_integers() const {
    if (!is_integer()) {
        throw Error(ErrorKind::NonIntegerTuple, "tuple " + to_string(*this) + " has fractional components");
    }
    std::array<int, 4> out{};
    for (int i = 0; i < 4; ++i) out[i] = static_cast<int>(d[i].numerator());
    return out;
}

std::string to_string(const DoFTuple& d) {
    return "(" + to_string(d[0]) + "," + to_string(d[1]) + "," + to_string(d[2]) + "," + to_string(d[3]) + ")";
}

// ---------------------------------------------------------------------------
// Canonicalization

std::array<int, 4> UserPermutation::canonical_to_raw() const {
    const int a = within_pair_swap_12 ? 1 : 0;
    const int b = within_pair_swap_12 ? 0 : 1;
    const int c = within_pair_swap_34 ? 3 : 2;
    const int d = within_pair_swap_34 ? 2 : 3;
    if (pair_swap) return {c, d, a, b};
    return {a, b, c, d};
}

DoFTuple UserPermutation::to_canonical(const DoFTuple& raw) const {
    DoFTuple out;
    out.d = to_canonical(raw.d);
    return out;
}

DoFTuple UserPermutation::to_raw(const DoFTuple& canonical) const {
    DoFTuple out;
    out.d = to_raw(canonical.d);
    return out;
}

std::pair<AntennaConfig, UserPermutation> canonicalize(const AntennaConfig& raw) {
    for (int v : raw.m) {
        if (v < 1) throw Error(ErrorKind::InvalidConfig, "user antenna counts must be >= 1");
    }
    if (raw.n < 1) throw Error(ErrorKind::InvalidConfig, "relay antenna count must be >= 1");

    UserPermutation perm;
    perm.within_pair_swap_12 = raw.m[0] < raw.m[1];
    perm.within_pair_swap_34 = raw.m[2] < raw.m[3];
    perm.pair_swap = raw.m[0] + raw.m[1] < raw.m[2] + raw.m[3];

    AntennaConfig cfg;
    cfg.m = perm.to_canonical(raw.m);
    cfg.n = raw.n;
    return {cfg, perm};
}

// ---------------------------------------------------------------------------
// Region

std::string_view label(Facet f) {
    static constexpr std::array<std::string_view, kFacetCount> names = {
        "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
    return names[static_cast<std::size_t>(f)];
}

std::optional<Facet> facet_from_label(std::string_view s) {
    for (int i = 0; i < kFacetCount; ++i) {
        if (label(static_cast<Facet>(i)) == s) return static_cast<Facet>(i);
    }
    return std::nullopt;
}

Rational RegionConstraint::lhs(const DoFTuple& d) const {
    Rational s = 0;
    for (int i = 0; i < 4; ++i) {
        if (coeffs[i] != 0) s += d[i] * coeffs[i];
    }
    return s;
}

std::array<RegionConstraint, kFacetCount> region_constraints(const AntennaConfig& cfg) {
    if (!cfg.is_canonical()) {
        throw Error(ErrorKind::InvalidConfig, "region constraints need a canonical config, got " + to_string(cfg));
    }
    const auto [m1, m2, m3, m4] = cfg.m;
    const int n = cfg.n;
    const int first = std::max(m1 + m2, n);
    const int second = std::max(m3 + m4, n);
    return {{
        {{1, 0, 0, 0}, m2, Facet::A},
        {{0, 1, 0, 0}, m2, Facet::B},
        {{0, 0, 1, 0}, m4, Facet::C},
        {{0, 0, 0, 1}, m4, Facet::D},
        {{1, 0, 1, 0}, n, Facet::E},
        {{1, 0, 0, 1}, n, Facet::F},
        {{0, 1, 1, 0}, n, Facet::G},
        {{0, 1, 0, 1}, n, Facet::H},
        {{1, 1, 1, 0}, first, Facet::I},
        {{1, 1, 0, 1}, first, Facet::J},
        {{1, 0, 1, 1}, second, Facet::K},
        {{0, 1, 1, 1}, second, Facet::L},
    }};
}

std::vector<Facet> violated_facets(const AntennaConfig& cfg, const DoFTuple& d) {
    if (!d.is_nonnegative()) {
        throw Error(ErrorKind::InvalidTuple, "tuple " + to_string(d) + " has a negative component");
    }
    std::vector<Facet> out;
    for (const auto& c : region_constraints(cfg)) {
        if (!c.satisfied_by(d)) out.push_back(c.label);
    }
    return out;
}

bool in_region(const AntennaConfig& cfg, const DoFTuple& d) {
    return violated_facets(cfg, d).empty();
}

std::vector<Facet> tight_facets(const AntennaConfig& cfg, const DoFTuple& d) {
    std::vector<Facet> out;
    for (const auto& c : region_constraints(cfg)) {
        if (c.tight_at(d)) out.push_back(c.label);
    }
    return out;
}

Regime regime_of(const AntennaConfig& cfg) {
    const int s12 = cfg.m[0] + cfg.m[1];
    const int s34 = cfg.m[2] + cfg.m[3];
    if (cfg.n >= s12) return Regime::LargeRelay;
    if (cfg.n >= s34) return Regime::MediumRelay;
    return Regime::SmallRelay;
}

std::string_view describe(Regime r) {
    switch (r) {
        case Regime::LargeRelay: return "N>=M1+M2";
        case Regime::MediumRelay: return "M3+M4<=N<M1+M2";
        case Regime::SmallRelay: return "N<M3+M4";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Vertex tables

namespace {

struct TableRow {
    Rational value;
    Rational d2;
    Rational d4;
    const char* source;
};

DoFTuple lift(const Rational& d2, const Rational& d4) { return {d2, d2, d4, d4}; }

Rational closed_form_value(const AntennaConfig& cfg) {
    const auto [m1, m2, m3, m4] = cfg.m;
    const Rational n = cfg.n;
    switch (regime_of(cfg)) {
        case Regime::LargeRelay:
            return std::min({Rational(2 * m2 + 2 * m4), n * 4 / 3, m2 + n, m4 + n});
        case Regime::MediumRelay:
            return std::min({Rational(2 * m2 + 2 * m4), m2 + n, Rational(m1 + m2 + m4), n * 2,
                             (m1 + m2 + n) * 2 / 3});
        case Regime::SmallRelay:
            return std::min({Rational(2 * m2 + 2 * m4), n * 2, Rational(m2 + m3 + m4), Rational(m1 + m2 + m4),
                             Rational(2 * (m1 + m2 + m3 + m4), 3)});
    }
    return 0;
}

std::vector<TableRow> table_rows(const AntennaConfig& cfg) {
    const auto [m1, m2, m3, m4] = cfg.m;
    const Rational n = cfg.n;
    const Rational M1 = m1, M2 = m2, M3 = m3, M4 = m4;
    switch (regime_of(cfg)) {
        case Regime::LargeRelay:
            return {
                {2 * M2 + 2 * M4, M2, M4, "2M2+2M4"},
                {n * 4 / 3, n / 3, n / 3, "4N/3"},
                {M2 + n, M2, (n - M2) / 2, "M2+N"},
                {M4 + n, (n - M4) / 2, M4, "M4+N"},
            };
        case Regime::MediumRelay:
            return {
                {2 * M2 + 2 * M4, M2, M4, "2M2+2M4"},
                {M2 + n, M2, (n - M2) / 2, "M2+N"},
                {M1 + M2 + M4, (M1 + M2 - M4) / 2, M4, "M1+M2+M4"},
                {n * 2, n, Rational(0), "2N"},
                {(M1 + M2 + n) * 2 / 3, (2 * M1 + 2 * M2 - n) / 3, (2 * n - M1 - M2) / 3, "2(M1+M2+N)/3"},
            };
        case Regime::SmallRelay:
            // The 2N row is resolved separately through user antenna deactivation.
            return {
                {2 * M2 + 2 * M4, M2, M4, "2M2+2M4"},
                {M2 + M3 + M4, M2, (M3 + M4 - M2) / 2, "M2+M3+M4"},
                {M1 + M2 + M4, (M1 + M2 - M4) / 2, M4, "M1+M2+M4"},
                {(M1 + M2 + M3 + M4) * 2 / 3, (2 * M1 + 2 * M2 - M3 - M4) / 3, (-M1 - M2 + 2 * M3 + 2 * M4) / 3,
                 "2(M1+M2+M3+M4)/3"},
            };
    }
    return {};
}

// Vertices reaching 2N when N < M3+M4. Each case fixes which term attains
//   alpha = min{2M2+2M4, M2+M3+M4, M1+M2+M4, 2(M1+M2+M3+M4)/3}
// and, when N is strictly smaller than that term allows, deactivates
// antennas at the listed users until the relay count is matched exactly.
std::vector<OptimalVertex> small_relay_2n_vertices(const AntennaConfig& cfg) {
    const auto& m = cfg.m;
    const int n = cfg.n;
    const Rational two_n = 2 * n;
    const Rational t_22 = 2 * m[1] + 2 * m[3];
    const Rational t_234 = m[1] + m[2] + m[3];
    const Rational t_124 = m[0] + m[1] + m[3];
    const Rational t_all = Rational(2 * (m[0] + m[1] + m[2] + m[3]), 3);
    const Rational alpha = std::min({t_22, t_234, t_124, t_all});

    using Utilized = std::array<int, 4>;
    using VertexOf = DoFTuple (*)(const Utilized&);

    std::vector<OptimalVertex> out;
    auto accept = [&](const DoFTuple& v) {
        return v.is_nonnegative() && v.sum() == two_n && in_region(cfg, v);
    };

    // Searches utilized counts (users in `mask` range over 0..M_i, the rest
    // stay at M_i) satisfying `matches`; prefers the least deactivation and an
    // integral vertex.
    auto search = [&](std::array<bool, 4> mask, auto matches, VertexOf vertex, const char* source) {
        std::optional<OptimalVertex> fallback;
        Utilized u = m;
        auto visit = [&](auto&& self, int user) -> bool {
            if (user == 4) {
                if (!matches(u)) return false;
                const DoFTuple v = vertex(u);
                if (!accept(v)) return false;
                OptimalVertex ov{v, source, u};
                if (v.is_integer()) {
                    out.push_back(ov);
                    return true;
                }
                if (!fallback) fallback = ov;
                return false;
            }
            if (!mask[user]) return self(self, user + 1);
            for (int k = m[user]; k >= 0; --k) {
                u[user] = k;
                if (self(self, user + 1)) return true;
            }
            u[user] = m[user];
            return false;
        };
        if (!visit(visit, 0) && fallback) out.push_back(*fallback);
    };

    const VertexOf pair_bounds = [](const Utilized& u) { return lift(Rational(u[1]), Rational(u[3])); };
    const VertexOf via_234 = [](const Utilized& u) {
        return lift(Rational(u[1]), Rational(u[2] + u[3] - u[1], 2));
    };
    const VertexOf via_124 = [](const Utilized& u) {
        return lift(Rational(u[0] + u[1] - u[3], 2), Rational(u[3]));
    };
    const VertexOf via_all = [](const Utilized& u) {
        return lift(Rational(2 * u[0] + 2 * u[1] - u[2] - u[3], 3), Rational(-u[0] - u[1] + 2 * u[2] + 2 * u[3], 3));
    };

    if (t_22 == alpha) {
        if (n == m[1] + m[3]) {
            const DoFTuple v = pair_bounds(m);
            if (accept(v)) out.push_back({v, "2N: (M2,M4)", std::nullopt});
        } else if (n < m[1] + m[3]) {
            search({false, true, false, true}, [&](const Utilized& u) { return u[1] + u[3] == n; }, pair_bounds,
                   "2N: deactivate users 2,4");
        }
    }
    if (t_234 == alpha) {
        if (two_n == t_234) {
            const DoFTuple v = via_234(m);
            if (accept(v)) out.push_back({v, "2N: (M2,(M3+M4-M2)/2)", std::nullopt});
        } else if (two_n < t_234) {
            search({false, true, true, true}, [&](const Utilized& u) { return u[1] + u[2] + u[3] == 2 * n; },
                   via_234, "2N: deactivate users 2,3,4");
        }
    }
    if (t_124 == alpha) {
        if (two_n == t_124) {
            const DoFTuple v = via_124(m);
            if (accept(v)) out.push_back({v, "2N: ((M1+M2-M4)/2,M4)", std::nullopt});
        }
        search({true, true, false, true}, [&](const Utilized& u) { return u[0] + u[1] + u[3] == 2 * n; }, via_124,
               "2N: deactivate users 1,2,4");
    }
    if (t_all == alpha) {
        if (Rational(n) == t_all) {
            const DoFTuple v = via_all(m);
            if (accept(v)) out.push_back({v, "2N: 2/3 point", std::nullopt});
        } else if (Rational(n) < t_all) {
            search({true, true, true, true},
                   [&](const Utilized& u) { return 3 * n == 2 * (u[0] + u[1] + u[2] + u[3]); }, via_all,
                   "2N: deactivate all users");
        }
    }

    // Endpoints of the symmetric segment (s, s, N-s, N-s) on the 2N face.
    const int lo = std::max({0, n - m[3], 2 * n - m[2] - m[3]});
    const int hi = std::min({m[1], n, m[0] + m[1] - n});
    for (int s : {lo, hi}) {
        if (lo > hi) break;
        const DoFTuple v = lift(Rational(s), Rational(n - s));
        if (accept(v)) out.push_back({v, "2N: symmetric segment endpoint", std::nullopt});
    }
    return out;
}

// Gaussian elimination on a 4x4 rational system; nullopt when singular.
std::optional<std::array<Rational, 4>> solve4(std::array<std::array<Rational, 5>, 4> a) {
    for (int col = 0; col < 4; ++col) {
        int pivot = -1;
        for (int r = col; r < 4; ++r) {
            if (a[r][col] != Rational(0)) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) return std::nullopt;
        std::swap(a[col], a[pivot]);
        for (int r = 0; r < 4; ++r) {
            if (r == col || a[r][col] == Rational(0)) continue;
            const Rational f = a[r][col] / a[col][col];
            for (int k = col; k < 5; ++k) a[r][k] -= f * a[col][k];
        }
    }
    std::array<Rational, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = a[i][4] / a[i][i];
    return x;
}

}  // namespace

std::vector<OptimalVertex> optimal_vertices_detailed(const AntennaConfig& cfg) {
    if (!cfg.is_canonical()) {
        throw Error(ErrorKind::InvalidConfig, "optimal vertices need a canonical config, got " + to_string(cfg));
    }
    const Rational best = closed_form_value(cfg);
    std::vector<OptimalVertex> out;
    auto push_unique = [&](OptimalVertex v) {
        const bool seen = std::any_of(out.begin(), out.end(), [&](const OptimalVertex& o) { return o.tuple == v.tuple; });
        if (!seen) out.push_back(std::move(v));
    };

    for (const auto& row : table_rows(cfg)) {
        if (row.value != best) continue;
        const DoFTuple v = lift(row.d2, row.d4);
        if (v.is_nonnegative() && v.sum() == best && in_region(cfg, v)) push_unique({v, row.source, std::nullopt});
    }
    if (regime_of(cfg) == Regime::SmallRelay && Rational(2 * cfg.n) == best) {
        for (auto& v : small_relay_2n_vertices(cfg)) push_unique(std::move(v));
    }
    return out;
}

std::vector<DoFTuple> optimal_vertices(const AntennaConfig& cfg) {
    std::vector<DoFTuple> out;
    for (const auto& v : optimal_vertices_detailed(cfg)) out.push_back(v.tuple);
    return out;
}

SumDofResult sum_dof_closed_form(const AntennaConfig& cfg) {
    if (!cfg.is_canonical()) {
        throw Error(ErrorKind::InvalidConfig, "sum DoF needs a canonical config, got " + to_string(cfg));
    }
    SumDofResult res;
    res.value = closed_form_value(cfg);
    res.regime = regime_of(cfg);
    const auto vertices = optimal_vertices(cfg);
    if (vertices.empty()) {
        throw Error(ErrorKind::InvalidConfig, "no tabulated vertex attains the optimum for " + to_string(cfg));
    }
    res.vertex = vertices.front();
    res.active_labels = tight_facets(cfg, res.vertex);
    return res;
}

SumDofResult sum_dof_oracle(const AntennaConfig& cfg) {
    const auto facets = region_constraints(cfg);

    // Hyperplanes 0..11 are the facets, 12..15 the coordinate planes d_i = 0.
    std::array<std::array<Rational, 5>, 16> planes;
    for (int i = 0; i < kFacetCount; ++i) {
        for (int k = 0; k < 4; ++k) planes[i][k] = facets[i].coeffs[k];
        planes[i][4] = facets[i].rhs;
    }
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) planes[12 + i][k] = (i == k) ? 1 : 0;
        planes[12 + i][4] = 0;
    }

    SumDofResult best;
    bool found = false;
    for (int a = 0; a < 16; ++a) {
        for (int b = a + 1; b < 16; ++b) {
            for (int c = b + 1; c < 16; ++c) {
                for (int d = c + 1; d < 16; ++d) {
                    const auto x = solve4({planes[a], planes[b], planes[c], planes[d]});
                    if (!x) continue;
                    const DoFTuple v((*x)[0], (*x)[1], (*x)[2], (*x)[3]);
                    if (!v.is_nonnegative()) continue;
                    bool feasible = true;
                    for (const auto& f : facets) {
                        if (!f.satisfied_by(v)) {
                            feasible = false;
                            break;
                        }
                    }
                    if (!feasible) continue;
                    if (!found || v.sum() > best.value) {
                        best.value = v.sum();
                        best.vertex = v;
                        found = true;
                    }
                }
            }
        }
    }
    // The origin is always a vertex, so `found` holds here.
    best.regime = regime_of(cfg);
    best.active_labels = tight_facets(cfg, best.vertex);
    return best;
}

DoFTuple symmetrize(const DoFTuple& d) {
    const Rational s = (d[0] + d[1]) / 2;
    const Rational t = (d[2] + d[3]) / 2;
    return {s, s, t, t};
}

}  // namespace twrc
