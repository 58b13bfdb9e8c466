// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "twrc/dof_region.hpp"
#include "twrc/gsa.hpp"
#include "twrc/link_sim.hpp"

using namespace twrc;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::vector<AntennaConfig> canonical_grid(int m_max, int n_max) {
    std::vector<AntennaConfig> out;
    for (int m1 = 1; m1 <= m_max; ++m1)
        for (int m2 = 1; m2 <= m1; ++m2)
            for (int m3 = 1; m3 <= m_max; ++m3)
                for (int m4 = 1; m4 <= m3; ++m4) {
                    if (m3 + m4 > m1 + m2) continue;
                    for (int n = 1; n <= n_max; ++n) out.push_back({{m1, m2, m3, m4}, n});
                }
    return out;
}

Rational min_of(std::initializer_list<Rational> xs) { return *std::min_element(xs.begin(), xs.end()); }
Rational max_of(std::initializer_list<Rational> xs) { return *std::max_element(xs.begin(), xs.end()); }

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Feasibility-reported tuples from criteria 3 and 4 and how many of them
// failed to synthesize after reseeding.
struct FeasibilityTally {
    long feasible = 0;
    long failed = 0;
    std::string first_failure;
} feasibility_tally;

void criterion_1() {
    const auto grid = canonical_grid(6, 14);
    long mismatches = 0;
    std::string first;
    for (const auto& cfg : grid) {
        if (sum_dof_closed_form(cfg).value != sum_dof_oracle(cfg).value) {
            if (mismatches++ == 0) first = " first at " + to_string(cfg);
        }
    }
    report(1, "oracle equivalence", mismatches == 0,
           std::to_string(grid.size()) + " canonical configs, " + std::to_string(mismatches) + " mismatches" + first);
}

void criterion_2() {
    long checked = 0, mismatches = 0;
    for (int m = 1; m <= 8; ++m) {
        for (int n = 1; n <= 24; ++n) {
            const AntennaConfig cfg{{m, m, m, m}, n};
            const Rational expected =
                min_of({Rational(4 * m), max_of({Rational(4 * n, 3), Rational(8 * m, 3)}), Rational(2 * n)});
            ++checked;
            if (sum_dof_closed_form(cfg).value != expected) ++mismatches;
        }
    }
    report(2, "symmetric-antenna closed form", mismatches == 0,
           std::to_string(checked) + " configs, " + std::to_string(mismatches) + " mismatches");
}

void criterion_3() {
    const AntennaConfig cfg{{6, 5, 4, 4}, 9};
    const DoFTuple d(5, 3, 3, 1);
    const Tolerance tol;
    int successes = 0;
    bool j_ok = true;
    double worst_align = 0.0, worst_recovery = 0.0, worst_slope = 0.0;
    const bool feasible = check_gsa_feasibility(cfg, d).feasible;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ChannelSet ch = random_channels(cfg, seed);
        try {
            const TransceiverDesign design = synthesize(cfg, d, ch, seed, tol);
            const DesignCheck check = check_design(design, ch, tol);
            const RecoveryReport rec = run_noiseless(design, ch, random_symbols(design, seed + 1), tol);
            const double slope = estimate_dof_slope(design, ch, 1e6, 1e8);
            j_ok = j_ok && design.j == 8;
            worst_align = std::max({worst_align, check.mac_alignment, check.bc_alignment});
            worst_recovery = std::max(worst_recovery, rec.max_abs_error);
            worst_slope = std::max(worst_slope, std::abs(slope - 12.0) / 12.0);
            if (check.ok(tol) && rec.passed) ++successes;
        } catch (const Error&) {
        }
    }
    if (feasible) {
        ++feasibility_tally.feasible;
        if (successes == 0) {
            ++feasibility_tally.failed;
            feasibility_tally.first_failure = "golden tuple";
        }
    }
    const bool ok = successes >= 99 && j_ok && worst_align <= 1e-8 && worst_recovery <= 1e-8 && worst_slope <= 0.05;
    report(3, "golden worked example", ok,
           std::to_string(successes) + "/100 seeds, J=8 " + (j_ok ? "yes" : "no") + ", max alignment " +
               fmt(worst_align) + ", max recovery error " + fmt(worst_recovery) + ", max slope deviation " +
               fmt(100.0 * worst_slope) + "%");
}

void criterion_4() {
    const auto grid = canonical_grid(5, 12);
    const Tolerance tol;
    long integer_vertices = 0, rational_vertices = 0, failures_here = 0;
    std::string first;
    for (const auto& cfg : grid) {
        for (const DoFTuple& v : optimal_vertices(cfg)) {
            if (!v.is_integer()) {
                ++rational_vertices;
                if (!in_region(cfg, v) && failures_here++ == 0) first = " first non-member " + to_string(v);
                continue;
            }
            ++integer_vertices;
            const bool feasible = check_gsa_feasibility(cfg, v).feasible;
            int passed = 0;
            std::string err;
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const ChannelSet ch = random_channels(cfg, 1000 + seed);
                try {
                    const TransceiverDesign design = synthesize(cfg, v, ch, seed, tol);
                    if (run_noiseless(design, ch, random_symbols(design, seed), tol).passed) ++passed;
                } catch (const Error& e) {
                    err = e.what();
                }
            }
            if (feasible) {
                ++feasibility_tally.feasible;
                if (passed == 0 && feasibility_tally.failed++ == 0) feasibility_tally.first_failure = to_string(cfg) + " " + to_string(v);
            }
            if (passed < 3 && failures_here++ == 0) {
                first = " first at " + to_string(cfg) + " " + to_string(v) + (err.empty() ? "" : " (" + err + ")");
            }
        }
    }
    report(4, "vertex achievability", failures_here == 0,
           std::to_string(grid.size()) + " configs, " + std::to_string(integer_vertices) +
               " integer vertices synthesized on 3 seeds, " + std::to_string(rational_vertices) +
               " rational vertices membership-checked, " + std::to_string(failures_here) + " failures" + first);
}

// Uniform rational in [0, hi] with a denominator drawn from 1..6.
Rational random_rational(std::mt19937_64& rng, int hi) {
    const int den = std::uniform_int_distribution<int>(1, 6)(rng);
    const int num = std::uniform_int_distribution<int>(0, hi * den)(rng);
    return Rational(num, den);
}

AntennaConfig random_canonical(std::mt19937_64& rng, const std::vector<AntennaConfig>& grid) {
    return grid[std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(rng)];
}

void criterion_5() {
    std::mt19937_64 rng(5);
    const auto grid = canonical_grid(6, 14);
    long samples = 0, violations = 0, attempts = 0;
    while (samples < 100000) {
        const AntennaConfig cfg = random_canonical(rng, grid);
        DoFTuple d;
        for (int i = 0; i < 4; ++i) d[i] = random_rational(rng, cfg.m[i < 2 ? 1 : 3]);
        ++attempts;
        if (!in_region(cfg, d)) continue;
        ++samples;
        const DoFTuple s = symmetrize(d);
        if (!in_region(cfg, s) || s.sum() != d.sum()) ++violations;
    }
    report(5, "symmetrization preserves membership and sum", violations == 0,
           std::to_string(samples) + " in-region samples (" + std::to_string(attempts) + " drawn), " +
               std::to_string(violations) + " violations");
}

void criterion_6() {
    std::mt19937_64 rng(6);
    const auto grid = canonical_grid(6, 14);
    long inside = 0, violations = 0;
    for (int k = 0; k < 100000; ++k) {
        const AntennaConfig cfg = random_canonical(rng, grid);
        DoFTuple d;
        for (int i = 0; i < 4; ++i) d[i] = random_rational(rng, cfg.m[i < 2 ? 0 : 2] + 1);
        const bool base = in_region(cfg, d);
        inside += base;
        const DoFTuple s12(d[1], d[0], d[2], d[3]);
        const DoFTuple s34(d[0], d[1], d[3], d[2]);
        if (in_region(cfg, s12) != base || in_region(cfg, s34) != base) ++violations;
    }
    report(6, "within-pair swap symmetry", violations == 0,
           "100000 tuples (" + std::to_string(inside) + " inside), " + std::to_string(violations) + " violations");
}

void criterion_7() {
    std::mt19937_64 rng(7);
    const auto grid = canonical_grid(6, 14);
    int accepted_scaled = 0, wrong_error = 0, outside_tested = 0;
    for (int k = 0; k < 100; ++k) {
        const AntennaConfig cfg = grid[(k * 37) % grid.size()];
        const SumDofResult best = sum_dof_closed_form(cfg);
        DoFTuple scaled = best.vertex;
        for (auto& x : scaled.d) x *= Rational(101, 100);
        if (in_region(cfg, scaled)) ++accepted_scaled;

        // An integer tuple strictly outside the region.
        DoFTuple out;
        do {
            for (int i = 0; i < 4; ++i) out[i] = std::uniform_int_distribution<int>(0, cfg.m[i] + 1)(rng);
        } while (in_region(cfg, out));
        ++outside_tested;
        try {
            synthesize(cfg, out, random_channels(cfg, k), k);
            ++wrong_error;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InfeasibleTuple) ++wrong_error;
        }
    }
    report(7, "converse sanity", accepted_scaled == 0 && wrong_error == 0,
           "100 configs: scaled optimal vertex accepted " + std::to_string(accepted_scaled) + " times; " +
               std::to_string(outside_tested) + " outside tuples, " + std::to_string(wrong_error) +
               " not rejected with InfeasibleTuple");
}

void criterion_8() {
    report(8, "alignment feasibility consistency", feasibility_tally.failed == 0 && feasibility_tally.feasible > 0,
           std::to_string(feasibility_tally.feasible) + " feasible-reported tuples from criteria 3-4, " +
               std::to_string(feasibility_tally.failed) + " failed synthesis" +
               (feasibility_tally.first_failure.empty() ? "" : " (first: " + feasibility_tally.first_failure + ")"));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
