#include <functional>

#include <gtest/gtest.h>

#include "twrc/gsa.hpp"

using namespace twrc;

namespace {

const AntennaConfig kWorked{{6, 5, 4, 4}, 9};
const DoFTuple kWorkedTuple(5, 3, 3, 1);

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::InvalidDesign;
}

}  // namespace

TEST(Channels, ShapesAndDeterminism) {
    const ChannelSet ch = random_channels(kWorked, 5);
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(ch.uplink[i].rows(), 9);
        EXPECT_EQ(ch.uplink[i].cols(), kWorked.m[i]);
        EXPECT_EQ(ch.downlink[i].rows(), kWorked.m[i]);
        EXPECT_EQ(ch.downlink[i].cols(), 9);
    }
    EXPECT_TRUE(random_channels(kWorked, 5).uplink[2] == ch.uplink[2]);
    EXPECT_FALSE(random_channels(kWorked, 6).uplink[2] == ch.uplink[2]);
    EXPECT_NO_THROW(ch.validate(kWorked));
    EXPECT_EQ(kind_of([&] { ch.validate({{6, 5, 4, 3}, 9}); }), ErrorKind::InvalidMatrix);
}

TEST(Deactivation, PerRegime) {
    const auto large = active_antennas({{6, 5, 4, 3}, 12}, DoFTuple(2, 2, 2, 2));
    EXPECT_EQ(large.users, (std::array<int, 4>{5, 5, 3, 3}));
    EXPECT_EQ(large.relay, 12);
    const auto medium = active_antennas(kWorked, kWorkedTuple);
    EXPECT_EQ(medium.users, (std::array<int, 4>{6, 5, 4, 4}));
    EXPECT_EQ(medium.relay, 9);
    const auto small = active_antennas({{4, 4, 3, 3}, 5}, DoFTuple(2, 1, 2, 2));
    EXPECT_EQ(small.users, (std::array<int, 4>{4, 4, 3, 3}));
    EXPECT_EQ(small.relay, 4);
}

TEST(Feasibility, WorkedExample) {
    const auto rep = check_gsa_feasibility(kWorked, kWorkedTuple);
    EXPECT_TRUE(rep.feasible);
    EXPECT_EQ(rep.j, 8);
    EXPECT_EQ(rep.per_pair_required_rows[0], 0);
    EXPECT_EQ(rep.per_pair_required_rows[1], 1);
    EXPECT_EQ(rep.null_space_dims[1], 1);
}

TEST(Feasibility, SmallerRelayLosesTheNullRow) {
    ActiveAntennas active;
    active.users = {6, 5, 4, 4};
    active.relay = 8;
    const auto rep = gsa_requirements(active, {5, 3, 3, 1});
    EXPECT_FALSE(rep.feasible);
    EXPECT_EQ(rep.per_pair_required_rows[1], 1);
    EXPECT_EQ(rep.null_space_dims[1], 0);
}

TEST(Feasibility, SymmetricExchangeNeedsNoRows) {
    const auto rep = check_gsa_feasibility({{4, 4, 4, 4}, 8}, DoFTuple(2, 2, 2, 2));
    EXPECT_TRUE(rep.feasible);
    EXPECT_EQ(rep.per_pair_required_rows, (std::array<int, 2>{0, 0}));
}

TEST(Feasibility, ReportedRowsFitTheNullSpace) {
    for (int n = 1; n <= 10; ++n) {
        const AntennaConfig cfg{{4, 3, 3, 2}, n};
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; b <= 4; ++b)
                for (int c = 0; c <= 3; ++c)
                    for (int d = 0; d <= 3; ++d) {
                        const DoFTuple t(a, b, c, d);
                        if (!in_region(cfg, t)) continue;
                        const auto rep = check_gsa_feasibility(cfg, t);
                        if (!rep.feasible) continue;
                        for (int k = 0; k < 2; ++k) EXPECT_LE(rep.per_pair_required_rows[k], rep.null_space_dims[k]);
                        EXPECT_LE(rep.j, rep.active.relay);
                    }
    }
}

TEST(Feasibility, Errors) {
    EXPECT_EQ(kind_of([] { check_gsa_feasibility(kWorked, DoFTuple(Rational(1, 2), 0, 0, 0)); }),
              ErrorKind::NonIntegerTuple);
    EXPECT_EQ(kind_of([] { check_gsa_feasibility(kWorked, DoFTuple(5, 3, 3, 2)); }), ErrorKind::InfeasibleTuple);
    EXPECT_EQ(kind_of([] { check_gsa_feasibility({{4, 4, 4, 4}, 6}, DoFTuple(3, 3, 3, 3)); }),
              ErrorKind::InfeasibleTuple);
}

TEST(Compression, WorkedExampleHasOneNullRow) {
    const ChannelSet ch = random_channels(kWorked, 1);
    const CMatrix p = design_relay_compression(kWorked, kWorkedTuple, ch, {}, 2);
    EXPECT_EQ(p.rows(), 8);
    EXPECT_EQ(p.cols(), 9);
    EXPECT_EQ(rank(p), 8);
    // Exactly one direction of P annihilates [H3 H4]; none annihilates [H1 H2].
    EXPECT_EQ(rank(p * hcat(ch.uplink[2], ch.uplink[3])), 7);
    EXPECT_EQ(rank(p * hcat(ch.uplink[0], ch.uplink[1])), 8);
}

TEST(Compression, SmallRelayUsesJAntennas) {
    const AntennaConfig cfg{{4, 4, 4, 4}, 6};
    const ChannelSet ch = random_channels(cfg, 3);
    const CMatrix p = design_relay_compression(cfg, DoFTuple(3, 2, 3, 2), ch, {}, 4);
    EXPECT_EQ(p.rows(), 6);
    EXPECT_EQ(p.cols(), 6);
    EXPECT_EQ(rank(p), 6);
    EXPECT_NO_THROW(inverse(p));
}

TEST(Compression, OutOfRegionTupleRejected) {
    const AntennaConfig cfg{{4, 4, 4, 4}, 6};
    EXPECT_EQ(kind_of([&] { design_relay_compression(cfg, DoFTuple(3, 3, 3, 3), random_channels(cfg, 1), {}, 1); }),
              ErrorKind::InfeasibleTuple);
}

TEST(Compression, UnconstrainedIsFullRank) {
    const AntennaConfig cfg{{4, 4, 4, 4}, 8};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CMatrix p = design_relay_compression(cfg, DoFTuple(2, 2, 2, 2), random_channels(cfg, seed), {}, seed);
        EXPECT_EQ(rank(p), 4);
    }
}

TEST(PairPrecoders, WorkedExampleShapesAndAlignment) {
    const Tolerance tol;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ChannelSet ch = random_channels(kWorked, seed);
        const CMatrix p = design_relay_compression(kWorked, kWorkedTuple, ch, tol, seed);
        EXPECT_EQ(null_space_basis(p * hcat(ch.uplink[0], -ch.uplink[1])).cols(), 3);
        const auto [v1, v2] = design_pair_precoders(p, ch.uplink[0], ch.uplink[1], 3, tol);
        EXPECT_EQ(v1.rows(), 6);
        EXPECT_EQ(v1.cols(), 3);
        EXPECT_EQ(v2.rows(), 5);
        EXPECT_EQ(v2.cols(), 3);
        const double scale = p.norm() * ch.uplink[0].norm();
        EXPECT_LT((p * ch.uplink[0] * v1 - p * ch.uplink[1] * v2).norm(), 1e-8 * scale);
        EXPECT_EQ(rank(v1), 3);
        EXPECT_EQ(rank(v2), 3);
        EXPECT_EQ(rank(p * ch.uplink[0] * v1), 3);
    }
}

TEST(PairPrecoders, ZeroStreams) {
    const ChannelSet ch = random_channels(kWorked, 1);
    const auto [a, b] = design_pair_precoders(CMatrix::Identity(9, 9), ch.uplink[0], ch.uplink[1], 0, {});
    EXPECT_EQ(a.rows(), 6);
    EXPECT_EQ(a.cols(), 0);
    EXPECT_EQ(b.rows(), 5);
    EXPECT_EQ(b.cols(), 0);
}

TEST(PairPrecoders, InsufficientNullSpace) {
    const ChannelSet ch = random_channels(kWorked, 1);
    const CMatrix p = random_complex_gaussian(8, 9, 2);
    EXPECT_EQ(kind_of([&] { design_pair_precoders(p, ch.uplink[2], ch.uplink[3], 2, {}); }),
              ErrorKind::AlignmentInfeasible);
}

TEST(Unidirectional, RankOverSeeds) {
    const CMatrix v_pair = random_complex_gaussian(6, 3, 9);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const CMatrix v_r = complete_unidirectional(v_pair, 6, 5, seed);
        EXPECT_EQ(v_r.rows(), 6);
        EXPECT_EQ(v_r.cols(), 2);
        EXPECT_EQ(rank(hcat(v_pair, v_r)), 5);
    }
}

TEST(Unidirectional, EmptyWhenSymmetric) {
    EXPECT_EQ(complete_unidirectional(random_complex_gaussian(4, 2, 1), 4, 2, 0).cols(), 0);
}

TEST(Unidirectional, TooManyStreams) {
    EXPECT_EQ(kind_of([] { complete_unidirectional(CMatrix(3, 1), 3, 4, 0); }), ErrorKind::TooManyStreams);
}

TEST(Synthesis, WorkedExampleDesign) {
    const ChannelSet ch = random_channels(kWorked, 11);
    const TransceiverDesign d = synthesize(kWorked, kWorkedTuple, ch, 11);
    EXPECT_EQ(d.j, 8);
    EXPECT_EQ(d.regime, Regime::MediumRelay);
    EXPECT_EQ(d.p.rows(), 8);
    EXPECT_EQ(d.p.cols(), 9);
    EXPECT_EQ(d.w.rows(), 8);
    EXPECT_EQ(d.w.cols(), 8);
    EXPECT_EQ(d.q.rows(), 9);
    EXPECT_EQ(d.q.cols(), 8);
    EXPECT_EQ(d.t.rows(), 8);
    EXPECT_EQ(d.t.cols(), 8);
    EXPECT_EQ(d.v_pair[0].cols(), 3);
    EXPECT_EQ(d.v_uni[0].cols(), 2);
    EXPECT_EQ(d.v_uni[1].cols(), 0);
    EXPECT_EQ(d.v_pair[2].cols(), 1);
    EXPECT_EQ(d.v_uni[2].cols(), 2);
    EXPECT_EQ(d.u_uni[1].rows(), 2);
    EXPECT_EQ(d.u_uni[3].rows(), 2);
    EXPECT_EQ(rank(hcat(d.v_pair[0], d.v_uni[0])), 5);
    EXPECT_EQ(rank(hcat(d.v_pair[2], d.v_uni[2])), 3);
    EXPECT_TRUE(d.layout[0].sends_extra);
    EXPECT_FALSE(d.layout[1].sends_extra);
    EXPECT_EQ(d.layout[0].partner, 1);
    EXPECT_EQ(d.layout[3].partner, 2);
    EXPECT_TRUE(check_design(d, ch).ok({}));
}

TEST(Synthesis, ResidualsOverHundredSeeds) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ChannelSet ch = random_channels(kWorked, seed);
        const TransceiverDesign d = synthesize(kWorked, kWorkedTuple, ch, seed);
        const DesignCheck c = check_design(d, ch);
        EXPECT_LT(c.mac_alignment, 1e-8);
        EXPECT_LT(c.bc_alignment, 1e-8);
        EXPECT_LT(c.mac_inverse, 1e-9);
        EXPECT_LT(c.bc_inverse, 1e-9);
        ok += c.ok({});
    }
    EXPECT_GE(ok, 99);
}

TEST(Synthesis, ZeroRowTuplesSucceedOverSeeds) {
    const AntennaConfig cfg{{4, 4, 4, 4}, 8};
    const DoFTuple t(3, 2, 2, 2);
    ASSERT_EQ(check_gsa_feasibility(cfg, t).per_pair_required_rows, (std::array<int, 2>{0, 0}));
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ChannelSet ch = random_channels(cfg, seed);
        try {
            ok += check_design(synthesize(cfg, t, ch, seed), ch).ok({});
        } catch (const Error&) {
        }
    }
    EXPECT_GE(ok, 99);
}

TEST(Synthesis, EmptyTuple) {
    const ChannelSet ch = random_channels(kWorked, 1);
    const TransceiverDesign d = synthesize(kWorked, DoFTuple(0, 0, 0, 0), ch, 1);
    EXPECT_EQ(d.j, 0);
    EXPECT_EQ(d.p.rows(), 0);
    EXPECT_EQ(d.w.size(), 0);
}

TEST(Synthesis, RawOrderingIsMappedBack) {
    // Pairs exchanged and user 1's pair listed with the larger-d user second.
    const AntennaConfig raw{{4, 4, 5, 6}, 9};
    const DoFTuple t(1, 3, 3, 5);
    const ChannelSet ch = random_channels(raw, 4);
    const TransceiverDesign d = synthesize(raw, t, ch, 4);
    EXPECT_TRUE(d.permutation.pair_swap);
    EXPECT_EQ(d.j, 8);
    EXPECT_TRUE(d.layout[3].sends_extra);
    EXPECT_TRUE(d.layout[1].sends_extra);
    EXPECT_EQ(d.layout[3].partner, 2);
    EXPECT_EQ(d.v_pair[3].rows(), 6);
    EXPECT_EQ(d.v_pair[3].cols() + d.v_uni[3].cols(), 5);
    EXPECT_EQ(d.v_pair[0].cols(), 1);
    EXPECT_TRUE(check_design(d, ch).ok({}));
}

TEST(Synthesis, RejectsBadTuples) {
    const ChannelSet ch = random_channels(kWorked, 1);
    EXPECT_EQ(kind_of([&] { synthesize(kWorked, DoFTuple(Rational(3, 2), 1, 1, 1), ch, 1); }),
              ErrorKind::NonIntegerTuple);
    EXPECT_EQ(kind_of([&] { synthesize(kWorked, DoFTuple(5, 3, 3, 2), ch, 1); }), ErrorKind::InfeasibleTuple);
    EXPECT_EQ(kind_of([&] { synthesize(kWorked, DoFTuple(-1, 0, 0, 0), ch, 1); }), ErrorKind::InvalidTuple);
    EXPECT_EQ(kind_of([&] { synthesize(kWorked, kWorkedTuple, random_channels({{6, 5, 4, 4}, 8}, 1), 1); }),
              ErrorKind::InvalidMatrix);
}

TEST(Synthesis, DeterministicForSeed) {
    const ChannelSet ch = random_channels(kWorked, 2);
    const auto a = synthesize(kWorked, kWorkedTuple, ch, 7);
    const auto b = synthesize(kWorked, kWorkedTuple, ch, 7);
    EXPECT_TRUE(a.p == b.p);
    EXPECT_TRUE(a.w == b.w);
    EXPECT_TRUE(a.t == b.t);
}

TEST(Synthesis, FeasibilityPredictsSuccessOnSmallGrid) {
    int feasible = 0, synthesized = 0;
    for (int m1 = 1; m1 <= 3; ++m1)
        for (int m2 = 1; m2 <= m1; ++m2)
            for (int m3 = 1; m3 <= 3; ++m3)
                for (int m4 = 1; m4 <= m3; ++m4) {
                    if (m3 + m4 > m1 + m2) continue;
                    for (int n = 1; n <= 6; ++n) {
                        const AntennaConfig cfg{{m1, m2, m3, m4}, n};
                        const ChannelSet ch = random_channels(cfg, n);
                        for (int a = 0; a <= m2; ++a)
                            for (int b = 0; b <= m2; ++b)
                                for (int c = 0; c <= m4; ++c)
                                    for (int d = 0; d <= m4; ++d) {
                                        const DoFTuple t(a, b, c, d);
                                        if (!in_region(cfg, t)) continue;
                                        if (!check_gsa_feasibility(cfg, t).feasible) {
                                            EXPECT_EQ(kind_of([&] { synthesize(cfg, t, ch, 0); }),
                                                      ErrorKind::InfeasibleTuple);
                                            continue;
                                        }
                                        ++feasible;
                                        try {
                                            synthesized += check_design(synthesize(cfg, t, ch, 0), ch).ok({});
                                        } catch (const Error& e) {
                                            ADD_FAILURE() << to_string(cfg) << " " << to_string(t) << ": "
                                                          << e.what();
                                        }
                                    }
                    }
                }
    EXPECT_GT(feasible, 0);
    EXPECT_EQ(synthesized, feasible);
}
