#pragma once

// Generalized signal alignment: relay compression, source precoders and
// zero-forcing for the MAC phase, and the mirrored receive design for the BC
// phase.
//
// Conventions used throughout:
//  * In each pair the user with more streams is the "sender": it transmits
//    min(d_i, d_partner) paired streams that are aligned with its partner's
//    at the relay, plus |d_i - d_partner| unidirectional streams. With equal
//    counts the first user of the pair is the sender of zero extra streams.
//  * The relay decodes s_r = [pair-1 sums; pair-2 sums; pair-1 extra;
//    pair-2 extra], J = (max d in pair 1) + (max d in pair 2) symbols.
//  * Antenna deactivation keeps the leading antennas: H_{i,r} -> leading
//    columns (user side) and leading rows (relay side).

#include <array>
#include <cstdint>
#include <utility>

#include "twrc/dof_region.hpp"
#include "twrc/numkernel.hpp"

namespace twrc {

/// Channel realisation for one use of each phase.
struct ChannelSet {
    std::array<CMatrix, 4> uplink;    // H_{i,r}: N x M_i
    std::array<CMatrix, 4> downlink;  // H_{r,i}: M_i x N

    /// Throws InvalidMatrix when shapes disagree with `cfg` or entries are not finite.
    void validate(const AntennaConfig& cfg) const;
};

/// i.i.d. CN(0,1) channels; uplink i uses derive_seed(seed, i), downlink
/// derive_seed(seed, 4 + i).
ChannelSet random_channels(const AntennaConfig& cfg, std::uint64_t seed);

/// Antennas left active after the regime's deactivation rule.
struct ActiveAntennas {
    std::array<int, 4> users{};
    int relay = 0;
};

/// For a canonical config and an in-region tuple:
///   N >= M1+M2          : users 1 and 3 keep M2 and M4 antennas;
///   M3+M4 <= N < M1+M2  : user 3 keeps M4 antennas;
///   N < M3+M4           : the relay keeps J antennas.
ActiveAntennas active_antennas(const AntennaConfig& cfg, const DoFTuple& d);

/// Truncates every channel to the active antennas.
ChannelSet restrict_channels(const ChannelSet& ch, const ActiveAntennas& active);

struct FeasibilityReport {
    bool feasible = false;
    int j = 0;
    /// Rows of the compression matrix that must lie in the left null space of
    /// [H_i H_partner], per pair; clamped at 0.
    std::array<int, 2> per_pair_required_rows{};
    /// Dimension of that left null space, N_eff - M_i - M_partner clamped at 0.
    std::array<int, 2> null_space_dims{};
    ActiveAntennas active;
};

/// Row counts for given active antenna counts and an integer tuple (any
/// within-pair orientation). Does not test region membership.
FeasibilityReport gsa_requirements(const ActiveAntennas& active, const std::array<int, 4>& d);

/// Validates the tuple (NonIntegerTuple, InfeasibleTuple), applies the
/// regime's deactivation and reports the alignment requirements.
FeasibilityReport check_gsa_feasibility(const AntennaConfig& cfg, const DoFTuple& d);

/// J x N_eff compression matrix for the MAC phase. `cfg`, `d` and `ch` use
/// canonical user order; `ch` has full (undeactivated) shapes.
CMatrix design_relay_compression(const AntennaConfig& cfg, const DoFTuple& d, const ChannelSet& ch,
                                 const Tolerance& tol, std::uint64_t seed);

/// Precoders (V_i, V_partner) with P h_i V_i = P h_partner V_partner, built
/// from the null space of P [h_i, -h_partner]. The basis is rotated so that
/// the chosen d_pair directions carry the largest aligned signal P h_i V_i;
/// throws AlignmentInfeasible when fewer than d_pair such directions exist.
std::pair<CMatrix, CMatrix> design_pair_precoders(const CMatrix& p, const CMatrix& h_i, const CMatrix& h_partner,
                                                  int d_pair, const Tolerance& tol);

/// Random columns V^r so that [v_pair V^r] has rank d_total. Retries up to
/// kMaxRandomRetries draws. Throws TooManyStreams if m_eff < d_total.
CMatrix complete_unidirectional(const CMatrix& v_pair, int m_eff, int d_total, std::uint64_t seed,
                                const Tolerance& tol = {});

inline constexpr int kMaxRandomRetries = 8;

/// One phase of the design in canonical user order. For the MAC phase
/// `compress` is P and `pair`/`extra` are the transmit precoders; for the BC
/// phase the same fields hold Q^T and the transposed receive filters.
struct PhaseDesign {
    CMatrix compress;
    std::array<CMatrix, 4> pair;
    std::array<CMatrix, 4> extra;
    CMatrix stack;
    CMatrix zero_forcer;
};

/// Zero-forcer W = [P G_s1 V_s1^p | P G_s2 V_s2^p | P G_s1 V_s1^r | P G_s2 V_s2^r]^-1
/// where s1, s2 are the stream-carrying users of each pair. `g` are the
/// effective channels (relay side first). Throws SingularMatrix.
CMatrix mac_decoder(const CMatrix& p, const std::array<CMatrix, 4>& g, const std::array<CMatrix, 4>& pair,
                    const std::array<CMatrix, 4>& extra, const std::array<int, 2>& carriers, const Tolerance& tol,
                    CMatrix* stack_out = nullptr);

struct BcDesign {
    CMatrix q;                        // N_eff x J
    std::array<CMatrix, 4> u_pair;    // d_pair x M_eff
    std::array<CMatrix, 4> u_uni;     // extra-stream receive rows (0 rows unless receiving them)
    CMatrix t;                        // J x J
};

/// BC phase: Q, U and T with U_i^p H_{r,i} Q = U_partner^p H_{r,partner} Q per
/// pair and T inverting the stacked receive matrix. Canonical user order.
BcDesign design_bc(const AntennaConfig& cfg, const DoFTuple& d, const ChannelSet& ch, const Tolerance& tol,
                   std::uint64_t seed);

/// Where each user's streams sit inside the relay's J-dimensional symbol vector.
struct StreamLayout {
    int partner = 0;
    int pair_offset = 0;
    int pair_count = 0;
    int extra_offset = 0;
    int extra_count = 0;
    bool sends_extra = false;
};

/// Complete transceiver design, indexed by raw user.
struct TransceiverDesign {
    AntennaConfig config;  // raw
    DoFTuple tuple;        // raw
    UserPermutation permutation;
    Regime regime = Regime::LargeRelay;
    int j = 0;
    ActiveAntennas active;  // raw user order
    std::array<StreamLayout, 4> layout;

    CMatrix p;                          // J x N_eff
    std::array<CMatrix, 4> v_pair;      // M_eff x pair_count
    std::array<CMatrix, 4> v_uni;       // M_eff x extra_count for senders, M_eff x 0 otherwise
    CMatrix w;                          // J x J
    CMatrix q;                          // N_eff x J
    std::array<CMatrix, 4> u_pair;      // pair_count x M_eff
    std::array<CMatrix, 4> u_uni;       // extra_count x M_eff for extra-stream receivers, 0 x M_eff otherwise
    CMatrix t;                          // J x J

    int attempts = 1;
};

/// Residuals and ranks that certify a design against its channels.
struct DesignCheck {
    double mac_alignment = 0.0;  // max over pairs, relative to ||P|| ||H||
    double bc_alignment = 0.0;
    double mac_inverse = 0.0;    // ||W S - I||
    double bc_inverse = 0.0;
    bool precoder_ranks_ok = false;
    bool compress_ranks_ok = false;

    bool ok(const Tolerance& tol) const;
};

DesignCheck check_design(const TransceiverDesign& design, const ChannelSet& ch, const Tolerance& tol = {});

/// Full pipeline on raw-indexed inputs: canonicalize, orient each pair, apply
/// deactivation, build MAC and BC designs and verify them. Degenerate random
/// draws are retried with derived seeds up to kMaxRandomRetries times before
/// the SingularMatrix error propagates.
TransceiverDesign synthesize(const AntennaConfig& cfg_raw, const DoFTuple& d_raw, const ChannelSet& ch_raw,
                             std::uint64_t seed, const Tolerance& tol = {});

}  // namespace twrc
