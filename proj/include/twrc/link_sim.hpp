#pragma once

// Runs a synthesized design over one MAC and one BC channel use.

#include <array>
#include <cstdint>

#include "twrc/gsa.hpp"

namespace twrc {

using CVector = Eigen::VectorXcd;

/// Per raw user: paired symbols s_i^p (layout.pair_count) and extra symbols
/// s_i^r (layout.extra_count for the sender of the extra streams, else empty).
struct SymbolBlock {
    std::array<CVector, 4> pair;
    std::array<CVector, 4> extra;
};

/// CN(0,1) symbols shaped for `design`.
SymbolBlock random_symbols(const TransceiverDesign& design, std::uint64_t seed);
SymbolBlock zero_symbols(const TransceiverDesign& design);

struct RecoveryReport {
    double max_abs_error = 0.0;
    /// Largest error among the streams user i decodes from its partner.
    std::array<double, 4> per_user_errors{};
    bool passed = false;
};

/// Noiseless MAC + relay + BC pass with self-interference cancellation at
/// each user. Throws InvalidDesign on shape mismatches.
RecoveryReport run_noiseless(const TransceiverDesign& design, const ChannelSet& ch, const SymbolBlock& symbols,
                             const Tolerance& tol = {});

struct SnrPoint {
    /// Transmit power per node, linear scale; noise variance is 1.
    double p = 1.0;
};

struct NoisyReport {
    /// Gaussian-input rate of user i's message at its partner, bits per use.
    std::array<double, 4> rate_bits{};
    double sum_rate = 0.0;
    /// Monte-Carlo mean squared error of the decoded partner symbols, one
    /// entry per user; zero when num_trials is 0.
    std::array<double, 4> empirical_mse{};
    double user_gain = 0.0;   // common amplitude applied to all precoders
    double relay_gain = 0.0;  // amplitude applied to Q T at the relay
};

/// AWGN evaluation: users scale their precoders by one common gain so every
/// user meets E[x^H x] <= p, the relay scales Q T so E[x_r^H x_r] = p, and
/// each user's rate is the log-det mutual information of its effective
/// linear model (relay noise forwarded through T W P and other-pair leakage
/// counted as noise). Deterministic for a fixed seed.
NoisyReport run_noisy(const TransceiverDesign& design, const ChannelSet& ch, SnrPoint snr, int num_trials = 0,
                      std::uint64_t seed = 0);

/// (R_sum(p_high) - R_sum(p_low)) / (log2 p_high - log2 p_low). Requires
/// p_high > p_low >= 1e4 (throws InvalidConfig otherwise).
double estimate_dof_slope(const TransceiverDesign& design, const ChannelSet& ch, double p_low, double p_high);

}  // namespace twrc
