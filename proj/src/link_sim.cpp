#include "twrc/link_sim.hpp"

#include <algorithm>
#include <cmath>

namespace twrc {

namespace {

bool receives_extra(const StreamLayout& lay) { return lay.extra_count > 0 && !lay.sends_extra; }

int sent_count(const StreamLayout& lay) { return lay.pair_count + (lay.sends_extra ? lay.extra_count : 0); }

void require_shapes(const TransceiverDesign& design, const ChannelSet& ch) {
    try {
        ch.validate(design.config);
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidDesign, e.what());
    }
    const int j = design.j;
    const int n_eff = design.active.relay;
    auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidDesign, what); };
    if (design.p.rows() != j || design.p.cols() != n_eff) bad("P has the wrong shape");
    if (design.q.rows() != n_eff || design.q.cols() != j) bad("Q has the wrong shape");
    if (design.w.rows() != j || design.w.cols() != j) bad("W has the wrong shape");
    if (design.t.rows() != j || design.t.cols() != j) bad("T has the wrong shape");
    for (int i = 0; i < 4; ++i) {
        const auto& lay = design.layout[i];
        const int m = design.active.users[i];
        if (m > design.config.m[i] || n_eff > design.config.n) bad("active antenna count exceeds the config");
        if (design.v_pair[i].rows() != m || design.v_pair[i].cols() != lay.pair_count) bad("V^p has the wrong shape");
        if (design.u_pair[i].rows() != lay.pair_count || design.u_pair[i].cols() != m) bad("U^p has the wrong shape");
        const int v_extra = lay.sends_extra ? lay.extra_count : 0;
        const int u_extra = receives_extra(lay) ? lay.extra_count : 0;
        if (design.v_uni[i].rows() != m || design.v_uni[i].cols() != v_extra) bad("V^r has the wrong shape");
        if (design.u_uni[i].rows() != u_extra || design.u_uni[i].cols() != m) bad("U^r has the wrong shape");
    }
}

void require_symbols(const TransceiverDesign& design, const SymbolBlock& s) {
    for (int i = 0; i < 4; ++i) {
        const auto& lay = design.layout[i];
        const int extra = lay.sends_extra ? lay.extra_count : 0;
        if (s.pair[i].size() != lay.pair_count || s.extra[i].size() != extra) {
            throw Error(ErrorKind::InvalidDesign, "symbol block does not match the design's stream layout");
        }
    }
}

CMatrix full_precoder(const TransceiverDesign& d, int i) { return hcat(d.v_pair[i], d.v_uni[i]); }
CMatrix full_filter(const TransceiverDesign& d, int i) { return vcat(d.u_pair[i], d.u_uni[i]); }

CVector full_symbols(const SymbolBlock& s, int i) {
    CVector out(s.pair[i].size() + s.extra[i].size());
    out << s.pair[i], s.extra[i];
    return out;
}

// log2 det(I + A^H N^-1 A) for Hermitian positive definite N.
double log_det_rate(const CMatrix& a, const CMatrix& noise_cov) {
    if (a.cols() == 0) return 0.0;
    const Eigen::LLT<CMatrix> chol(noise_cov);
    const CMatrix whitened = chol.matrixL().solve(a);
    CMatrix gram = CMatrix::Identity(a.cols(), a.cols()) + whitened.adjoint() * whitened;
    const Eigen::LLT<CMatrix> g(gram);
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < gram.rows(); ++k) logdet += 2.0 * std::log2(std::real(g.matrixL()(k, k)));
    return logdet;
}

}  // namespace

SymbolBlock random_symbols(const TransceiverDesign& design, std::uint64_t seed) {
    SymbolBlock s;
    GaussianSource source(seed);
    for (int i = 0; i < 4; ++i) {
        const auto& lay = design.layout[i];
        s.pair[i] = random_complex_gaussian(lay.pair_count, 1, source);
        s.extra[i] = random_complex_gaussian(lay.sends_extra ? lay.extra_count : 0, 1, source);
    }
    return s;
}

SymbolBlock zero_symbols(const TransceiverDesign& design) {
    SymbolBlock s;
    for (int i = 0; i < 4; ++i) {
        const auto& lay = design.layout[i];
        s.pair[i] = CVector::Zero(lay.pair_count);
        s.extra[i] = CVector::Zero(lay.sends_extra ? lay.extra_count : 0);
    }
    return s;
}

RecoveryReport run_noiseless(const TransceiverDesign& design, const ChannelSet& ch_raw, const SymbolBlock& symbols,
                             const Tolerance& tol) {
    require_shapes(design, ch_raw);
    require_symbols(design, symbols);
    const ChannelSet ch = restrict_channels(ch_raw, design.active);

    CVector y_r = CVector::Zero(design.active.relay);
    for (int i = 0; i < 4; ++i) y_r += ch.uplink[i] * (full_precoder(design, i) * full_symbols(symbols, i));

    const CVector s_hat = design.w * (design.p * y_r);
    const CVector x_r = design.q * (design.t * s_hat);

    RecoveryReport rep;
    for (int i = 0; i < 4; ++i) {
        const auto& lay = design.layout[i];
        const int o = lay.partner;
        const CVector z = full_filter(design, i) * (ch.downlink[i] * x_r);

        double err = 0.0;
        if (lay.pair_count > 0) {
            const CVector partner_pair = z.head(lay.pair_count) - symbols.pair[i];
            err = std::max(err, (partner_pair - symbols.pair[o]).cwiseAbs().maxCoeff());
        }
        if (receives_extra(lay)) {
            err = std::max(err, (z.tail(lay.extra_count) - symbols.extra[o]).cwiseAbs().maxCoeff());
        }
        rep.per_user_errors[i] = err;
        rep.max_abs_error = std::max(rep.max_abs_error, err);
    }
    rep.passed = rep.max_abs_error <= tol.residual_tol;
    return rep;
}

NoisyReport run_noisy(const TransceiverDesign& design, const ChannelSet& ch_raw, SnrPoint snr, int num_trials,
                      std::uint64_t seed) {
    require_shapes(design, ch_raw);
    if (!(snr.p > 0.0)) throw Error(ErrorKind::InvalidConfig, "transmit power must be positive");

    NoisyReport rep;
    const int j = design.j;
    if (j == 0) return rep;
    const ChannelSet ch = restrict_channels(ch_raw, design.active);

    double max_energy = 0.0;
    for (int i = 0; i < 4; ++i) max_energy = std::max(max_energy, full_precoder(design, i).squaredNorm());
    const double alpha = std::sqrt(snr.p / max_energy);

    // Relay estimate s_hat = alpha * sum_i F_i s_i + W P n_r.
    const CMatrix relay_filter = design.w * design.p;
    std::array<CMatrix, 4> f;
    CMatrix s_hat_cov = relay_filter * relay_filter.adjoint();
    for (int i = 0; i < 4; ++i) {
        f[i] = relay_filter * ch.uplink[i] * full_precoder(design, i);
        s_hat_cov += alpha * alpha * f[i] * f[i].adjoint();
    }
    const CMatrix forward = design.q * design.t;
    const double beta = std::sqrt(snr.p / std::real((forward * s_hat_cov * forward.adjoint()).trace()));
    rep.user_gain = alpha;
    rep.relay_gain = beta;

    // Receiver o decodes the message of its partner i.
    std::array<CMatrix, 4> end_to_end;   // user filter output per unit of s_hat
    std::array<CMatrix, 4> noise_cov;
    for (int o = 0; o < 4; ++o) {
        const CMatrix u = full_filter(design, o);
        end_to_end[o] = beta * u * ch.downlink[o] * forward;
        const CMatrix relay_noise = end_to_end[o] * relay_filter;
        noise_cov[o] = relay_noise * relay_noise.adjoint() + u * u.adjoint();
        for (int k = 0; k < 4; ++k) {
            if (k == o || k == design.layout[o].partner) continue;
            const CMatrix leak = alpha * end_to_end[o] * f[k];
            noise_cov[o] += leak * leak.adjoint();
        }
    }
    for (int i = 0; i < 4; ++i) {
        const int o = design.layout[i].partner;
        if (sent_count(design.layout[i]) == 0) continue;
        const CMatrix desired = alpha * end_to_end[o] * f[i];
        rep.rate_bits[i] = log_det_rate(desired, noise_cov[o]);
        rep.sum_rate += rep.rate_bits[i];
    }

    if (num_trials > 0) {
        GaussianSource source(seed);
        for (int trial = 0; trial < num_trials; ++trial) {
            SymbolBlock s;
            for (int i = 0; i < 4; ++i) {
                const auto& lay = design.layout[i];
                s.pair[i] = random_complex_gaussian(lay.pair_count, 1, source);
                s.extra[i] = random_complex_gaussian(lay.sends_extra ? lay.extra_count : 0, 1, source);
            }
            CVector y_r = random_complex_gaussian(design.active.relay, 1, source);
            for (int i = 0; i < 4; ++i) y_r += alpha * ch.uplink[i] * (full_precoder(design, i) * full_symbols(s, i));
            const CVector x_r = beta * forward * (design.w * (design.p * y_r));
            for (int o = 0; o < 4; ++o) {
                const auto& lay = design.layout[o];
                const int i = lay.partner;
                const int recv = sent_count(design.layout[i]);
                if (recv == 0) continue;
                const CVector y = ch.downlink[o] * x_r + random_complex_gaussian(design.active.users[o], 1, source);
                CVector z = full_filter(design, o) * y / (alpha * beta);
                z.head(lay.pair_count) -= s.pair[o];
                rep.empirical_mse[i] += (z - full_symbols(s, i)).squaredNorm() / recv;
            }
        }
        for (auto& m : rep.empirical_mse) m /= num_trials;
    }
    return rep;
}

double estimate_dof_slope(const TransceiverDesign& design, const ChannelSet& ch, double p_low, double p_high) {
    if (!(p_low >= 1e4) || !(p_high > p_low)) {
        throw Error(ErrorKind::InvalidConfig, "slope estimate needs p_high > p_low >= 1e4");
    }
    const double low = run_noisy(design, ch, {p_low}).sum_rate;
    const double high = run_noisy(design, ch, {p_high}).sum_rate;
    return (high - low) / (std::log2(p_high) - std::log2(p_low));
}

}  // namespace twrc
