#include "twrc/gsa.hpp"

#include <algorithm>
#include <optional>

namespace twrc {

void ChannelSet::validate(const AntennaConfig& cfg) const {
    for (int i = 0; i < 4; ++i) {
        const auto& up = uplink[i];
        const auto& down = downlink[i];
        if (up.rows() != cfg.n || up.cols() != cfg.m[i] || down.rows() != cfg.m[i] || down.cols() != cfg.n) {
            throw Error(ErrorKind::InvalidMatrix,
                        "channel shapes for user " + std::to_string(i + 1) + " do not match " + to_string(cfg));
        }
        if (!up.allFinite() || !down.allFinite()) {
            throw Error(ErrorKind::InvalidMatrix, "channel entries must be finite");
        }
    }
}

ChannelSet random_channels(const AntennaConfig& cfg, std::uint64_t seed) {
    ChannelSet ch;
    for (int i = 0; i < 4; ++i) {
        ch.uplink[i] = random_complex_gaussian(cfg.n, cfg.m[i], derive_seed(seed, i));
        ch.downlink[i] = random_complex_gaussian(cfg.m[i], cfg.n, derive_seed(seed, 4 + i));
    }
    return ch;
}

namespace {

int compressed_dimension(const std::array<int, 4>& d) {
    return std::max(d[0], d[1]) + std::max(d[2], d[3]);
}

std::array<int, 4> validated_integers(const AntennaConfig& cfg, const DoFTuple& d) {
    if (!cfg.is_canonical()) {
        throw Error(ErrorKind::InvalidConfig, "expected a canonical config, got " + to_string(cfg));
    }
    if (!d.is_nonnegative()) {
        throw Error(ErrorKind::InvalidTuple, "tuple " + to_string(d) + " has a negative component");
    }
    const auto di = d.as_integers();
    const auto violated = violated_facets(cfg, d);
    if (!violated.empty()) {
        std::string labels;
        for (auto f : violated) labels += std::string(label(f));
        throw Error(ErrorKind::InfeasibleTuple,
                    "tuple " + to_string(d) + " is outside the region of " + to_string(cfg) + " (facets " + labels + ")");
    }
    return di;
}

// Everything about a synthesis that follows from (config, tuple) alone.
struct Plan {
    std::array<int, 4> d{};
    ActiveAntennas active;
    FeasibilityReport report;
    int j = 0;
    std::array<int, 2> sender{};    // canonical user carrying the extra MAC streams
    std::array<int, 2> receiver{};  // its partner
    std::array<int, 2> d_pair{};
    std::array<int, 2> d_extra{};
};

Plan make_plan(const AntennaConfig& cfg, const DoFTuple& d) {
    Plan plan;
    plan.d = validated_integers(cfg, d);
    plan.active = active_antennas(cfg, d);
    plan.report = gsa_requirements(plan.active, plan.d);
    if (!plan.report.feasible) {
        throw Error(ErrorKind::InfeasibleTuple, "alignment requirements cannot be met for " + to_string(d));
    }
    plan.j = plan.report.j;
    for (int k = 0; k < 2; ++k) {
        const int a = 2 * k;
        const int b = 2 * k + 1;
        plan.sender[k] = plan.d[a] >= plan.d[b] ? a : b;
        plan.receiver[k] = plan.sender[k] == a ? b : a;
        plan.d_pair[k] = std::min(plan.d[a], plan.d[b]);
        plan.d_extra[k] = std::abs(plan.d[a] - plan.d[b]);
    }
    return plan;
}

// Compression matrix: for each pair, the required rows are random
// combinations of the left null space of [G_a G_b]; the remaining rows are
// i.i.d. Gaussian.
CMatrix build_compression(const std::array<CMatrix, 4>& g, const Plan& plan, const Tolerance& tol,
                          std::uint64_t seed) {
    const Eigen::Index n_eff = plan.active.relay;
    CMatrix p(0, n_eff);
    int used = 0;
    for (int k = 0; k < 2; ++k) {
        const int rows = plan.report.per_pair_required_rows[k];
        if (rows == 0) continue;
        const CMatrix stacked = hcat(g[2 * k], g[2 * k + 1]);
        const CMatrix left_null = null_space_basis(stacked.transpose(), tol);
        if (left_null.cols() < rows) {
            throw Error(ErrorKind::AlignmentInfeasible, "left null space of pair " + std::to_string(k + 1) +
                                                            " has dimension " + std::to_string(left_null.cols()) +
                                                            ", need " + std::to_string(rows));
        }
        const CMatrix mix = random_complex_gaussian(left_null.cols(), rows, derive_seed(seed, k));
        p = vcat(p, (left_null * mix).transpose());
        used += rows;
    }
    p = vcat(p, random_complex_gaussian(plan.j - used, n_eff, derive_seed(seed, 2)));
    if (rank(p, tol) != plan.j) {
        throw Error(ErrorKind::SingularMatrix, "compression matrix is not full row rank");
    }
    return p;
}

PhaseDesign design_phase(const std::array<CMatrix, 4>& g, const Plan& plan, const std::array<int, 2>& carriers,
                         const Tolerance& tol, std::uint64_t seed) {
    PhaseDesign out;
    out.compress = build_compression(g, plan, tol, derive_seed(seed, 0));
    for (int k = 0; k < 2; ++k) {
        const int c = carriers[k];
        const int o = (c % 2 == 0) ? c + 1 : c - 1;
        auto [vc, vo] = design_pair_precoders(out.compress, g[c], g[o], plan.d_pair[k], tol);
        out.extra[c] = complete_unidirectional(vc, plan.active.users[c], plan.d_pair[k] + plan.d_extra[k],
                                               derive_seed(seed, 1 + k), tol);
        out.extra[o] = CMatrix(plan.active.users[o], 0);
        out.pair[c] = std::move(vc);
        out.pair[o] = std::move(vo);
    }
    out.zero_forcer = mac_decoder(out.compress, g, out.pair, out.extra, carriers, tol, &out.stack);
    return out;
}

std::array<CMatrix, 4> uplink_of(const ChannelSet& ch) { return ch.uplink; }

std::array<CMatrix, 4> transposed_downlink_of(const ChannelSet& ch) {
    std::array<CMatrix, 4> g;
    for (int i = 0; i < 4; ++i) g[i] = ch.downlink[i].transpose();
    return g;
}

ChannelSet to_canonical(const ChannelSet& raw, const UserPermutation& perm) {
    ChannelSet out;
    out.uplink = perm.to_canonical(raw.uplink);
    out.downlink = perm.to_canonical(raw.downlink);
    return out;
}

double relative(double num, double scale) { return scale > 0.0 ? num / scale : num; }

}  // namespace

ActiveAntennas active_antennas(const AntennaConfig& cfg, const DoFTuple& d) {
    const auto di = d.as_integers();
    ActiveAntennas a;
    a.users = cfg.m;
    a.relay = cfg.n;
    switch (regime_of(cfg)) {
        case Regime::LargeRelay:
            a.users[0] = cfg.m[1];
            a.users[2] = cfg.m[3];
            break;
        case Regime::MediumRelay:
            a.users[2] = cfg.m[3];
            break;
        case Regime::SmallRelay:
            a.relay = compressed_dimension(di);
            break;
    }
    return a;
}

ChannelSet restrict_channels(const ChannelSet& ch, const ActiveAntennas& active) {
    ChannelSet out;
    for (int i = 0; i < 4; ++i) {
        out.uplink[i] = ch.uplink[i].topLeftCorner(active.relay, active.users[i]);
        out.downlink[i] = ch.downlink[i].topLeftCorner(active.users[i], active.relay);
    }
    return out;
}

FeasibilityReport gsa_requirements(const ActiveAntennas& active, const std::array<int, 4>& d) {
    FeasibilityReport rep;
    rep.active = active;
    rep.j = compressed_dimension(d);
    bool ok = rep.j <= active.relay;
    for (int k = 0; k < 2; ++k) {
        const int a = 2 * k;
        const int b = 2 * k + 1;
        const int antennas = active.users[a] + active.users[b];
        const int d_pair = std::min(d[a], d[b]);
        const int d_max = std::max(d[a], d[b]);
        rep.per_pair_required_rows[k] = std::max(0, rep.j - antennas + d_pair);
        rep.null_space_dims[k] = std::max(0, active.relay - antennas);
        ok = ok && rep.per_pair_required_rows[k] <= rep.null_space_dims[k];
        // Both ends of a pair handle the larger stream count (send in MAC, receive in BC).
        ok = ok && active.users[a] >= d_max && active.users[b] >= d_max;
    }
    ok = ok && rep.per_pair_required_rows[0] + rep.per_pair_required_rows[1] <= rep.j;
    rep.feasible = ok;
    return rep;
}

FeasibilityReport check_gsa_feasibility(const AntennaConfig& cfg, const DoFTuple& d) {
    const auto di = validated_integers(cfg, d);
    return gsa_requirements(active_antennas(cfg, d), di);
}

CMatrix design_relay_compression(const AntennaConfig& cfg, const DoFTuple& d, const ChannelSet& ch,
                                 const Tolerance& tol, std::uint64_t seed) {
    tol.validate();
    ch.validate(cfg);
    const Plan plan = make_plan(cfg, d);
    return build_compression(uplink_of(restrict_channels(ch, plan.active)), plan, tol, seed);
}

std::pair<CMatrix, CMatrix> design_pair_precoders(const CMatrix& p, const CMatrix& h_i, const CMatrix& h_partner,
                                                  int d_pair, const Tolerance& tol) {
    if (d_pair < 0) throw Error(ErrorKind::InvalidTuple, "negative pair stream count");
    if (d_pair == 0) return {CMatrix(h_i.cols(), 0), CMatrix(h_partner.cols(), 0)};

    const CMatrix ph_i = p * h_i;
    const CMatrix ph_o = p * h_partner;
    const CMatrix basis = null_space_basis(hcat(ph_i, -ph_o), tol);
    if (basis.cols() < d_pair) {
        throw Error(ErrorKind::AlignmentInfeasible, "aligned null space has dimension " +
                                                        std::to_string(basis.cols()) + ", need " +
                                                        std::to_string(d_pair));
    }

    // Null vectors with P h_i V_i = 0 align trivially and carry nothing; rotate
    // the basis so its leading directions maximise the aligned image.
    const CMatrix image = ph_i * basis.topRows(h_i.cols());
    Eigen::JacobiSVD<CMatrix> svd(image, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() < d_pair || sv(0) == 0.0 || sv(d_pair - 1) <= tol.rel_rank_tol * sv(0)) {
        throw Error(ErrorKind::AlignmentInfeasible, "aligned subspace at the relay is smaller than the pair count");
    }
    const CMatrix v = basis * svd.matrixV().leftCols(d_pair);
    return {v.topRows(h_i.cols()), v.bottomRows(h_partner.cols())};
}

CMatrix complete_unidirectional(const CMatrix& v_pair, int m_eff, int d_total, std::uint64_t seed,
                                const Tolerance& tol) {
    if (m_eff < d_total) {
        throw Error(ErrorKind::TooManyStreams, std::to_string(d_total) + " streams on " + std::to_string(m_eff) +
                                                   " active antennas");
    }
    if (v_pair.rows() != m_eff || v_pair.cols() > d_total) {
        throw Error(ErrorKind::InvalidMatrix, "pair precoder shape does not match the antenna or stream count");
    }
    const Eigen::Index extra = d_total - v_pair.cols();
    if (extra == 0) return CMatrix(m_eff, 0);

    for (int attempt = 0; attempt < kMaxRandomRetries; ++attempt) {
        CMatrix candidate = random_complex_gaussian(m_eff, extra, derive_seed(seed, attempt));
        candidate.colwise().normalize();
        if (rank(hcat(v_pair, candidate), tol) == d_total) return candidate;
    }
    throw Error(ErrorKind::SingularMatrix, "could not complete precoder to full column rank");
}

CMatrix mac_decoder(const CMatrix& p, const std::array<CMatrix, 4>& g, const std::array<CMatrix, 4>& pair,
                    const std::array<CMatrix, 4>& extra, const std::array<int, 2>& carriers, const Tolerance& tol,
                    CMatrix* stack_out) {
    CMatrix stack(p.rows(), 0);
    for (int k = 0; k < 2; ++k) stack = hcat(stack, p * g[carriers[k]] * pair[carriers[k]]);
    for (int k = 0; k < 2; ++k) stack = hcat(stack, p * g[carriers[k]] * extra[carriers[k]]);
    if (stack.rows() != stack.cols()) {
        throw Error(ErrorKind::InvalidDesign, "stacked effective matrix is " + std::to_string(stack.rows()) + "x" +
                                                  std::to_string(stack.cols()));
    }
    CMatrix w = inverse(stack, tol);
    if (stack_out) *stack_out = std::move(stack);
    return w;
}

BcDesign design_bc(const AntennaConfig& cfg, const DoFTuple& d, const ChannelSet& ch, const Tolerance& tol,
                   std::uint64_t seed) {
    tol.validate();
    ch.validate(cfg);
    const Plan plan = make_plan(cfg, d);
    const PhaseDesign mirrored =
        design_phase(transposed_downlink_of(restrict_channels(ch, plan.active)), plan, plan.receiver, tol, seed);
    BcDesign bc;
    bc.q = mirrored.compress.transpose();
    for (int i = 0; i < 4; ++i) {
        bc.u_pair[i] = mirrored.pair[i].transpose();
        bc.u_uni[i] = mirrored.extra[i].transpose();
    }
    bc.t = mirrored.zero_forcer.transpose();
    return bc;
}

bool DesignCheck::ok(const Tolerance& tol) const {
    return mac_alignment <= tol.residual_tol && bc_alignment <= tol.residual_tol && mac_inverse <= tol.residual_tol &&
           bc_inverse <= tol.residual_tol && precoder_ranks_ok && compress_ranks_ok;
}

DesignCheck check_design(const TransceiverDesign& design, const ChannelSet& ch_raw, const Tolerance& tol) {
    ch_raw.validate(design.config);
    const ChannelSet ch = restrict_channels(ch_raw, design.active);
    const int j = design.j;
    DesignCheck out;

    CMatrix mac_stack = CMatrix::Zero(j, j);
    CMatrix bc_stack = CMatrix::Zero(j, j);
    bool ranks = true;
    for (int i = 0; i < 4; ++i) {
        const StreamLayout& lay = design.layout[i];
        const int o = lay.partner;
        if (lay.pair_count > 0 && i < o) {
            const CMatrix mac_i = design.p * ch.uplink[i] * design.v_pair[i];
            const CMatrix mac_o = design.p * ch.uplink[o] * design.v_pair[o];
            const double mac_scale = design.p.norm() * std::max(ch.uplink[i].norm(), ch.uplink[o].norm());
            out.mac_alignment = std::max(out.mac_alignment, relative((mac_i - mac_o).norm(), mac_scale));

            const CMatrix bc_i = design.u_pair[i] * ch.downlink[i] * design.q;
            const CMatrix bc_o = design.u_pair[o] * ch.downlink[o] * design.q;
            const double bc_scale = design.q.norm() * std::max(ch.downlink[i].norm(), ch.downlink[o].norm());
            out.bc_alignment = std::max(out.bc_alignment, relative((bc_i - bc_o).norm(), bc_scale));

            mac_stack.middleCols(lay.pair_offset, lay.pair_count) = mac_i;
            bc_stack.middleRows(lay.pair_offset, lay.pair_count) = bc_i;
        }
        if (lay.sends_extra) {
            mac_stack.middleCols(lay.extra_offset, lay.extra_count) = design.p * ch.uplink[i] * design.v_uni[i];
            const CMatrix full = hcat(design.v_pair[i], design.v_uni[i]);
            ranks = ranks && rank(full, tol) == lay.pair_count + lay.extra_count;
        } else if (lay.extra_count > 0) {
            bc_stack.middleRows(lay.extra_offset, lay.extra_count) = design.u_uni[i] * ch.downlink[i] * design.q;
            const CMatrix full = vcat(design.u_pair[i], design.u_uni[i]);
            ranks = ranks && rank(full, tol) == lay.pair_count + lay.extra_count;
        }
        ranks = ranks && rank(design.v_pair[i], tol) == lay.pair_count && rank(design.u_pair[i], tol) == lay.pair_count;
    }
    out.precoder_ranks_ok = ranks;
    out.compress_ranks_ok = rank(design.p, tol) == j && rank(design.q, tol) == j;
    const CMatrix eye = CMatrix::Identity(j, j);
    out.mac_inverse = j > 0 ? (design.w * mac_stack - eye).norm() : 0.0;
    out.bc_inverse = j > 0 ? (bc_stack * design.t - eye).norm() : 0.0;
    return out;
}

TransceiverDesign synthesize(const AntennaConfig& cfg_raw, const DoFTuple& d_raw, const ChannelSet& ch_raw,
                             std::uint64_t seed, const Tolerance& tol) {
    tol.validate();
    const auto [cfg, perm] = canonicalize(cfg_raw);
    ch_raw.validate(cfg_raw);
    const DoFTuple d = perm.to_canonical(d_raw);
    const Plan plan = make_plan(cfg, d);

    const ChannelSet ch = restrict_channels(to_canonical(ch_raw, perm), plan.active);
    const auto g_mac = uplink_of(ch);
    const auto g_bc = transposed_downlink_of(ch);
    const auto raw_of = perm.canonical_to_raw();

    TransceiverDesign design;
    design.config = cfg_raw;
    design.tuple = d_raw;
    design.permutation = perm;
    design.regime = regime_of(cfg);
    design.j = plan.j;
    design.active.users = perm.to_raw(plan.active.users);
    design.active.relay = plan.active.relay;

    const int extra_base = plan.d_pair[0] + plan.d_pair[1];
    for (int c = 0; c < 4; ++c) {
        const int k = c / 2;
        StreamLayout lay;
        lay.partner = raw_of[c % 2 == 0 ? c + 1 : c - 1];
        lay.pair_offset = k == 0 ? 0 : plan.d_pair[0];
        lay.pair_count = plan.d_pair[k];
        lay.extra_offset = extra_base + (k == 0 ? 0 : plan.d_extra[0]);
        lay.extra_count = plan.d_extra[k];
        lay.sends_extra = plan.d_extra[k] > 0 && c == plan.sender[k];
        design.layout[raw_of[c]] = lay;
    }

    std::optional<Error> last_error;
    for (int attempt = 0; attempt < kMaxRandomRetries; ++attempt) {
        const std::uint64_t attempt_seed = derive_seed(seed, 1000 + attempt);
        try {
            const PhaseDesign mac = design_phase(g_mac, plan, plan.sender, tol, derive_seed(attempt_seed, 0));
            const PhaseDesign bc = design_phase(g_bc, plan, plan.receiver, tol, derive_seed(attempt_seed, 1));

            design.p = mac.compress;
            design.w = mac.zero_forcer;
            design.q = bc.compress.transpose();
            design.t = bc.zero_forcer.transpose();
            std::array<CMatrix, 4> u_pair, u_uni;
            for (int c = 0; c < 4; ++c) {
                u_pair[c] = bc.pair[c].transpose();
                u_uni[c] = bc.extra[c].transpose();
            }
            design.v_pair = perm.to_raw(mac.pair);
            design.v_uni = perm.to_raw(mac.extra);
            design.u_pair = perm.to_raw(u_pair);
            design.u_uni = perm.to_raw(u_uni);
            design.attempts = attempt + 1;

            const DesignCheck check = check_design(design, ch_raw, tol);
            if (!check.ok(tol)) {
                throw Error(ErrorKind::SingularMatrix, "synthesized design failed its residual or rank checks");
            }
            return design;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularMatrix && e.kind() != ErrorKind::AlignmentInfeasible) throw;
            last_error = e;
        }
    }
    throw *last_error;
}

}  // namespace twrc
