#include "twrc/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twrc/gsa.hpp"
#include "twrc/link_sim.hpp"

namespace twrc::cli {

namespace {

using Json = nlohmann::ordered_json;
using twrc::to_string;

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

Json rational_json(const Rational& r) {
    return Json{{"num", r.numerator()}, {"den", r.denominator()}, {"value", to_double(r)}};
}

Json tuple_json(const DoFTuple& d) {
    Json arr = Json::array();
    for (const auto& x : d.d) arr.push_back(rational_json(x));
    return arr;
}

Json config_json(const AntennaConfig& cfg) {
    return Json{{"m", cfg.m}, {"n", cfg.n}};
}

Json permutation_json(const UserPermutation& perm) {
    std::array<int, 4> one_based = perm.canonical_to_raw();
    for (auto& x : one_based) ++x;
    return Json{{"swap_12", perm.within_pair_swap_12},
                {"swap_34", perm.within_pair_swap_34},
                {"pair_swap", perm.pair_swap},
                {"canonical_to_raw", one_based}};
}

Json labels_json(const std::vector<Facet>& facets) {
    Json arr = Json::array();
    for (auto f : facets) arr.push_back(std::string(label(f)));
    return arr;
}

std::string labels_text(const std::vector<Facet>& facets) {
    if (facets.empty()) return "none";
    std::string s;
    for (auto f : facets) {
        if (!s.empty()) s += ",";
        s += label(f);
    }
    return s;
}

std::string constraint_text(const RegionConstraint& c) {
    std::string lhs;
    for (int i = 0; i < 4; ++i) {
        if (c.coeffs[i] == 0) continue;
        if (!lhs.empty()) lhs += " + ";
        lhs += "d" + std::to_string(i + 1);
    }
    return "(" + std::string(label(c.label)) + ") " + lhs + " <= " + to_string(c.rhs);
}

Json header(const RunSpec& spec, const AntennaConfig& canonical, const UserPermutation& perm) {
    return Json{{"command", std::string(to_string(spec.command))},
                {"config", config_json(spec.config)},
                {"canonical_config", config_json(canonical)},
                {"permutation", permutation_json(perm)},
                {"regime", static_cast<int>(regime_of(canonical))},
                {"regime_condition", std::string(describe(regime_of(canonical)))}};
}

void print_json(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

int cmd_region(const RunSpec& spec, std::ostream& out) {
    const auto [cfg, perm] = canonicalize(spec.config);
    const auto constraints = region_constraints(cfg);
    switch (spec.output) {
        case OutputFormat::Json: {
            Json rep = header(spec, cfg, perm);
            Json arr = Json::array();
            for (const auto& c : constraints) {
                arr.push_back(Json{{"label", std::string(label(c.label))}, {"coeffs", c.coeffs},
                                   {"rhs", rational_json(c.rhs)}});
            }
            rep["constraints"] = std::move(arr);
            print_json(out, rep);
            break;
        }
        case OutputFormat::Csv:
            out << "label,c1,c2,c3,c4,rhs_num,rhs_den\n";
            for (const auto& c : constraints) {
                out << label(c.label) << "," << c.coeffs[0] << "," << c.coeffs[1] << "," << c.coeffs[2] << ","
                    << c.coeffs[3] << "," << c.rhs.numerator() << "," << c.rhs.denominator() << "\n";
            }
            break;
        case OutputFormat::Text:
            out << "canonical config " << to_string(cfg) << " (regime " << static_cast<int>(regime_of(cfg)) << ": "
                << describe(regime_of(cfg)) << ")\n";
            for (const auto& c : constraints) out << constraint_text(c) << "\n";
            break;
    }
    return kExitOk;
}

int cmd_sumdof(const RunSpec& spec, std::ostream& out) {
    const auto [cfg, perm] = canonicalize(spec.config);
    const SumDofResult closed = sum_dof_closed_form(cfg);
    const SumDofResult oracle = sum_dof_oracle(cfg);
    const bool match = closed.value == oracle.value;
    const auto vertices = optimal_vertices_detailed(cfg);

    switch (spec.output) {
        case OutputFormat::Json: {
            Json rep = header(spec, cfg, perm);
            rep["sum_dof"] = rational_json(closed.value);
            rep["oracle_sum_dof"] = rational_json(oracle.value);
            rep["oracle_match"] = match;
            Json arr = Json::array();
            for (const auto& v : vertices) {
                Json item{{"canonical", tuple_json(v.tuple)},
                          {"raw", tuple_json(perm.to_raw(v.tuple))},
                          {"source", v.source},
                          {"tight", labels_json(tight_facets(cfg, v.tuple))}};
                if (v.utilized) item["utilized_antennas"] = *v.utilized;
                arr.push_back(std::move(item));
            }
            rep["vertices"] = std::move(arr);
            print_json(out, rep);
            break;
        }
        case OutputFormat::Csv:
            out << "m1,m2,m3,m4,n,sum_dof_num,sum_dof_den,regime,oracle_match\n";
            out << spec.config.m[0] << "," << spec.config.m[1] << "," << spec.config.m[2] << "," << spec.config.m[3]
                << "," << spec.config.n << "," << closed.value.numerator() << "," << closed.value.denominator() << ","
                << static_cast<int>(closed.regime) << "," << (match ? "true" : "false") << "\n";
            break;
        case OutputFormat::Text:
            out << "sum DoF " << to_string(closed.value) << " (" << fmt_double(to_double(closed.value)) << ")\n";
            out << "regime " << static_cast<int>(closed.regime) << ": " << describe(closed.regime) << "\n";
            out << "oracle " << to_string(oracle.value) << (match ? " (match)" : " (MISMATCH)") << "\n";
            for (const auto& v : vertices) {
                out << "vertex " << to_string(perm.to_raw(v.tuple)) << " [" << v.source << "]\n";
            }
            break;
    }
    return match ? kExitOk : kExitFailed;
}

int cmd_check(const RunSpec& spec, std::ostream& out) {
    const auto [cfg, perm] = canonicalize(spec.config);
    const DoFTuple d = perm.to_canonical(*spec.tuple);
    const auto violated = violated_facets(cfg, d);
    const bool member = violated.empty();

    std::optional<FeasibilityReport> gsa;
    if (member && d.is_integer()) gsa = check_gsa_feasibility(cfg, d);

    switch (spec.output) {
        case OutputFormat::Json: {
            Json rep = header(spec, cfg, perm);
            rep["tuple"] = tuple_json(*spec.tuple);
            rep["canonical_tuple"] = tuple_json(d);
            rep["in_region"] = member;
            rep["violated"] = labels_json(violated);
            rep["sum"] = rational_json(d.sum());
            if (gsa) {
                rep["alignment"] = Json{{"feasible", gsa->feasible},
                                        {"j", gsa->j},
                                        {"required_rows", gsa->per_pair_required_rows},
                                        {"null_space_dims", gsa->null_space_dims},
                                        {"active_users", perm.to_raw(gsa->active.users)},
                                        {"active_relay", gsa->active.relay}};
            }
            print_json(out, rep);
            break;
        }
        case OutputFormat::Csv:
            out << "in_region,violated,alignment_feasible\n";
            out << (member ? "true" : "false") << "," << labels_text(violated) << ","
                << (gsa ? (gsa->feasible ? "true" : "false") : "n/a") << "\n";
            break;
        case OutputFormat::Text:
            out << "tuple " << to_string(*spec.tuple) << (member ? " is" : " is not") << " in the region of "
                << to_string(spec.config) << "\n";
            out << "violated: " << labels_text(violated) << "\n";
            if (gsa) {
                out << "alignment: " << (gsa->feasible ? "feasible" : "infeasible") << ", J = " << gsa->j
                    << ", required rows " << gsa->per_pair_required_rows[0] << "/" << gsa->per_pair_required_rows[1]
                    << " of " << gsa->null_space_dims[0] << "/" << gsa->null_space_dims[1] << "\n";
            }
            break;
    }
    return kExitOk;
}

Json design_json(const TransceiverDesign& design, const DesignCheck& check, const Tolerance& tol) {
    Json layout = Json::array();
    for (const auto& l : design.layout) {
        layout.push_back(Json{{"partner", l.partner + 1},
                              {"pair_offset", l.pair_offset},
                              {"pair_count", l.pair_count},
                              {"extra_offset", l.extra_offset},
                              {"extra_count", l.extra_count},
                              {"sends_extra", l.sends_extra}});
    }
    return Json{{"j", design.j},
                {"attempts", design.attempts},
                {"active_users", design.active.users},
                {"active_relay", design.active.relay},
                {"layout", std::move(layout)},
                {"check",
                 Json{{"mac_alignment", check.mac_alignment},
                      {"bc_alignment", check.bc_alignment},
                      {"mac_inverse", check.mac_inverse},
                      {"bc_inverse", check.bc_inverse},
                      {"precoder_ranks_ok", check.precoder_ranks_ok},
                      {"compress_ranks_ok", check.compress_ranks_ok},
                      {"ok", check.ok(tol)}}}};
}

void design_text(std::ostream& out, const TransceiverDesign& design, const DesignCheck& check, const Tolerance& tol) {
    out << "J = " << design.j << ", attempts " << design.attempts << ", active antennas " << design.active.users[0]
        << "," << design.active.users[1] << "," << design.active.users[2] << "," << design.active.users[3]
        << " relay " << design.active.relay << "\n";
    out << "alignment residual MAC " << fmt_double(check.mac_alignment) << ", BC " << fmt_double(check.bc_alignment)
        << "\n";
    out << "inverse residual MAC " << fmt_double(check.mac_inverse) << ", BC " << fmt_double(check.bc_inverse) << "\n";
    out << "design " << (check.ok(tol) ? "ok" : "FAILED") << "\n";
}

int cmd_synth(const RunSpec& spec, std::ostream& out, bool verify) {
    const auto [cfg, perm] = canonicalize(spec.config);
    const ChannelSet ch = random_channels(spec.config, spec.seed);
    const TransceiverDesign design = synthesize(spec.config, *spec.tuple, ch, spec.seed, spec.tol);
    const DesignCheck check = check_design(design, ch, spec.tol);
    bool passed = check.ok(spec.tol);

    std::optional<RecoveryReport> recovery;
    double slope = 0.0;
    const double expected = to_double(spec.tuple->sum());
    if (verify) {
        recovery = run_noiseless(design, ch, random_symbols(design, derive_seed(spec.seed, 2000)), spec.tol);
        slope = estimate_dof_slope(design, ch, spec.slope_p_low, spec.slope_p_high);
        passed = passed && recovery->passed;
    }

    switch (spec.output) {
        case OutputFormat::Json: {
            Json rep = header(spec, cfg, perm);
            rep["tuple"] = tuple_json(*spec.tuple);
            rep["seed"] = spec.seed;
            rep["design"] = design_json(design, check, spec.tol);
            if (recovery) {
                rep["recovery"] = Json{{"max_abs_error", recovery->max_abs_error},
                                       {"per_user_errors", recovery->per_user_errors},
                                       {"passed", recovery->passed}};
                rep["slope"] = Json{{"estimate", slope},
                                    {"expected", expected},
                                    {"p_low", spec.slope_p_low},
                                    {"p_high", spec.slope_p_high}};
            }
            rep["passed"] = passed;
            print_json(out, rep);
            break;
        }
        case OutputFormat::Csv:
            out << "j,attempts,mac_alignment,bc_alignment,max_abs_error,slope,expected_slope,passed\n";
            out << design.j << "," << design.attempts << "," << fmt_double(check.mac_alignment) << ","
                << fmt_double(check.bc_alignment) << "," << (recovery ? fmt_double(recovery->max_abs_error) : "")
                << "," << (verify ? fmt_double(slope) : "") << "," << fmt_double(expected) << ","
                << (passed ? "true" : "false") << "\n";
            break;
        case OutputFormat::Text:
            design_text(out, design, check, spec.tol);
            if (recovery) {
                out << "noiseless recovery max error " << fmt_double(recovery->max_abs_error) << " ("
                    << (recovery->passed ? "passed" : "FAILED") << ")\n";
                out << "DoF slope " << fmt_double(slope) << " (expected " << fmt_double(expected) << ")\n";
            }
            out << (passed ? "passed" : "FAILED") << "\n";
            break;
    }
    return passed ? kExitOk : kExitFailed;
}

int cmd_sweep(const RunSpec& spec, std::ostream& out) {
    const GridBounds g = *spec.grid;
    struct Row {
        AntennaConfig cfg;
        Rational value;
        Regime regime;
        bool match;
    };
    std::vector<Row> rows;
    for (int m1 = g.m_min; m1 <= g.m_max; ++m1)
        for (int m2 = g.m_min; m2 <= m1; ++m2)
            for (int m3 = g.m_min; m3 <= g.m_max; ++m3)
                for (int m4 = g.m_min; m4 <= m3; ++m4) {
                    if (m3 + m4 > m1 + m2) continue;
                    for (int n = g.n_min; n <= g.n_max; ++n) {
                        const AntennaConfig cfg{{m1, m2, m3, m4}, n};
                        const auto closed = sum_dof_closed_form(cfg);
                        const auto oracle = sum_dof_oracle(cfg);
                        rows.push_back({cfg, closed.value, closed.regime, closed.value == oracle.value});
                    }
                }
    bool all = true;
    for (const auto& r : rows) all = all && r.match;

    switch (spec.output) {
        case OutputFormat::Csv:
            out << "m1,m2,m3,m4,n,sum_dof_num,sum_dof_den,regime,oracle_match\n";
            for (const auto& r : rows) {
                out << r.cfg.m[0] << "," << r.cfg.m[1] << "," << r.cfg.m[2] << "," << r.cfg.m[3] << "," << r.cfg.n
                    << "," << r.value.numerator() << "," << r.value.denominator() << ","
                    << static_cast<int>(r.regime) << "," << (r.match ? "true" : "false") << "\n";
            }
            break;
        case OutputFormat::Json: {
            Json arr = Json::array();
            for (const auto& r : rows) {
                arr.push_back(Json{{"m", r.cfg.m},
                                   {"n", r.cfg.n},
                                   {"sum_dof", rational_json(r.value)},
                                   {"regime", static_cast<int>(r.regime)},
                                   {"oracle_match", r.match}});
            }
            print_json(out, Json{{"command", "sweep"},
                                 {"grid", Json{{"m_min", g.m_min}, {"m_max", g.m_max}, {"n_min", g.n_min},
                                               {"n_max", g.n_max}}},
                                 {"configs", rows.size()},
                                 {"all_match", all},
                                 {"rows", std::move(arr)}});
            break;
        }
        case OutputFormat::Text: {
            std::size_t mismatches = 0;
            for (const auto& r : rows) {
                if (!r.match) {
                    ++mismatches;
                    out << "mismatch at " << to_string(r.cfg) << "\n";
                }
            }
            out << rows.size() << " canonical configs, " << mismatches << " mismatches\n";
            break;
        }
    }
    return all ? kExitOk : kExitFailed;
}

}  // namespace

void RunSpec::validate() const {
    tol.validate();
    if (command == Command::Sweep) {
        if (!grid) throw Error(ErrorKind::InvalidConfig, "sweep needs grid bounds");
        if (grid->m_min < 1 || grid->n_min < 1 || grid->m_max < grid->m_min || grid->n_max < grid->n_min) {
            throw Error(ErrorKind::InvalidConfig, "grid bounds must be ranges of positive integers");
        }
        return;
    }
    for (int m : config.m) {
        if (m < 1) throw Error(ErrorKind::InvalidConfig, "config " + to_string(config) + " needs counts >= 1");
    }
    if (config.n < 1) throw Error(ErrorKind::InvalidConfig, "config " + to_string(config) + " needs counts >= 1");
    const bool needs_tuple = command == Command::Check || command == Command::Synth || command == Command::Verify;
    if (needs_tuple && !tuple) throw Error(ErrorKind::InvalidTuple, std::string(to_string(command)) + " needs --tuple");
    if (command == Command::Verify && !(slope_p_low >= 1e4 && slope_p_high > slope_p_low)) {
        throw Error(ErrorKind::InvalidConfig, "slope powers need p_high > p_low >= 1e4");
    }
}

std::optional<Command> parse_command(std::string_view s) {
    if (s == "region") return Command::Region;
    if (s == "sumdof") return Command::SumDof;
    if (s == "check") return Command::Check;
    if (s == "synth") return Command::Synth;
    if (s == "verify") return Command::Verify;
    if (s == "sweep") return Command::Sweep;
    return std::nullopt;
}

std::string_view to_string(Command c) {
    switch (c) {
        case Command::Region: return "region";
        case Command::SumDof: return "sumdof";
        case Command::Check: return "check";
        case Command::Synth: return "synth";
        case Command::Verify: return "verify";
        case Command::Sweep: return "sweep";
    }
    return "?";
}

std::optional<OutputFormat> parse_output_format(std::string_view s) {
    if (s == "json") return OutputFormat::Json;
    if (s == "csv") return OutputFormat::Csv;
    if (s == "text") return OutputFormat::Text;
    return std::nullopt;
}

AntennaConfig parse_config(std::string_view s) {
    const auto parts = split(s, ',');
    if (parts.size() != 5) throw Error(ErrorKind::InvalidConfig, "expected M1,M2,M3,M4,N, got '" + std::string(s) + "'");
    AntennaConfig cfg;
    for (int i = 0; i < 5; ++i) {
        const auto v = parse_int<int>(parts[i]);
        if (!v || *v < 1) throw Error(ErrorKind::InvalidConfig, "bad antenna count '" + std::string(parts[i]) + "'");
        (i < 4 ? cfg.m[i] : cfg.n) = *v;
    }
    return cfg;
}

DoFTuple parse_tuple(std::string_view s) {
    const auto parts = split(s, ',');
    if (parts.size() != 4) throw Error(ErrorKind::InvalidTuple, "expected d1,d2,d3,d4, got '" + std::string(s) + "'");
    DoFTuple d;
    for (int i = 0; i < 4; ++i) {
        const auto frac = split(parts[i], '/');
        const auto num = parse_int<std::int64_t>(frac[0]);
        const auto den = frac.size() == 2 ? parse_int<std::int64_t>(frac[1]) : std::optional<std::int64_t>{1};
        if (frac.size() > 2 || !num || !den || *den == 0) {
            throw Error(ErrorKind::InvalidTuple, "bad tuple component '" + std::string(parts[i]) + "'");
        }
        d[i] = Rational(*num, *den);
    }
    return d;
}

GridBounds parse_grid(std::string_view s) {
    const auto parts = split(s, ',');
    auto range = [&](std::string_view r) {
        const auto pos = r.find("..");
        if (pos == std::string_view::npos) {
            throw Error(ErrorKind::InvalidConfig, "expected lo..hi, got '" + std::string(r) + "'");
        }
        const auto lo = parse_int<int>(r.substr(0, pos));
        const auto hi = parse_int<int>(r.substr(pos + 2));
        if (!lo || !hi) throw Error(ErrorKind::InvalidConfig, "bad range '" + std::string(r) + "'");
        return std::pair{*lo, *hi};
    };
    if (parts.size() != 2) throw Error(ErrorKind::InvalidConfig, "expected Mlo..Mhi,Nlo..Nhi");
    const auto [m_lo, m_hi] = range(parts[0]);
    const auto [n_lo, n_hi] = range(parts[1]);
    return GridBounds{m_lo, m_hi, n_lo, n_hi};
}

std::uint64_t default_seed() {
    const char* env = std::getenv(kSeedEnv);
    if (env == nullptr || *env == '\0') return 0;
    const auto v = parse_int<std::uint64_t>(env);
    if (!v) throw Error(ErrorKind::InvalidConfig, std::string(kSeedEnv) + " is not an unsigned integer");
    return *v;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidMatrix:
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidTuple:
        case ErrorKind::NonIntegerTuple:
            return kExitMalformed;
        case ErrorKind::InfeasibleTuple:
        case ErrorKind::TooManyStreams:
            return kExitInfeasible;
        case ErrorKind::SingularMatrix:
        case ErrorKind::AlignmentInfeasible:
        case ErrorKind::InvalidDesign:
            return kExitDegenerate;
    }
    return kExitFailed;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        spec.validate();
        switch (spec.command) {
            case Command::Region: return cmd_region(spec, out);
            case Command::SumDof: return cmd_sumdof(spec, out);
            case Command::Check: return cmd_check(spec, out);
            case Command::Synth: return cmd_synth(spec, out, false);
            case Command::Verify: return cmd_synth(spec, out, true);
            case Command::Sweep: return cmd_sweep(spec, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    }
    return kExitFailed;
}

}  // namespace twrc::cli
