#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "twrc/dof_region.hpp"
#include "twrc/numkernel.hpp"

namespace twrc::cli {

enum class Command { Region, SumDof, Check, Synth, Verify, Sweep };
enum class OutputFormat { Json, Csv, Text };

/// Inclusive ranges for the sweep; only canonical configs are visited.
struct GridBounds {
    int m_min = 1;
    int m_max = 6;
    int n_min = 1;
    int n_max = 14;
};

struct RunSpec {
    Command command = Command::SumDof;
    AntennaConfig config;
    std::optional<DoFTuple> tuple;
    std::uint64_t seed = 0;
    OutputFormat output = OutputFormat::Json;
    Tolerance tol;
    std::optional<GridBounds> grid;
    /// Transmit powers used for the slope estimate in `verify`.
    double slope_p_low = 1e6;
    double slope_p_high = 1e8;

    /// Throws InvalidConfig / InvalidTuple when required fields are missing.
    void validate() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;      // ran, but a check did not pass
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDegenerate = 4;

inline constexpr const char* kSeedEnv = "TWRC_SEED";

std::optional<Command> parse_command(std::string_view s);
std::optional<OutputFormat> parse_output_format(std::string_view s);
std::string_view to_string(Command c);

/// "6,5,4,4,9" -> M1..M4, N. Throws InvalidConfig.
AntennaConfig parse_config(std::string_view s);
/// "5,3,3,1" or "4/3,4/3,2,2". Throws InvalidTuple.
DoFTuple parse_tuple(std::string_view s);
/// "1..5,1..12" -> grid bounds for M_i and N. Throws InvalidConfig.
GridBounds parse_grid(std::string_view s);

/// Value of $TWRC_SEED, or 0 when unset. Throws InvalidConfig if malformed.
std::uint64_t default_seed();

/// Exit code for a library error.
int exit_code_for(ErrorKind kind);

/// Executes the command, writing the report to `out` and diagnostics to `err`.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace twrc::cli
