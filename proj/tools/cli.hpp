#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdlayer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

inline constexpr std::string_view kVersion = "0.1.0";

enum class Format { Csv, Json, Pretty };

struct RunConfig {
    std::string subcommand;
    std::string scenario = "manufactured";
    std::vector<double> eps0{1e-6};
    std::vector<double> h{1.0 / 64.0};
    double delta = 1.0;
    Format format = Format::Csv;
    std::optional<std::string> output_path;
    std::uint64_t seed = 42;
    bool exact = false;
    std::string suite = "all";
};

/// Parses a comma-separated list of decimals or fractions ("0.5,1/64").
/// Throws std::invalid_argument on malformed input.
std::vector<double> parse_real_list(std::string_view text);

/// Full command line: parse, validate, dispatch, write. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Dispatch of an already validated configuration.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace cdlayer::cli
