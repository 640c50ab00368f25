#pragma once

#include "relsteg/core_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relsteg {

/// Bad flags, bad config or missing inputs. Exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat JSON run configuration. Required: p0, p1, init0, gamma. Optional:
/// b, b_min, b_max, steps, seed, output. Any other key is rejected.
struct RunConfig {
    double p0 = 0.0;
    double p1 = 0.0;
    double init0 = 0.0;
    double gamma = 0.0;
    std::optional<double> b;
    std::optional<double> b_min;
    std::optional<double> b_max;
    std::optional<int> steps;
    std::uint64_t seed = 0;
    std::optional<std::string> output;

    ChainParams params() const;
    double budget() const; ///< UsageError if b is absent
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);

/// %.12g
std::string format_number(double v);

std::string cmd_solve(const RunConfig& cfg);
/// CSV header: b,a0,a1,d0,d1,reward_bits,cost,regime
std::string cmd_sweep(const RunConfig& cfg);
std::string cmd_oracle(const RunConfig& cfg, double grid_step);

struct VerifyOutcome {
    bool passed;
    std::string report;
};
/// KKT check of `policy`, or of the solver's own answer when absent.
VerifyOutcome cmd_verify(const RunConfig& cfg, std::optional<Policy> policy = std::nullopt);

std::string cmd_simulate(const RunConfig& cfg, std::size_t rollouts);

/// 32-bit big-endian payload bit count, 32-bit CRC-32 of the payload bytes,
/// then the payload bits.
std::vector<bool> frame_message(const std::vector<std::uint8_t>& payload, std::size_t bit_count);

struct EmbedOutcome {
    std::string tokens;  ///< one token id per line
    std::string summary; ///< JSON
    bool complete;       ///< whole frame fixed by the tokens
};
EmbedOutcome cmd_embed(const RunConfig& cfg, const std::vector<std::uint8_t>& message,
                       std::size_t bit_count, std::size_t n_tokens);

struct ExtractOutcome {
    std::vector<std::uint8_t> message;
    std::size_t bit_count;
    std::string summary; ///< JSON
};
/// Throws DecodeError on malformed tokens, a truncated frame or a checksum
/// mismatch.
ExtractOutcome cmd_extract(const RunConfig& cfg, std::string_view token_text);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace relsteg
