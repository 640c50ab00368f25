#pragma once

#include "relsteg/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relsteg {

/// Growable bit sequence, MSB-first within each byte.
class BitStream {
public:
    BitStream() = default;

    /// First `bit_count` bits of `bytes`. DomainError if bit_count exceeds
    /// 8 * bytes.size().
    static BitStream from_bytes(std::vector<std::uint8_t> bytes, std::size_t bit_count);
    static BitStream from_bytes(std::vector<std::uint8_t> bytes);
    /// Parses a string of '0'/'1' characters.
    static BitStream from_string(std::string_view bits);

    void push_back(bool bit);
    bool operator[](std::size_t i) const;
    std::size_t size() const noexcept { return bit_count_; }
    bool empty() const noexcept { return bit_count_ == 0; }
    /// Backing bytes; bits past size() in the last byte are zero.
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    std::string to_string() const;
    /// First n bits (n clamped to size()).
    BitStream prefix(std::size_t n) const;
    /// True if this stream's bits are a prefix of `other`.
    bool is_prefix_of(const BitStream& other) const;

    bool operator==(const BitStream&) const = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bit_count_ = 0;
};

/// Half-open dyadic interval [0.b1...bL, 0.b1...bL + 2^-L) of a bit prefix.
struct DyadicInterval {
    BitStream bits;
    /// Exact for up to 53 bits.
    double lo() const;
    double hi() const;
};

DyadicInterval bits_to_interval(const BitStream& bits);

using Token = std::uint32_t;

/// Next-token distribution given the tokens emitted so far. Must be
/// deterministic in the history; embed and extract have to see identical
/// vectors. Entries are nonnegative and sum to 1 within 1e-9.
using DistributionProvider = std::function<std::vector<double>(std::span<const Token>)>;

/// Binary chain provider: token = next state. The first token is drawn from
/// `start_state`'s row; afterwards the state is the previous token.
DistributionProvider chain_provider(const Policy& policy, int start_state);

/// Same vector at every step.
DistributionProvider fixed_provider(std::vector<double> probabilities);

/// Coder registers. [low, high] is an inclusive range of 64-bit fixed-point
/// fractions; after renormalization high - low + 1 > 2^62.
struct IntervalState {
    std::uint64_t low = 0;
    std::uint64_t high = ~std::uint64_t{0};
    std::uint64_t pending = 0; ///< straddle (E3) shifts awaiting resolution
    std::uint64_t shifts = 0;  ///< total renormalization shifts

    /// Message bits fixed by the tokens so far.
    std::uint64_t determined() const noexcept { return shifts - pending; }
};

struct EmbedResult {
    std::vector<Token> tokens;
    /// Real message bits fixed by `tokens`; extract() returns at least these.
    std::size_t consumed = 0;
    /// All fixed bits, including the padding tail.
    std::size_t determined = 0;
    /// Seed of the uniform padding read after the message runs out.
    std::uint64_t tail_seed = 0;
};

/// Maps message bits to `n` tokens by arithmetic decoding: each token is the
/// provider cell containing the message point. Past the end of the message
/// the point continues with uniform bits from std::mt19937_64(tail_seed).
/// Throws ProviderError on invalid vectors and PrecisionError if a positive
/// probability gets an empty cell.
EmbedResult embed(const BitStream& message, const DistributionProvider& provider, std::size_t n,
                  std::uint64_t tail_seed = 0);

/// Inverse of embed: the bits fixed by the token sequence, a prefix of
/// (message || padding) at least `consumed` long. DecodeError for tokens
/// outside the alphabet or inside an empty cell.
BitStream extract(std::span<const Token> tokens, const DistributionProvider& provider);

/// Embedding rate in bits/token: embeds n tokens of fresh uniform bits
/// (seeded) through `provider` and returns consumed / n.
double measure_rate(const DistributionProvider& provider, std::size_t n, std::uint64_t seed);

/// measure_rate over the chain driven by `policy`, started from the more
/// likely initial state of `params`.
double measure_rate(const Policy& policy, const ChainParams& params, std::size_t n,
                    std::uint64_t seed);

/// Start state used for chain providers built from `params`.
int chain_start_state(const ChainParams& params);

/// Stationary entropy rate pi0 H(a0) + pi1 H(a1) in bits/token, with
/// pi0 = a1 / (1 - a0 + a1). Returns 0 for the reducible chain a0 = 1, a1 = 0.
double entropy_rate(const Policy& policy);

} // namespace relsteg
