#include "relsteg/stego_codec.hpp"

#include "relsteg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace relsteg {

// ---------------------------------------------------------------------------
// BitStream

BitStream BitStream::from_bytes(std::vector<std::uint8_t> bytes, std::size_t bit_count) {
    if (bit_count > 8 * bytes.size()) {
        throw DomainError("BitStream: bit count exceeds 8 x byte length");
    }
    BitStream out;
    bytes.resize((bit_count + 7) / 8);
    if (bit_count % 8 != 0) {
        bytes.back() &= static_cast<std::uint8_t>(0xFF00u >> (bit_count % 8));
    }
    out.bytes_ = std::move(bytes);
    out.bit_count_ = bit_count;
    return out;
}

BitStream BitStream::from_bytes(std::vector<std::uint8_t> bytes) {
    const std::size_t n = 8 * bytes.size();
    return from_bytes(std::move(bytes), n);
}

BitStream BitStream::from_string(std::string_view bits) {
    BitStream out;
    for (char c : bits) {
        if (c != '0' && c != '1') throw DomainError("BitStream: expected '0' or '1'");
        out.push_back(c == '1');
    }
    return out;
}

void BitStream::push_back(bool bit) {
    if (bit_count_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_count_ % 8));
    ++bit_count_;
}

bool BitStream::operator[](std::size_t i) const {
    return (bytes_[i / 8] >> (7 - i % 8)) & 1u;
}

std::string BitStream::to_string() const {
    std::string s;
    s.reserve(bit_count_);
    for (std::size_t i = 0; i < bit_count_; ++i) s.push_back((*this)[i] ? '1' : '0');
    return s;
}

BitStream BitStream::prefix(std::size_t n) const {
    return from_bytes(bytes_, std::min(n, bit_count_));
}

bool BitStream::is_prefix_of(const BitStream& other) const {
    if (bit_count_ > other.bit_count_) return false;
    return other.prefix(bit_count_) == *this;
}

double DyadicInterval::lo() const {
    double v = 0.0;
    double w = 0.5;
    for (std::size_t i = 0; i < bits.size(); ++i, w *= 0.5) {
        if (bits[i]) v += w;
    }
    return v;
}

double DyadicInterval::hi() const {
    return lo() + std::ldexp(1.0, -static_cast<int>(bits.size()));
}

DyadicInterval bits_to_interval(const BitStream& bits) {
    return {bits};
}

// ---------------------------------------------------------------------------
// Providers

DistributionProvider chain_provider(const Policy& policy, int start_state) {
    if (start_state != 0 && start_state != 1) throw DomainError("start state must be 0 or 1");
    return [policy, start_state](std::span<const Token> history) {
        const int s = history.empty() ? start_state : static_cast<int>(history.back());
        const double a = policy.a(s);
        return std::vector<double>{a, 1.0 - a};
    };
}

DistributionProvider fixed_provider(std::vector<double> probabilities) {
    return [p = std::move(probabilities)](std::span<const Token>) { return p; };
}

int chain_start_state(const ChainParams& params) {
    return params.init0() >= 0.5 ? 0 : 1;
}

double entropy_rate(const Policy& policy) {
    const double den = 1.0 - policy.a0 + policy.a1;
    if (den <= 0.0) return 0.0;
    const double pi0 = policy.a1 / den;
    return pi0 * binary_entropy(policy.a0) + (1.0 - pi0) * binary_entropy(policy.a1);
}

// ---------------------------------------------------------------------------
// Arithmetic coder

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::uint64_t kHalf = std::uint64_t{1} << 63;
constexpr std::uint64_t kQuarter = std::uint64_t{1} << 62;
constexpr int kCdfBits = 53;
constexpr std::uint64_t kCdfOne = std::uint64_t{1} << kCdfBits;

// Cumulative distribution as 53-bit fixed point, F[0] = 0, F[k] = 2^53.
std::vector<std::uint64_t> quantized_cdf(const std::vector<double>& p) {
    if (p.empty()) throw ProviderError("provider returned an empty distribution");
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ProviderError("provider returned a negative or non-finite probability");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ProviderError("provider distribution sums to " + std::to_string(total));
    }
    std::vector<std::uint64_t> cdf(p.size() + 1, 0);
    double running = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        running += p[i];
        const double scaled = std::floor(running / total * static_cast<double>(kCdfOne));
        cdf[i + 1] = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(scaled), cdf[i], kCdfOne);
    }
    cdf.back() = kCdfOne;
    return cdf;
}

// Cell boundaries of [low, high]: token i owns [bound[i], bound[i+1]).
std::vector<u128> cell_bounds(const IntervalState& st, const std::vector<std::uint64_t>& cdf,
                              const std::vector<double>& p) {
    const u128 range = static_cast<u128>(st.high) - st.low + 1;
    std::vector<u128> bounds(cdf.size());
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        bounds[i] = st.low + ((range * cdf[i]) >> kCdfBits);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0 && bounds[i + 1] == bounds[i]) {
            throw PrecisionError("probability " + std::to_string(p[i]) +
                                 " too small for the coder precision");
        }
    }
    return bounds;
}

// Rescales [low, high] until it is wider than a quarter of the register.
// `emit(bit)` fires for each resolved leading bit, `straddle()` for each
// pending E3 shift, `shift_in()` supplies the next low-order input bit to the
// caller's value register (embed) or is a no-op (extract).
template <class Emit, class Straddle, class Shift>
void renormalize(IntervalState& st, Emit&& emit, Straddle&& straddle, Shift&& shift) {
    for (;;) {
        if (st.high < kHalf) {
            emit(false);
            st.pending = 0;
        } else if (st.low >= kHalf) {
            emit(true);
            st.pending = 0;
            st.low -= kHalf;
            st.high -= kHalf;
        } else if (st.low >= kQuarter && st.high < kHalf + kQuarter) {
            straddle();
            ++st.pending;
            st.low -= kQuarter;
            st.high -= kQuarter;
        } else {
            break;
        }
        st.low <<= 1;
        st.high = (st.high << 1) | 1u;
        ++st.shifts;
        shift();
    }
}

// Message bits followed by an unbounded seeded uniform tail.
class PaddedBitSource {
public:
    PaddedBitSource(const BitStream& message, std::uint64_t seed) : message_(message), rng_(seed) {}

    bool next() {
        if (pos_ < message_.size()) return message_[pos_++];
        if (left_ == 0) {
            word_ = rng_();
            left_ = 64;
        }
        --left_;
        return (word_ >> left_) & 1u;
    }

private:
    const BitStream& message_;
    std::size_t pos_ = 0;
    std::mt19937_64 rng_;
    std::uint64_t word_ = 0;
    int left_ = 0;
};

} // namespace

EmbedResult embed(const BitStream& message, const DistributionProvider& provider, std::size_t n,
                  std::uint64_t tail_seed) {
    EmbedResult result;
    result.tail_seed = tail_seed;
    result.tokens.reserve(n);

    PaddedBitSource source(message, tail_seed);
    std::uint64_t value = 0;
    for (int i = 0; i < 64; ++i) value = (value << 1) | (source.next() ? 1u : 0u);

    IntervalState st;
    for (std::size_t t = 0; t < n; ++t) {
        const std::vector<double> p = provider(result.tokens);
        const auto cdf = quantized_cdf(p);
        const auto bounds = cell_bounds(st, cdf, p);
        // Last cell whose lower bound is <= value; never empty.
        const auto it = std::upper_bound(bounds.begin(), bounds.end() - 1, static_cast<u128>(value));
        const auto token = static_cast<std::size_t>(std::distance(bounds.begin(), it)) - 1;
        st.low = static_cast<std::uint64_t>(bounds[token]);
        st.high = static_cast<std::uint64_t>(bounds[token + 1] - 1);
        result.tokens.push_back(static_cast<Token>(token));

        renormalize(
            st,
            [&](bool bit) {
                if (bit) value -= kHalf;
            },
            [&] { value -= kQuarter; },
            [&] { value = (value << 1) | (source.next() ? 1u : 0u); });
    }
    result.determined = st.determined();
    result.consumed = std::min<std::size_t>(message.size(), result.determined);
    return result;
}

BitStream extract(std::span<const Token> tokens, const DistributionProvider& provider) {
    BitStream out;
    IntervalState st;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::vector<double> p = provider(tokens.first(t));
        const auto cdf = quantized_cdf(p);
        const auto bounds = cell_bounds(st, cdf, p);
        const Token token = tokens[t];
        if (token >= p.size()) {
            throw DecodeError("token " + std::to_string(token) + " outside alphabet of size " +
                              std::to_string(p.size()));
        }
        if (bounds[token] == bounds[token + 1]) {
            throw DecodeError("token " + std::to_string(token) + " has zero probability at step " +
                              std::to_string(t));
        }
        st.low = static_cast<std::uint64_t>(bounds[token]);
        st.high = static_cast<std::uint64_t>(bounds[token + 1] - 1);
        renormalize(
            st,
            [&](bool bit) {
                out.push_back(bit);
                for (std::uint64_t i = 0; i < st.pending; ++i) out.push_back(!bit);
            },
            [] {}, [] {});
    }
    return out;
}

double measure_rate(const DistributionProvider& provider, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("measure_rate: n must be positive");
    // More bits than n tokens can fix at coder precision, so consumed is
    // never capped by the message length.
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> bytes(8 * (n + 1));
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
        std::uint64_t w = rng();
        for (int k = 0; k < 8; ++k) bytes[i + k] = static_cast<std::uint8_t>(w >> (8 * k));
    }
    const BitStream message = BitStream::from_bytes(std::move(bytes));
    const EmbedResult r = embed(message, provider, n, seed ^ 0x9E3779B97F4A7C15ull);
    return static_cast<double>(r.consumed) / static_cast<double>(n);
}

double measure_rate(const Policy& policy, const ChainParams& params, std::size_t n,
                    std::uint64_t seed) {
    return measure_rate(chain_provider(policy, chain_start_state(params)), n, seed);
}

} // namespace relsteg
