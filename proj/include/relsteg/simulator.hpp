#pragma once

#include "relsteg/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace relsteg {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator; stream(seed, i)
/// gives the independent sequence used for rollout i.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

enum class Quantity { reward, cost, visitation0, visitation1 };

/// (1-gamma) * E[sum_t gamma^t f(S_t)] estimated from independent rollouts.
struct EstimateReport {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_rollouts = 0;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
};

struct EstimateSet {
    EstimateReport reward;
    EstimateReport cost;
    EstimateReport visitation0;
    EstimateReport visitation1;

    const EstimateReport& get(Quantity q) const;
};

/// Largest per-step value of `q` (1 bit for reward, 2 for cost, 1 otherwise).
double quantity_bound(Quantity q);

/// Smallest H with gamma^H * f_max < 1e-6; 1 when gamma = 0.
std::size_t auto_horizon(double gamma, double f_max);

/// States S_0..S_{horizon-1}; S_0 ~ (init0, init1), S_{t+1} = 0 w.p. a_{S_t}.
std::vector<int> rollout(const ChainParams& params, const Policy& policy, std::size_t horizon,
                         std::uint64_t seed);

/// Throws DomainError if n_rollouts < 100. horizon = 0 selects auto_horizon.
EstimateReport estimate_discounted(const ChainParams& params, const Policy& policy, Quantity q,
                                   std::size_t n_rollouts, std::uint64_t seed,
                                   std::size_t horizon = 0);

/// All four quantities from the same rollouts.
EstimateSet estimate_all(const ChainParams& params, const Policy& policy, std::size_t n_rollouts,
                         std::uint64_t seed, std::size_t horizon = 0);

} // namespace relsteg
