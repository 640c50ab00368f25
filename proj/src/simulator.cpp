#include "relsteg/simulator.hpp"

#include "relsteg/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

namespace relsteg {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::size_t kQuantities = 4;

class KahanSum {
public:
    void add(double v) noexcept {
        const double y = v - c_;
        const double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const noexcept { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

int initial_state(const ChainParams& params, SplitMix64& rng) {
    return rng.uniform() < params.init0() ? 0 : 1;
}

int step(const Policy& policy, int s, SplitMix64& rng) {
    return rng.uniform() < policy.a(s) ? 0 : 1;
}

// Discounted sums of all quantities along one rollout, scaled by (1-gamma).
std::array<double, kQuantities> rollout_values(const ChainParams& params, const Policy& policy,
                                               std::size_t horizon, SplitMix64 rng) {
    const std::array<double, 2> h{binary_entropy(policy.a0), binary_entropy(policy.a1)};
    const std::array<double, 2> tv{tv_cost(policy.a0, params.p0()), tv_cost(policy.a1, params.p1())};
    const double gamma = params.gamma();

    std::array<double, kQuantities> acc{};
    double w = 1.0;
    int s = initial_state(params, rng);
    for (std::size_t t = 0; t < horizon; ++t) {
        acc[0] += w * h[s];
        acc[1] += w * tv[s];
        acc[2 + s] += w;
        w *= gamma;
        if (t + 1 < horizon) s = step(policy, s, rng);
    }
    for (double& v : acc) v *= 1.0 - gamma;
    return acc;
}

} // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64(mix64(seed) ^ mix64(index * kGolden + 1));
}

SplitMix64::result_type SplitMix64::operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
}

const EstimateReport& EstimateSet::get(Quantity q) const {
    switch (q) {
    case Quantity::reward: return reward;
    case Quantity::cost: return cost;
    case Quantity::visitation0: return visitation0;
    case Quantity::visitation1: return visitation1;
    }
    throw DomainError("unknown quantity");
}

double quantity_bound(Quantity q) {
    return q == Quantity::cost ? 2.0 : 1.0;
}

std::size_t auto_horizon(double gamma, double f_max) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in [0,1)");
    if (gamma == 0.0) return 1;
    std::size_t h = 1;
    double g = gamma;
    while (g * f_max >= 1e-6) {
        g *= gamma;
        ++h;
    }
    return h;
}

std::vector<int> rollout(const ChainParams& params, const Policy& policy, std::size_t horizon,
                         std::uint64_t seed) {
    if (horizon == 0) throw DomainError("rollout: horizon must be at least 1");
    SplitMix64 rng(seed);
    std::vector<int> states;
    states.reserve(horizon);
    states.push_back(initial_state(params, rng));
    while (states.size() < horizon) states.push_back(step(policy, states.back(), rng));
    return states;
}

EstimateSet estimate_all(const ChainParams& params, const Policy& policy, std::size_t n_rollouts,
                         std::uint64_t seed, std::size_t horizon) {
    if (n_rollouts < 100) throw DomainError("estimate: need at least 100 rollouts");
    if (horizon == 0) horizon = auto_horizon(params.gamma(), 2.0);

    std::vector<std::array<double, kQuantities>> values(n_rollouts);
    const std::size_t n_threads =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    auto work = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            values[i] = rollout_values(params, policy, horizon, SplitMix64::stream(seed, i));
        }
    };
    if (n_threads == 1) {
        work(0, n_rollouts);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_rollouts + n_threads - 1) / n_threads;
        for (std::size_t first = 0; first < n_rollouts; first += chunk) {
            pool.emplace_back(work, first, std::min(n_rollouts, first + chunk));
        }
        for (auto& t : pool) t.join();
    }

    std::array<EstimateReport, kQuantities> out;
    const double n = static_cast<double>(n_rollouts);
    for (std::size_t q = 0; q < kQuantities; ++q) {
        KahanSum sum;
        for (const auto& v : values) sum.add(v[q]);
        const double mean = sum.value() / n;
        KahanSum sq;
        for (const auto& v : values) sq.add((v[q] - mean) * (v[q] - mean));
        out[q].mean = mean;
        out[q].std_error = std::sqrt(sq.value() / (n - 1.0) / n);
        out[q].n_rollouts = n_rollouts;
        out[q].horizon = horizon;
        out[q].seed = seed;
    }
    return {out[0], out[1], out[2], out[3]};
}

EstimateReport estimate_discounted(const ChainParams& params, const Policy& policy, Quantity q,
                                   std::size_t n_rollouts, std::uint64_t seed,
                                   std::size_t horizon) {
    if (horizon == 0) horizon = auto_horizon(params.gamma(), quantity_bound(q));
    return estimate_all(params, policy, n_rollouts, seed, horizon).get(q);
}

} // namespace relsteg
