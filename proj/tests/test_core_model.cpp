#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reference.hpp"
#include "relsteg/core_model.hpp"
#include "relsteg/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace relsteg;
using doctest::Approx;

TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.5) == 1.0);
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    // 30-digit reference evaluation
    CHECK(binary_entropy(0.25) == Approx(0.811278124459132864).epsilon(1e-14));
    CHECK(binary_entropy(0.7) == Approx(0.881290899230692618).epsilon(1e-14));
    CHECK(binary_entropy_nats(0.25) == Approx(0.811278124459132864 * std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(binary_entropy(-0.01), DomainError);
    CHECK_THROWS_AS(binary_entropy(1.5), DomainError);
    CHECK_THROWS_AS(binary_entropy(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("tv cost") {
    CHECK(tv_cost(0.7, 0.7) == 0.0);
    CHECK(tv_cost(0.3, 0.7) == Approx(0.8).epsilon(1e-15));
    CHECK(tv_cost(0.0, 1.0) == 2.0);
    CHECK_THROWS_AS(tv_cost(-0.1, 0.5), DomainError);
    CHECK_THROWS_AS(tv_cost(0.5, 1.1), DomainError);
}

TEST_CASE("params and policy validation") {
    CHECK_NOTHROW(ChainParams(0.0, 1.0, 0.0, 0.0));
    CHECK_THROWS_AS(ChainParams(0.5, 0.5, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(ChainParams(-0.1, 0.5, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(ChainParams(0.5, 0.5, 1.2, 0.5), DomainError);
    CHECK_THROWS_AS(Policy(0.5, 1.01), DomainError);
    const ChainParams c(0.7, 0.9, 0.8, 0.9);
    CHECK(c.d0_gamma() == Approx(0.08).epsilon(1e-14));
    CHECK(c.init1() == Approx(0.2).epsilon(1e-14));
}

TEST_CASE("occupancy examples") {
    const ChainParams c(0.7, 0.9, 0.8, 0.9);
    const Occupancy o = occupancy_of(Policy(0.5, 0.5), c);
    CHECK(o.d0 == Approx(0.53).epsilon(1e-13));
    CHECK(o.d0 == Approx(ref::occupancy(c, Policy(0.5, 0.5))[0]).epsilon(1e-12));
    CHECK(o.x0 == Approx(0.265).epsilon(1e-13));

    const ChainParams g0(0.3, 0.6, 0.35, 0.0);
    CHECK(occupancy_of(Policy(0.9, 0.1), g0).d0 == 0.35);

    const Occupancy closed = occupancy_of(Policy(1.0, 0.0), c);
    CHECK(closed.d0 == Approx(c.d0_gamma() / (1.0 - c.gamma())).epsilon(1e-13));
    CHECK(closed.d0 == Approx(ref::occupancy(c, Policy(1.0, 0.0))[0]).epsilon(1e-12));
}

TEST_CASE("occupancy matches propagated visitation and satisfies flow") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double gammas[] = {0.0, 0.3, 0.9, 0.99};
    for (int i = 0; i < 400; ++i) {
        const ChainParams c(u(rng), u(rng), u(rng), gammas[i % 4]);
        const Policy pi(u(rng), u(rng));
        const Occupancy o = occupancy_of(pi, c);
        const auto d = ref::occupancy(c, pi);
        CHECK(o.d0 == Approx(d[0]).epsilon(1e-10));
        CHECK(std::abs(o.d0 + o.d1 - 1.0) <= 1e-12);
        CHECK(std::abs(o.d0 - c.gamma() * (o.x0 + o.x1) - c.d0_gamma()) <= 1e-12);
        CHECK(o.x0 >= 0.0);
        CHECK(o.x0 <= o.d0);
        CHECK(o.x1 >= 0.0);
        CHECK(o.x1 <= o.d1);
    }
}

TEST_CASE("reward and cost") {
    const ChainParams c(0.7, 0.9, 0.8, 0.9);
    CHECK(reward_of(Policy(0.5, 0.5), c) == Approx(1.0).epsilon(1e-14));
    CHECK(reward_of(Policy(1.0, 0.0), c) == 0.0);
    CHECK(reward_of(Policy(0.7, 0.9), c) == Approx(ref::reward(c, Policy(0.7, 0.9))).epsilon(1e-11));
    CHECK(cost_of(Policy(0.7, 0.9), c) == 0.0);
    CHECK(cost_of(Policy(0.5, 0.5), c) == Approx(0.588).epsilon(1e-13));
    CHECK(cost_of(Policy(0.5, 0.5), c) == Approx(0.53 * 0.4 + 0.47 * 0.8).epsilon(1e-13));

    const ChainParams g0(0.3, 0.6, 0.35, 0.0);
    const Policy pi(0.1, 0.9);
    CHECK(cost_of(pi, g0) == Approx(0.35 * 2 * 0.2 + 0.65 * 2 * 0.3).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const ChainParams r(u(rng), u(rng), u(rng), 0.95 * u(rng));
        const Policy q(u(rng), u(rng));
        CHECK(reward_of(q, r) == Approx(ref::reward(r, q)).epsilon(1e-10));
        CHECK(cost_of(q, r) == Approx(ref::cost(r, q)).epsilon(1e-10));
    }
}

TEST_CASE("canonical relabeling examples") {
    const CanonicalForm a = canonicalize(ChainParams(0.3, 0.4, 0.25, 0.5));
    CHECK(a.swapped);
    CHECK(a.params.p0() == Approx(0.6).epsilon(1e-15));
    CHECK(a.params.p1() == Approx(0.7).epsilon(1e-15));
    CHECK(a.params.init0() == Approx(0.75).epsilon(1e-15));
    CHECK(a.shape == Shape::attracted);

    const CanonicalForm o = canonicalize(ChainParams(0.2, 0.9, 0.8, 0.9));
    CHECK_FALSE(o.swapped);
    CHECK(o.shape == Shape::oscillatory);

    // Neither labeling of a sticky instance is closed-form.
    const ChainParams sticky(0.8, 0.3, 0.5, 0.5);
    CHECK(canonicalize(sticky).shape == Shape::sticky_mixed);
    const ChainParams other = relabel(sticky);
    CHECK(other.p0() == Approx(0.7).epsilon(1e-15));
    CHECK(other.p1() == Approx(0.2).epsilon(1e-15));
    CHECK(canonicalize(other).shape == Shape::sticky_mixed);
    CHECK(classify(sticky) == Shape::sticky_mixed);

    // boundary: p0 = 1/2 swaps into the attracted shape
    const CanonicalForm s = canonicalize(ChainParams(0.5, 0.3, 0.5, 0.5));
    CHECK(s.swapped);
    CHECK(s.shape == Shape::attracted);
    CHECK(s.params.p0() == Approx(0.7).epsilon(1e-15));
    CHECK(s.params.p1() == 0.5);
    CHECK(to_string(Shape::attracted) == "ATTRACTED");
}

TEST_CASE("relabeling is exact on values at or above one half") {
    const ChainParams c(0.75, 0.5, 0.625, 0.9);
    CHECK(relabel(relabel(c)) == c);
    CHECK(relabel(relabel(Policy(0.5, 0.875))) == Policy(0.5, 0.875));
}

TEST_CASE("relabeling preserves reward and cost") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const ChainParams c(u(rng), u(rng), u(rng), 0.99 * u(rng));
        const Policy pi(u(rng), u(rng));
        // 1 - (1 - x) may differ from x by one rounding when x < 1/2
        const ChainParams back = relabel(relabel(c));
        CHECK(std::abs(back.p0() - c.p0()) <= 1.2e-16);
        CHECK(std::abs(back.p1() - c.p1()) <= 1.2e-16);
        CHECK(std::abs(back.init0() - c.init0()) <= 1.2e-16);
        CHECK(back.gamma() == c.gamma());
        const CanonicalForm f = canonicalize(c);
        const Policy cpi = to_canonical(pi, f);
        const Policy pi_back = uncanonicalize(cpi, f);
        CHECK(std::abs(pi_back.a0 - pi.a0) <= 1.2e-16);
        CHECK(std::abs(pi_back.a1 - pi.a1) <= 1.2e-16);
        CHECK(reward_of(cpi, f.params) == Approx(reward_of(pi, c)).epsilon(1e-12));
        CHECK(cost_of(cpi, f.params) == Approx(cost_of(pi, c)).epsilon(1e-12));
        if (!f.swapped) CHECK(f.params == c);
    }
}
