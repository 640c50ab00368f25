#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reference.hpp"
#include "relsteg/closed_form.hpp"
#include "relsteg/errors.hpp"
#include "relsteg/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace relsteg;
using doctest::Approx;

namespace {

const ChainParams kAttracted(0.7, 0.9, 0.8, 0.9);
const ChainParams kOscillatory(0.2, 0.9, 0.8, 0.9);

ChainParams random_canonical(std::mt19937_64& rng, Shape shape) {
    std::uniform_real_distribution<double> hi(0.5, 0.98);
    std::uniform_real_distribution<double> lo(0.02, 0.4999);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double gammas[] = {0.0, 0.5, 0.9, 0.99};
    const double g = gammas[rng() % 4];
    if (shape == Shape::attracted) return ChainParams(hi(rng), hi(rng), u(rng), g);
    return ChainParams(lo(rng), hi(rng), u(rng), g);
}

} // namespace

TEST_CASE("attracted thresholds") {
    const Thresholds t = thresholds_of(kAttracted);
    CHECK(t.shape == Shape::attracted);
    CHECK(t.b_low == Approx(0.116).epsilon(1e-12));
    CHECK(t.b_high == Approx(0.588).epsilon(1e-12));
    // independent: b_high is the cost of the uniform policy, b_low the cost
    // of the policy where the moving coordinate has reached the other one
    CHECK(t.b_high == Approx(ref::cost(kAttracted, Policy(0.5, 0.5))).epsilon(1e-10));
    CHECK(t.b_low == Approx(ref::cost(kAttracted, Policy(0.7, 0.7))).epsilon(1e-10));
    CHECK(coupling_m(kAttracted) == Approx(1.0 / 1.18).epsilon(1e-14));
}

TEST_CASE("eta on the attracted instance") {
    // Reference root of cost((p0, a1)) = 0.05 in 30-digit arithmetic.
    CHECK(eta(1, Sign::minus, 0.05, kAttracted) == Approx(0.8056).epsilon(1e-12));
    const double a1 = eta(1, Sign::minus, 0.05, kAttracted);
    CHECK(ref::cost(kAttracted, Policy(0.7, a1)) == Approx(0.05).epsilon(1e-10));
    const double a0 = eta(0, Sign::minus, 0.05, kAttracted);
    CHECK(a0 < 0.7);
    CHECK(ref::cost(kAttracted, Policy(a0, 0.9)) == Approx(0.05).epsilon(1e-10));
    const double up = eta(0, Sign::plus, 0.05, kOscillatory);
    CHECK(up > 0.2);
    CHECK(ref::cost(kOscillatory, Policy(up, 0.9)) == Approx(0.05).epsilon(1e-10));
}

TEST_CASE("optimal policy on the attracted instance") {
    const PolicySolution zero = optimal_policy(kAttracted, 0.0);
    CHECK(zero.policy.a0 == Approx(0.7).epsilon(1e-12));
    CHECK(zero.policy.a1 == Approx(0.9).epsilon(1e-12));
    CHECK(zero.cost <= 1e-12);
    CHECK(zero.regime == Regime::r1);

    const PolicySolution r1 = optimal_policy(kAttracted, 0.05);
    CHECK(r1.regime == Regime::r1);
    CHECK(r1.policy.a0 == 0.7);
    CHECK(r1.policy.a1 == Approx(0.8056).epsilon(1e-12));
    CHECK(r1.reward == Approx(0.836082956061075889).epsilon(1e-12));

    const PolicySolution r2 = optimal_policy(kAttracted, 0.3);
    CHECK(r2.regime == Regime::r2);
    CHECK(r2.policy.a0 == Approx(0.622033898305084746).epsilon(1e-12));
    CHECK(r2.policy.a1 == Approx(0.622033898305084746).epsilon(1e-12));
    CHECK(r2.reward == Approx(0.956592868866683196).epsilon(1e-12));

    const PolicySolution r3 = optimal_policy(kAttracted, 0.7);
    CHECK(r3.regime == Regime::r3);
    CHECK(r3.policy.a0 == 0.5);
    CHECK(r3.policy.a1 == 0.5);
    CHECK(r3.reward == Approx(1.0).epsilon(1e-14));
    CHECK(r3.method == SolveMethod::closed_form);
    CHECK(to_string(r3.regime) == "R3");
    CHECK(to_string(SolveMethod::oracle_fallback) == "ORACLE_FALLBACK");

    // regimes include their left endpoint
    const Thresholds t = thresholds_of(kAttracted);
    CHECK(optimal_policy(kAttracted, t.b_low).regime == Regime::r2);
    CHECK(optimal_policy(kAttracted, t.b_high).regime == Regime::r3);
}

TEST_CASE("oscillatory quantities") {
    // 30-digit reference roots
    CHECK(psi1(kOscillatory) == Approx(0.825726011396619766).epsilon(1e-12));
    CHECK(psi0(kOscillatory) == Approx(0.121702984159614403).epsilon(1e-12));
    CHECK(psi1(kOscillatory, LogBase::binary) == Approx(0.825726011396619766).epsilon(1e-12));
    const Thresholds t = thresholds_of(kOscillatory);
    CHECK(t.shape == Shape::oscillatory);
    CHECK(t.b_low == Approx(0.0703229141885265921).epsilon(1e-11));
    CHECK(t.b_high == Approx(0.694).epsilon(1e-12));
    CHECK(m_gap(0.5, 0.5, kOscillatory) == Approx(0.347).epsilon(1e-12));
    CHECK(m_gap(0.2, 0.9, kOscillatory) == 0.0);

    const double b = 0.382161457094263296;
    const Policy mid = solve_regime2_opposite(b, kOscillatory);
    CHECK(mid.a0 == Approx(0.353772188323686000).epsilon(1e-10));
    CHECK(mid.a1 == Approx(0.666744710728992409).epsilon(1e-10));
    const PolicySolution s = optimal_policy(kOscillatory, b);
    CHECK(s.regime == Regime::r2);
    CHECK(s.reward == Approx(0.928391760718872932).epsilon(1e-10));
    CHECK(phi(Sign::plus, mid.a0, kOscillatory) ==
          Approx(phi(Sign::minus, mid.a1, kOscillatory)).epsilon(1e-10));
}

TEST_CASE("phi domain and inverses") {
    CHECK_THROWS_AS(phi(Sign::plus, 0.0, kOscillatory), DomainError);
    CHECK_THROWS_AS(phi(Sign::minus, 1.0, kOscillatory), DomainError);
    CHECK(phi(Sign::plus, 0.5, kOscillatory) == Approx(2.0 * 0.9 * std::log(2.0)).epsilon(1e-14));
    for (double a : {0.55, 0.7, 0.9, 0.99}) {
        const double y = phi(Sign::minus, a, kOscillatory);
        CHECK(invert_phi_minus(y, kOscillatory) == Approx(a).epsilon(1e-11));
    }
    for (double a : {0.45, 0.3, 0.1, 0.01}) {
        const double y = phi(Sign::plus, a, kOscillatory);
        CHECK(invert_phi_plus(y, kOscillatory) == Approx(a).epsilon(1e-11));
    }
    CHECK_THROWS_AS(invert_phi_minus(-50.0, kOscillatory), BracketError);
}

TEST_CASE("unsupported shapes") {
    const ChainParams sticky(0.8, 0.3, 0.8, 0.9);
    CHECK_THROWS_AS(canonical_shape(sticky), UnsupportedShape);
    CHECK_THROWS_AS(canonical_shape(ChainParams(0.3, 0.4, 0.5, 0.5)), UnsupportedShape);
    const PolicySolution s = optimal_policy(sticky, 0.2);
    CHECK(s.method == SolveMethod::oracle_fallback);
    CHECK(s.cost <= 0.2 + 1e-9);
    CHECK(std::isnan(s.thresholds.b_low));
    const PolicySolution sat = optimal_policy(sticky, 2.0);
    CHECK(sat.policy.a0 == 0.5);
    CHECK(sat.regime == Regime::r3);
    CHECK_THROWS_AS(optimal_policy(kAttracted, -0.1), DomainError);
}

TEST_CASE("relabeled instances give the relabeled policy") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Shape shape = i % 2 ? Shape::attracted : Shape::oscillatory;
        const ChainParams c = random_canonical(rng, shape);
        const ChainParams r = relabel(c);
        const double b = 1.2 * thresholds_of(c).b_high * u(rng);
        const Policy a = optimal_policy(c, b).policy;
        const Policy ar = optimal_policy(r, b).policy;
        CHECK(ar.a0 == Approx(1.0 - a.a1).epsilon(1e-9));
        CHECK(ar.a1 == Approx(1.0 - a.a0).epsilon(1e-9));
    }
}

TEST_CASE("optimal reward is nondecreasing, concave and continuous in b") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 60; ++i) {
        const Shape shape = i % 2 ? Shape::attracted : Shape::oscillatory;
        const ChainParams c = random_canonical(rng, shape);
        const Thresholds t = thresholds_of(c);
        const int n = 80;
        const double top = 1.1 * t.b_high;
        std::vector<double> v(n + 1);
        for (int k = 0; k <= n; ++k) v[k] = optimal_policy(c, top * k / n).reward;
        for (int k = 1; k <= n; ++k) CHECK(v[k] >= v[k - 1] - 1e-12);
        for (int k = 1; k < n; ++k) CHECK(v[k] >= 0.5 * (v[k - 1] + v[k + 1]) - 1e-9);

        for (double edge : {t.b_low, t.b_high}) {
            if (!(edge > 1e-6)) continue;
            const Policy below = optimal_policy(c, edge - 1e-9).policy;
            const Policy above = optimal_policy(c, edge + 1e-9).policy;
            CHECK(std::abs(below.a0 - above.a0) <= 1e-4);
            CHECK(std::abs(below.a1 - above.a1) <= 1e-4);
        }
    }
}

TEST_CASE("saturation, budget and log-base invariance") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const ChainParams c(u(rng), u(rng), u(rng), 0.99 * u(rng));
        const CanonicalForm f = canonicalize(c);
        if (f.shape == Shape::sticky_mixed) continue;
        const double b_high = thresholds_of(f.params).b_high;
        const PolicySolution sat = optimal_policy(c, b_high * (1.0 + u(rng)));
        CHECK(sat.policy.a0 == 0.5);
        CHECK(sat.policy.a1 == 0.5);

        const double b = b_high * u(rng);
        const PolicySolution nat = optimal_policy(c, b, LogBase::natural);
        const PolicySolution bin = optimal_policy(c, b, LogBase::binary);
        CHECK(nat.cost <= b + 1e-9);
        CHECK(ref::cost(c, nat.policy) <= b + 1e-9);
        CHECK(nat.reward == Approx(ref::reward(c, nat.policy)).epsilon(1e-10));
        CHECK(nat.policy.a0 == Approx(bin.policy.a0).epsilon(1e-9));
        CHECK(nat.policy.a1 == Approx(bin.policy.a1).epsilon(1e-9));
    }
}

TEST_CASE("closed form matches the grid oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 24; ++i) {
        const Shape shape = i % 2 ? Shape::attracted : Shape::oscillatory;
        const ChainParams c = random_canonical(rng, shape);
        const double b = 1.1 * thresholds_of(c).b_high * u(rng);
        const PolicySolution s = optimal_policy(c, b);
        const GridResult g = grid_search(c, b, 2e-3);
        CHECK(s.reward >= g.reward - 1e-9);
        CHECK(s.reward - g.reward <= 5e-3);
    }
}
