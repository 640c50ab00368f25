#include "relsteg/core_model.hpp"

#include "relsteg/errors.hpp"

#include <cmath>
#include <string>

namespace relsteg {

namespace {

void require_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
    }
}

} // namespace

ChainParams::ChainParams(double p0, double p1, double init0, double gamma)
    : p0_(p0), p1_(p1), init0_(init0), gamma_(gamma) {
    require_probability(p0, "p0");
    require_probability(p1, "p1");
    require_probability(init0, "init0");
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw DomainError("gamma must lie in [0,1), got " + std::to_string(gamma));
    }
}

Policy::Policy(double a0_, double a1_) : a0(a0_), a1(a1_) {
    require_probability(a0_, "a0");
    require_probability(a1_, "a1");
}

std::string_view to_string(Shape shape) {
    switch (shape) {
    case Shape::attracted: return "ATTRACTED";
    case Shape::oscillatory: return "OSCILLATORY";
    case Shape::sticky_mixed: return "STICKY_MIXED";
    }
    return "?";
}

double binary_entropy_nats(double a) {
    require_probability(a, "a");
    double h = 0.0;
    if (a > 0.0) h -= a * std::log(a);
    if (a < 1.0) h -= (1.0 - a) * std::log1p(-a);
    return h;
}

double binary_entropy(double a) {
    require_probability(a, "a");
    double h = 0.0;
    if (a > 0.0) h -= a * std::log2(a);
    if (a < 1.0) h -= (1.0 - a) * std::log2(1.0 - a);
    return h;
}

double tv_cost(double a, double p) {
    require_probability(a, "a");
    require_probability(p, "p");
    return 2.0 * std::abs(a - p);
}

Occupancy occupancy_of(const Policy& policy, const ChainParams& params) {
    const double g = params.gamma();
    // Discounted flow balance at state 0: d0 = (1-g) init0 + g (a0 d0 + a1 d1)
    // with d1 = 1 - d0. The denominator is >= 1 - g > 0.
    const double d0 = (params.d0_gamma() + g * policy.a1) / (1.0 - g * policy.a0 + g * policy.a1);
    const double d1 = 1.0 - d0;
    return {d0, d1, policy.a0 * d0, policy.a1 * d1};
}

double reward_of(const Policy& policy, const ChainParams& params) {
    const auto occ = occupancy_of(policy, params);
    return occ.d0 * binary_entropy(policy.a0) + occ.d1 * binary_entropy(policy.a1);
}

double cost_of(const Policy& policy, const ChainParams& params) {
    const auto occ = occupancy_of(policy, params);
    return occ.d0 * tv_cost(policy.a0, params.p0()) + occ.d1 * tv_cost(policy.a1, params.p1());
}

Shape classify(const ChainParams& params) {
    return canonicalize(params).shape;
}

ChainParams relabel(const ChainParams& params) {
    return ChainParams(1.0 - params.p1(), 1.0 - params.p0(), 1.0 - params.init0(), params.gamma());
}

Policy relabel(const Policy& policy) {
    return Policy(1.0 - policy.a1, 1.0 - policy.a0);
}

CanonicalForm canonicalize(const ChainParams& params) {
    const double p0 = params.p0();
    const double p1 = params.p1();
    if (p0 >= 0.5 && p1 >= 0.5) return {params, false, Shape::attracted};
    if (p1 >= 0.5 && p0 < 0.5) return {params, false, Shape::oscillatory};
    const ChainParams swapped = relabel(params);
    const double q0 = swapped.p0();
    const double q1 = swapped.p1();
    if (q0 >= 0.5 && q1 >= 0.5) return {swapped, true, Shape::attracted};
    if (q1 >= 0.5 && q0 < 0.5) return {swapped, true, Shape::oscillatory};
    return {params, false, Shape::sticky_mixed};
}

Policy uncanonicalize(const Policy& canonical_policy, const CanonicalForm& form) {
    return form.swapped ? relabel(canonical_policy) : canonical_policy;
}

Policy to_canonical(const Policy& policy, const CanonicalForm& form) {
    return form.swapped ? relabel(policy) : policy;
}

} // namespace relsteg
