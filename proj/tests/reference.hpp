#pragma once

// Brute-force references that share no code with the library: discounted
// visitation by propagating the state distribution step by step.

#include "relsteg/core_model.hpp"

#include <array>
#include <cmath>

namespace ref {

inline std::array<double, 2> occupancy(const relsteg::ChainParams& c, const relsteg::Policy& pi) {
    std::array<double, 2> mu{c.init0(), 1.0 - c.init0()};
    std::array<double, 2> d{0.0, 0.0};
    double w = 1.0 - c.gamma();
    for (int t = 0; t < 20000 && w > 1e-18; ++t) {
        d[0] += w * mu[0];
        d[1] += w * mu[1];
        const double next0 = mu[0] * pi.a0 + mu[1] * pi.a1;
        mu = {next0, 1.0 - next0};
        w *= c.gamma();
    }
    return d;
}

inline double entropy_bits(double a) {
    double h = 0.0;
    for (double q : {a, 1.0 - a}) {
        if (q > 0.0) h -= q * std::log2(q);
    }
    return h;
}

inline double reward(const relsteg::ChainParams& c, const relsteg::Policy& pi) {
    const auto d = occupancy(c, pi);
    return d[0] * entropy_bits(pi.a0) + d[1] * entropy_bits(pi.a1);
}

inline double cost(const relsteg::ChainParams& c, const relsteg::Policy& pi) {
    const auto d = occupancy(c, pi);
    return d[0] * 2.0 * std::abs(pi.a0 - c.p0()) + d[1] * 2.0 * std::abs(pi.a1 - c.p1());
}

} // namespace ref
