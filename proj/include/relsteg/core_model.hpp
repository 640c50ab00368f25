#pragma once

#include <string_view>

namespace relsteg {

/// Two-state chain instance. p0 = P(next=0 | current=0), p1 = P(next=0 |
/// current=1), init0 = initial mass on state 0, gamma = discount factor.
///
/// Values are validated on construction and immutable afterwards. The
/// discounted initial mass (1-gamma)*init0 is derived, never stored
/// separately.
class ChainParams {
public:
    /// Throws DomainError unless all probabilities lie in [0,1] and
    /// 0 <= gamma < 1.
    ChainParams(double p0, double p1, double init0, double gamma);

    double p0() const noexcept { return p0_; }
    double p1() const noexcept { return p1_; }
    /// Transition probability to state 0 out of state `s`.
    double p(int s) const noexcept { return s == 0 ? p0_ : p1_; }
    double init0() const noexcept { return init0_; }
    double init1() const noexcept { return 1.0 - init0_; }
    double gamma() const noexcept { return gamma_; }
    /// (1-gamma)*init0
    double d0_gamma() const noexcept { return (1.0 - gamma_) * init0_; }

    bool operator==(const ChainParams&) const = default;

private:
    double p0_;
    double p1_;
    double init0_;
    double gamma_;
};

/// Deterministic policy: at state s the next token is 0 with probability a_s.
struct Policy {
    double a0;
    double a1;

    Policy(double a0_, double a1_);

    double a(int s) const noexcept { return s == 0 ? a0 : a1; }
    bool operator==(const Policy&) const = default;
};

/// Normalized discounted visitation of a policy. Obtain via occupancy_of().
struct Occupancy {
    double d0;
    double d1;
    double x0; ///< a0 * d0
    double x1; ///< a1 * d1
};

enum class Shape {
    attracted,    ///< both p >= 1/2
    oscillatory,  ///< p1 >= 1/2 > p0
    sticky_mixed, ///< p0 > 1/2 > p1, fixed by relabeling, no closed form
};

std::string_view to_string(Shape shape);

/// Instance after optional 0<->1 relabeling.
struct CanonicalForm {
    ChainParams params;
    bool swapped;
    Shape shape;
};

/// Binary entropy in bits, with 0 log 0 = 0. Throws DomainError outside [0,1].
double binary_entropy(double a);

/// Binary entropy in nats.
double binary_entropy_nats(double a);

/// Total variation between (a, 1-a) and (p, 1-p), i.e. 2|a - p|.
double tv_cost(double a, double p);

Occupancy occupancy_of(const Policy& policy, const ChainParams& params);

/// d0 H(a0) + d1 H(a1), in bits.
double reward_of(const Policy& policy, const ChainParams& params);

/// d0 TV(a0, p0) + d1 TV(a1, p1).
double cost_of(const Policy& policy, const ChainParams& params);

/// Shape of an instance up to relabeling; shorthand for canonicalize().shape.
Shape classify(const ChainParams& params);

/// Renames state 0 <-> 1: p0' = 1-p1, p1' = 1-p0, init0' = 1-init0.
ChainParams relabel(const ChainParams& params);

/// Same renaming applied to a policy: a0' = 1-a1, a1' = 1-a0. Involution.
Policy relabel(const Policy& policy);

/// Picks the labeling that puts the instance into a closed-form shape.
/// STICKY_MIXED maps to itself under relabeling and is left unswapped.
CanonicalForm canonicalize(const ChainParams& params);

/// Maps a policy on the canonical instance back to the original labels.
Policy uncanonicalize(const Policy& canonical_policy, const CanonicalForm& form);

/// Maps a policy on the original instance into canonical labels.
Policy to_canonical(const Policy& policy, const CanonicalForm& form);

} // namespace relsteg
