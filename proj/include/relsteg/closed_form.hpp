#pragma once

#include "relsteg/core_model.hpp"

#include <string_view>

namespace relsteg {

/// Budget regimes of the optimal policy: budget-tight single state (R1),
/// both states moving (R2), saturated at the uniform policy (R3).
enum class Regime { r1, r2, r3 };

enum class SolveMethod { closed_form, oracle_fallback };

/// Logarithm used for the internal Phi / root computations. The optimal
/// policy does not depend on it; only reported values in nats would.
enum class LogBase { natural, binary };

enum class Sign { plus, minus };

std::string_view to_string(Regime regime);
std::string_view to_string(SolveMethod method);

/// Regime boundaries. For STICKY_MIXED instances b_low is NaN (no closed form)
/// and b_high is the saturation budget cost_of((1/2,1/2)).
struct Thresholds {
    double b_low;
    double b_high;
    Shape shape;
};

struct PolicySolution {
    Policy policy;
    Occupancy occupancy;
    Regime regime;
    Thresholds thresholds;
    SolveMethod method;
    double reward; ///< bits
    double cost;
};

// All functions below that take `canonical` expect an instance already in
// ATTRACTED (p0, p1 >= 1/2) or OSCILLATORY (p1 >= 1/2 > p0) form, i.e. the
// params member of canonicalize().

/// Shape of an instance under its current labels; UnsupportedShape if it
/// needs relabeling or is STICKY_MIXED.
Shape canonical_shape(const ChainParams& canonical);

/// Budget-tight single-state action. eta(0, minus) lowers a0 from p0,
/// eta(0, plus) raises it, likewise for state 1; the other state stays at its
/// own p. Throws SingularInstance on a vanishing denominator.
double eta(int state, Sign sign, double b, const ChainParams& canonical);

/// 1 / (1 - gamma p0 + gamma p1)
double coupling_m(const ChainParams& params);

Thresholds thresholds_of(const ChainParams& canonical);

/// Phi_+/-(a) = (+/-1 + gamma p0 + gamma p1) log((1-a)/a) - 2 gamma log(1-a).
/// Requires 0 < a < 1, DomainError otherwise.
double phi(Sign sign, double a, const ChainParams& params, LogBase base = LogBase::natural);

/// Inverse of Phi_- restricted to [1/2, 1), where it is strictly increasing.
/// BracketError when y is outside [Phi_-(1/2), Phi_-(1 - 1e-12)].
double invert_phi_minus(double y, const ChainParams& params, LogBase base = LogBase::natural);

/// Inverse of Phi_+ restricted to (0, 1/2], where it is strictly decreasing.
double invert_phi_plus(double y, const ChainParams& params, LogBase base = LogBase::natural);

/// Root of Phi_+(a) = Phi_-(p1) on (0, 1/2]. Lies in [p0, 1/2] exactly when
/// |1/2 - p1| <= |1/2 - p0|.
double psi0(const ChainParams& canonical, LogBase base = LogBase::natural);

/// Root of Phi_-(a) = Phi_+(p0) on [1/2, 1). Lies in [1/2, p1] exactly when
/// |1/2 - p1| >= |1/2 - p0|.
double psi1(const ChainParams& canonical, LogBase base = LogBase::natural);

/// d0 (a0 - p0) + d1 (p1 - a1) with d from occupancy_of((a0, a1)).
double m_gap(double a0, double a1, const ChainParams& params);

/// Middle-regime policy for OSCILLATORY instances: the unique pair in
/// [p0,1/2] x [1/2,p1] with Phi_+(a0) = Phi_-(a1) and m_gap = b/2.
Policy solve_regime2_opposite(double b, const ChainParams& canonical,
                              LogBase base = LogBase::natural);

/// Optimal deterministic policy for any instance and budget b >= 0.
PolicySolution optimal_policy(const ChainParams& params, double b,
                              LogBase base = LogBase::natural);

} // namespace relsteg
