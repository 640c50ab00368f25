#pragma once

#include "relsteg/closed_form.hpp"
#include "relsteg/core_model.hpp"

#include <array>
#include <string>
#include <vector>

namespace relsteg {

/// Best feasible policy found by exhaustive search.
struct GridResult {
    Policy policy;
    double reward; ///< bits
    double cost;
};

/// Search rectangle for grid_search.
struct GridBox {
    double a0_lo = 0.0;
    double a0_hi = 1.0;
    double a1_lo = 0.0;
    double a1_hi = 1.0;
};

/// Brute-force maximizer of reward_of subject to cost_of <= b.
///
/// Evaluates every point of a `step`-spaced grid over `box`, then runs
/// `refinements` rounds of a 10x finer local grid (+-1 old step) around each
/// of the best 512 points of the previous round. (p0, p1) is always a candidate, so the search never comes back
/// empty. Ties go to the lexicographically smallest (a0, a1). Rows are split
/// across hardware threads; the result does not depend on the thread count.
GridResult grid_search(const ChainParams& params, double b, double step, const GridBox& box = {},
                       int refinements = 2);

/// One support point of a finite randomized action distribution.
struct Atom {
    double action;
    double weight;
};

/// Finite-support randomized stationary policy: per state, a list of atoms
/// whose weights sum to one.
class MixedPolicy {
public:
    /// Throws DomainError on empty lists, actions outside [0,1], negative
    /// weights or weights not summing to 1 within 1e-12.
    MixedPolicy(std::vector<Atom> state0, std::vector<Atom> state1);

    const std::vector<Atom>& atoms(int state) const { return state == 0 ? state0_ : state1_; }

private:
    std::vector<Atom> state0_;
    std::vector<Atom> state1_;
};

struct MixedEvaluation {
    double reward; ///< bits
    double cost;
    Occupancy occupancy;
};

/// Discounted reward/cost of a mixed policy. The flow equation only sees the
/// per-state mean action, so the occupancy equals that of collapse(mp).
MixedEvaluation evaluate_mixed(const MixedPolicy& mp, const ChainParams& params);

/// Deterministic policy playing the per-state weighted mean action.
Policy collapse(const MixedPolicy& mp);

struct ZValues {
    double z0;
    double z1;
};

/// Auxiliary dual expressions (natural log):
///   z0 = (-1 - g p1) l(a0) + g p1 l(a1) + g log((1-a0)/(1-a1))
///   z1 = -g p0 l(a0) + (-1 + g p0) l(a1) + g log((1-a0)/(1-a1))
/// with l(a) = log((1-a)/a). DomainError unless both actions lie in (0,1).
ZValues z_funcs(double a0, double a1, const ChainParams& params);

struct KktMultipliers {
    double lambda = 0.0;
    double alpha0 = 0.0, alpha1 = 0.0;
    double beta0 = 0.0, beta1 = 0.0;
    double omega0 = 0.0, omega1 = 0.0;
    double nu0 = 0.0, nu1 = 0.0;
    double mu0 = 0.0, mu1 = 0.0;
};

/// Outcome of kkt_verify. All residual arrays are filled even on failure.
struct KktReport {
    Shape shape = Shape::attracted;
    Regime regime = Regime::r3;
    std::string case_label;
    KktMultipliers multipliers;
    double c0 = 0.0; ///< |x0 - d0 p0|
    double c1 = 0.0; ///< |x1 - d1 p1|
    /// dL/dx0, dL/dx1, dL/dd0, dL/dd1, dL/dc0, dL/dc1
    std::array<double, 6> stationarity{};
    bool budget_feasible = false; ///< c0 + c1 <= b/2 (+1e-9)
    bool box_feasible = false;    ///< 0 <= x_s <= d_s and flow balance
    bool dual_feasible = false;   ///< all inequality multipliers >= -1e-9
    /// lambda, alpha0, beta0, alpha1, beta1 times their constraint values
    std::array<double, 5> complementary{};
    bool passed = false;
    std::string diagnostic;
};

/// Certifies a candidate optimum of the canonical instance at budget b.
///
/// Classifies the regime from b and thresholds_of(), assigns the
/// multipliers given by that regime's closed-form table, then checks
/// stationarity (< 1e-6), primal feasibility, dual feasibility (>= -1e-9) and
/// complementary slackness (< 1e-8). Problems are reported through
/// passed/diagnostic, never thrown.
KktReport kkt_verify(const ChainParams& canonical, double b, const Policy& policy);

} // namespace relsteg
