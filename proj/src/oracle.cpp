#include "relsteg/oracle.hpp"

#include "relsteg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace relsteg {

// ---------------------------------------------------------------------------
// Grid search

namespace {

struct Candidate {
    double reward;
    double cost;
    double a0;
    double a1;
};

bool better(const Candidate& x, const Candidate& y) {
    if (x.reward != y.reward) return x.reward > y.reward;
    if (x.a0 != y.a0) return x.a0 < y.a0;
    return x.a1 < y.a1;
}

std::vector<double> make_axis(double lo, double hi, double step) {
    if (!(hi > lo)) return {lo};
    const auto intervals = std::max<long long>(1, std::llround((hi - lo) / step));
    std::vector<double> axis(static_cast<std::size_t>(intervals) + 1);
    for (long long i = 0; i <= intervals; ++i) {
        axis[static_cast<std::size_t>(i)] =
            i == intervals ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(intervals);
    }
    return axis;
}

// Number of incumbents carried from one resolution to the next. A single
// incumbent is not enough: along the budget boundary the reward is nearly
// flat, so the best coarse point can sit far from the true optimum.
constexpr std::size_t kSeeds = 512;

// Bounded collection of the best candidates seen so far.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(const Candidate& c) {
        if (heap_.size() < k_) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end(), better);
        } else if (better(c, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better);
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end(), better);
        }
    }

    void merge(const TopK& other) {
        for (const auto& c : other.heap_) offer(c);
    }

    /// Best first.
    std::vector<Candidate> sorted() const {
        std::vector<Candidate> out = heap_;
        std::sort(out.begin(), out.end(), better);
        return out;
    }

private:
    std::size_t k_;
    std::vector<Candidate> heap_;
};

struct Evaluator {
    const ChainParams& params;
    double b;

    bool operator()(double a0, double a1, Candidate& out) const {
        const Occupancy occ = occupancy_of(Policy(a0, a1), params);
        const double cost = occ.d0 * tv_cost(a0, params.p0()) + occ.d1 * tv_cost(a1, params.p1());
        if (cost > b) return false;
        out = {occ.d0 * binary_entropy(a0) + occ.d1 * binary_entropy(a1), cost, a0, a1};
        return true;
    }
};

TopK coarse_scan(const ChainParams& params, double b, const std::vector<double>& axis0,
                 const std::vector<double>& axis1) {
    const double g = params.gamma();
    const double d0g = params.d0_gamma();
    std::vector<double> h0(axis0.size()), tv0(axis0.size()), h1(axis1.size()), tv1(axis1.size());
    for (std::size_t i = 0; i < axis0.size(); ++i) {
        h0[i] = binary_entropy(axis0[i]);
        tv0[i] = tv_cost(axis0[i], params.p0());
    }
    for (std::size_t j = 0; j < axis1.size(); ++j) {
        h1[j] = binary_entropy(axis1[j]);
        tv1[j] = tv_cost(axis1[j], params.p1());
    }

    auto scan_rows = [&](std::size_t row_begin, std::size_t row_end) {
        TopK top(kSeeds);
        for (std::size_t i = row_begin; i < row_end; ++i) {
            const double a0 = axis0[i];
            for (std::size_t j = 0; j < axis1.size(); ++j) {
                const double a1 = axis1[j];
                const double d0 = (d0g + g * a1) / (1.0 - g * a0 + g * a1);
                const double d1 = 1.0 - d0;
                const double cost = d0 * tv0[i] + d1 * tv1[j];
                if (cost > b) continue;
                top.offer({d0 * h0[i] + d1 * h1[j], cost, a0, a1});
            }
        }
        return top;
    };

    const std::size_t rows = axis0.size();
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, rows / 64));
    if (workers <= 1) return scan_rows(0, rows);

    std::vector<TopK> partial(workers, TopK(kSeeds));
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = rows * w / workers;
        const std::size_t hi = rows * (w + 1) / workers;
        threads.emplace_back([&, w, lo, hi] { partial[w] = scan_rows(lo, hi); });
    }
    for (auto& t : threads) t.join();
    TopK top(kSeeds);
    for (const auto& p : partial) top.merge(p);
    return top;
}

// Lattice indices k with k*fine in [center - h, center + h] and inside [lo, hi].
std::pair<long long, long long> window(double center, double h, double fine, double lo, double hi) {
    const double from = std::max(lo, center - h);
    const double to = std::min(hi, center + h);
    return {static_cast<long long>(std::ceil(from / fine)),
            static_cast<long long>(std::floor(to / fine))};
}

// Scans a +-h window at step h/10 around every seed. Points lie on the
// global lattice fine*Z so overlapping windows share points.
TopK refine(const Evaluator& eval, const std::vector<Candidate>& seeds, double h,
            const GridBox& box) {
    const double fine = h / 10.0;
    const bool pinned0 = !(box.a0_hi > box.a0_lo);
    const bool pinned1 = !(box.a1_hi > box.a1_lo);
    std::vector<std::pair<long long, long long>> points;
    for (const auto& s : seeds) {
        const auto [i_lo, i_hi] = pinned0 ? std::pair<long long, long long>{0, 0}
                                          : window(s.a0, h, fine, box.a0_lo, box.a0_hi);
        const auto [j_lo, j_hi] = pinned1 ? std::pair<long long, long long>{0, 0}
                                          : window(s.a1, h, fine, box.a1_lo, box.a1_hi);
        for (long long i = i_lo; i <= i_hi; ++i) {
            for (long long j = j_lo; j <= j_hi; ++j) points.emplace_back(i, j);
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    TopK top(kSeeds);
    for (const auto& s : seeds) top.offer(s);
    for (const auto& [i, j] : points) {
        const double a0 = pinned0 ? box.a0_lo : static_cast<double>(i) * fine;
        const double a1 = pinned1 ? box.a1_lo : static_cast<double>(j) * fine;
        if (a0 < 0.0 || a0 > 1.0 || a1 < 0.0 || a1 > 1.0) continue;
        Candidate c;
        if (eval(a0, a1, c)) top.offer(c);
    }
    return top;
}

} // namespace

GridResult grid_search(const ChainParams& params, double b, double step, const GridBox& box,
                       int refinements) {
    if (!(step > 0.0)) throw DomainError("grid_search: step must be positive");
    const Policy start(params.p0(), params.p1());
    TopK top = coarse_scan(params, b, make_axis(box.a0_lo, box.a0_hi, step),
                           make_axis(box.a1_lo, box.a1_hi, step));
    top.offer({reward_of(start, params), 0.0, start.a0, start.a1});
    const Evaluator eval{params, b};
    double h = step;
    for (int r = 0; r < refinements; ++r) {
        top = refine(eval, top.sorted(), h, box);
        h /= 10.0;
    }
    const Candidate best = top.sorted().front();
    return {Policy(best.a0, best.a1), best.reward, best.cost};
}

// ---------------------------------------------------------------------------
// Mixed policies

namespace {

void validate_atoms(const std::vector<Atom>& atoms, int state) {
    if (atoms.empty()) {
        throw DomainError("MixedPolicy: state " + std::to_string(state) + " has no atoms");
    }
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (!(atom.action >= 0.0 && atom.action <= 1.0)) {
            throw DomainError("MixedPolicy: action outside [0,1]");
        }
        if (!(atom.weight >= 0.0)) throw DomainError("MixedPolicy: negative weight");
        total += atom.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("MixedPolicy: weights of state " + std::to_string(state) +
                          " sum to " + std::to_string(total));
    }
}

double mean_action(const std::vector<Atom>& atoms) {
    double mean = 0.0;
    for (const auto& atom : atoms) mean += atom.weight * atom.action;
    return std::clamp(mean, 0.0, 1.0);
}

} // namespace

MixedPolicy::MixedPolicy(std::vector<Atom> state0, std::vector<Atom> state1)
    : state0_(std::move(state0)), state1_(std::move(state1)) {
    validate_atoms(state0_, 0);
    validate_atoms(state1_, 1);
}

Policy collapse(const MixedPolicy& mp) {
    return Policy(mean_action(mp.atoms(0)), mean_action(mp.atoms(1)));
}

MixedEvaluation evaluate_mixed(const MixedPolicy& mp, const ChainParams& params) {
    const Occupancy occ = occupancy_of(collapse(mp), params);
    double reward = 0.0;
    double cost = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double d = s == 0 ? occ.d0 : occ.d1;
        double h = 0.0;
        double tv = 0.0;
        for (const auto& atom : mp.atoms(s)) {
            h += atom.weight * binary_entropy(atom.action);
            tv += atom.weight * tv_cost(atom.action, params.p(s));
        }
        reward += d * h;
        cost += d * tv;
    }
    return {reward, cost, occ};
}

// ---------------------------------------------------------------------------
// KKT certificate

namespace {

double logit_complement(double a) { return std::log((1.0 - a) / a); }

void require_interior(double a, const char* name) {
    if (!(a > 0.0 && a < 1.0)) {
        throw DomainError(std::string(name) + " must lie in (0,1) for log-odds terms");
    }
}

constexpr double kStationarityTol = 1e-6;
constexpr double kDualTol = 1e-9;
constexpr double kSlacknessTol = 1e-8;
constexpr double kBudgetTol = 1e-9;

} // namespace

ZValues z_funcs(double a0, double a1, const ChainParams& params) {
    require_interior(a0, "a0");
    require_interior(a1, "a1");
    const double g = params.gamma();
    const double l0 = logit_complement(a0);
    const double l1 = logit_complement(a1);
    const double cross = g * (std::log1p(-a0) - std::log1p(-a1));
    return {(-1.0 - g * params.p1()) * l0 + g * params.p1() * l1 + cross,
            -g * params.p0() * l0 + (-1.0 + g * params.p0()) * l1 + cross};
}

KktReport kkt_verify(const ChainParams& params, double b, const Policy& policy) {
    KktReport report;
    try {
        const Thresholds th = thresholds_of(params);
        report.shape = th.shape;
        report.regime = b < th.b_low ? Regime::r1 : (b < th.b_high ? Regime::r2 : Regime::r3);

        const double a0 = policy.a0;
        const double a1 = policy.a1;
        const double p0 = params.p0();
        const double p1 = params.p1();
        const double g = params.gamma();
        const double m = coupling_m(params);
        require_interior(a0, "a0");
        require_interior(a1, "a1");

        // Net multiplier on each state's deviation always satisfies
        //   beta_s - alpha_s = -M z_s(a0, a1)
        // (eliminate omega0 from dL/dx0, dL/dx1 and omega1 from dL/dd1, then
        // substitute into dL/dd0). The tables below split it per active side.
        // Pinned coordinates are evaluated at their case value p_s, so moving
        // a pinned action away from p_s shows up as a stationarity residual.
        KktMultipliers& mu = report.multipliers;
        const bool state1_first = std::abs(0.5 - p1) >= std::abs(0.5 - p0);
        switch (report.regime) {
        case Regime::r3:
            report.case_label = "R3: uniform, all inequality multipliers zero";
            break;
        case Regime::r2:
            if (th.shape == Shape::attracted) {
                report.case_label = "R2 attracted: alpha0 = alpha1 = lambda = M log(a0/(1-a0))";
                mu.alpha0 = mu.alpha1 = mu.lambda = -m * logit_complement(a0);
            } else {
                report.case_label = "R2 oscillatory: alpha1 = beta0 = lambda = (l(a0) - l(a1))/2";
                mu.alpha1 = mu.beta0 = mu.lambda = 0.5 * (logit_complement(a0) - logit_complement(a1));
            }
            break;
        case Regime::r1:
            if (state1_first) {
                report.case_label = "R1: a0 pinned at p0, a1 lowered";
                const ZValues z = z_funcs(p0, a1, params);
                mu.alpha1 = mu.lambda = m * z.z1;
                mu.alpha0 = 0.5 * m * (z.z0 + z.z1);
                mu.beta0 = 0.5 * (logit_complement(p0) - logit_complement(a1));
            } else if (th.shape == Shape::attracted) {
                report.case_label = "R1: a1 pinned at p1, a0 lowered";
                const ZValues z = z_funcs(a0, p1, params);
                mu.alpha0 = mu.lambda = m * z.z0;
                mu.alpha1 = 0.5 * m * (z.z0 + z.z1);
                mu.beta1 = 0.5 * (logit_complement(p1) - logit_complement(a0));
            } else {
                report.case_label = "R1: a1 pinned at p1, a0 raised";
                const ZValues z = z_funcs(a0, p1, params);
                mu.beta0 = mu.lambda = -m * z.z0;
                mu.alpha1 = 0.5 * (logit_complement(a0) - logit_complement(p1));
                mu.beta1 = -0.5 * m * (z.z0 + z.z1);
            }
            break;
        }

        const Occupancy occ = occupancy_of(policy, params);
        const double l0 = logit_complement(a0);
        const double l1 = logit_complement(a1);
        mu.omega1 = -std::log1p(-a1) - mu.alpha1 * p1 + mu.beta1 * p1;
        if (g > 0.0) {
            mu.omega0 = (-l0 - mu.alpha0 + mu.beta0) / g;
        } else {
            mu.omega0 = -std::log1p(-a0) - (mu.alpha0 - mu.beta0) * p0 - mu.omega1;
        }

        const double h0 = binary_entropy_nats(a0);
        const double h1 = binary_entropy_nats(a1);
        report.stationarity = {
            -l0 - mu.alpha0 + mu.beta0 - g * mu.omega0 - mu.nu0 + mu.mu0,
            -l1 - mu.alpha1 + mu.beta1 - g * mu.omega0 - mu.nu1 + mu.mu1,
            -h0 + a0 * l0 + mu.alpha0 * p0 - mu.beta0 * p0 + mu.omega0 + mu.omega1 - mu.mu0,
            -h1 + a1 * l1 + mu.alpha1 * p1 - mu.beta1 * p1 + mu.omega1 - mu.mu1,
            mu.lambda - mu.alpha0 - mu.beta0,
            mu.lambda - mu.alpha1 - mu.beta1,
        };

        const double dev0 = occ.x0 - occ.d0 * p0;
        const double dev1 = occ.x1 - occ.d1 * p1;
        report.c0 = std::abs(dev0);
        report.c1 = std::abs(dev1);
        const double budget_gap = report.c0 + report.c1 - 0.5 * b;
        report.budget_feasible = budget_gap <= kBudgetTol;
        const double flow = occ.d0 - params.d0_gamma() - g * (occ.x0 + occ.x1);
        report.box_feasible = occ.x0 >= 0.0 && occ.x0 <= occ.d0 && occ.x1 >= 0.0 &&
                              occ.x1 <= occ.d1 && std::abs(flow) <= 1e-12;
        report.dual_feasible = mu.lambda >= -kDualTol && mu.alpha0 >= -kDualTol &&
                               mu.alpha1 >= -kDualTol && mu.beta0 >= -kDualTol &&
                               mu.beta1 >= -kDualTol;
        report.complementary = {
            mu.lambda * budget_gap,
            mu.alpha0 * (-report.c0 - dev0),
            mu.beta0 * (dev0 - report.c0),
            mu.alpha1 * (-report.c1 - dev1),
            mu.beta1 * (dev1 - report.c1),
        };

        std::ostringstream why;
        for (std::size_t i = 0; i < report.stationarity.size(); ++i) {
            if (!(std::abs(report.stationarity[i]) < kStationarityTol)) {
                why << "stationarity[" << i << "] = " << report.stationarity[i] << "; ";
            }
        }
        if (!report.budget_feasible) why << "budget violated by " << budget_gap << "; ";
        if (!report.box_feasible) why << "box/flow constraint violated; ";
        if (!report.dual_feasible) why << "negative multiplier; ";
        for (std::size_t i = 0; i < report.complementary.size(); ++i) {
            if (!(std::abs(report.complementary[i]) < kSlacknessTol)) {
                why << "slackness[" << i << "] = " << report.complementary[i] << "; ";
            }
        }
        report.diagnostic = why.str();
        report.passed = report.diagnostic.empty();
    } catch (const std::exception& e) {
        report.passed = false;
        report.diagnostic = e.what();
    }
    return report;
}

} // namespace relsteg
