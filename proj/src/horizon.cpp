#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "caero/error.hpp"
#include "caero/solver.hpp"
#include "solver_internal.hpp"

namespace caero {

std::vector<std::string> strategy_patterns(std::size_t horizon) {
    std::vector<std::string> out;
    const std::size_t total = std::size_t{1} << horizon;
    // Bit set means skip; ascending masks list tests before skips at each position.
    for (std::size_t mask = 0; mask + 1 < total; ++mask) {
        std::string s(horizon, 'T');
        for (std::size_t k = 0; k < horizon; ++k) {
            if (mask & (std::size_t{1} << (horizon - 1 - k))) s[k] = 'S';
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> equalizing_residuals(std::span<const TestParams> params, std::span<const double> q) {
    if (params.size() != q.size() || params.empty()) {
        throw ValidationError("parameter and prior sequences must be nonempty and of equal length");
    }
    const std::size_t h = params.size();
    std::vector<double> out;
    for (const std::string& pattern : strategy_patterns(h)) {
        std::vector<std::size_t> tested;
        for (std::size_t k = 0; k < h; ++k) {
            if (pattern[k] == 'T') tested.push_back(k);
        }
        // Sum over nature's null/alternative states on the tested steps.
        double total = 0.0;
        const std::size_t states = std::size_t{1} << tested.size();
        for (std::size_t st = 0; st < states; ++st) {
            double prob = 1.0;
            double payoff = 0.0;
            for (std::size_t i = 0; i < tested.size(); ++i) {
                const TestParams& p = params[tested[i]];
                const double qk = q[tested[i]];
                const bool null_true = (st >> i) & 1u;
                prob *= null_true ? qk : 1.0 - qk;
                payoff += -p.phi + p.psi * (null_true ? p.alpha_j : p.rho);
            }
            total += prob * payoff;
        }
        out.push_back(total);
    }
    return out;
}

namespace {

constexpr std::size_t kBudgetGrid = 100;

// Smallest sample size that attains the step's full ante.
double desired_n(const CaeroSolution& s) { return s.n_band_lo > 0.0 ? s.n_band_lo : s.params.n; }

struct StepValue {
    double phi = 0.0;
    std::optional<TestParams> params;
};

class StepCurve {
public:
    StepCurve(const HypothesisSpec& spec, const StepLimits& limits, double n_desired, const SolverConfig& config)
        : spec_(spec), limits_(limits), n_desired_(n_desired), config_(config) {}

    StepValue at(double n) const {
        StepValue v;
        if (!(n > 0.0)) return v;
        const double used = std::min(n, n_desired_);
        v.params = params_at_n(spec_, limits_, used, config_);
        if (v.params) v.phi = v.params->phi;
        return v;
    }

    double n_desired() const { return n_desired_; }

private:
    HypothesisSpec spec_;
    StepLimits limits_;
    double n_desired_;
    SolverConfig config_;
};

double golden_max(double lo, double hi, const std::function<double(double)>& f) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 40 && b - a > 1e-8 * std::max(1.0, b); ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x), flo = f(lo), fhi = f(hi);
    if (flo >= fx && flo >= fhi) return lo;
    if (fhi >= fx) return hi;
    return x;
}

// Splits the dollar budget across steps to maximize the summed ante.
std::vector<double> allocate(const std::vector<StepCurve>& curves, const std::vector<double>& costs, double budget) {
    const std::size_t h = curves.size();
    // A quarter sample is fine enough when the budget funds only a few samples.
    const double min_cost = *std::min_element(costs.begin(), costs.end());
    const std::size_t grid = static_cast<std::size_t>(
        std::clamp(std::ceil(4.0 * budget / min_cost), 20.0, static_cast<double>(kBudgetGrid)));
    const double unit = budget / static_cast<double>(grid);
    std::vector<std::vector<double>> f(h, std::vector<double>(grid + 1, 0.0));
    for (std::size_t k = 0; k < h; ++k) {
        for (std::size_t u = 1; u <= grid; ++u) {
            const double n = unit * static_cast<double>(u) / costs[k];
            // The curve is flat beyond the desired sample size.
            if (u > 1 && n > curves[k].n_desired() && unit * static_cast<double>(u - 1) / costs[k] >= curves[k].n_desired()) {
                f[k][u] = f[k][u - 1];
                continue;
            }
            f[k][u] = curves[k].at(n).phi;
        }
    }
    std::vector<std::vector<double>> best(h, std::vector<double>(grid + 1, 0.0));
    std::vector<std::vector<std::size_t>> choice(h, std::vector<std::size_t>(grid + 1, 0));
    for (std::size_t u = 0; u <= grid; ++u) {
        best[h - 1][u] = f[h - 1][u];
        choice[h - 1][u] = u;
    }
    for (std::size_t k = h - 1; k-- > 0;) {
        for (std::size_t u = 0; u <= grid; ++u) {
            for (std::size_t v = 0; v <= u; ++v) {
                const double val = f[k][v] + best[k + 1][u - v];
                if (val > best[k][u]) {
                    best[k][u] = val;
                    choice[k][u] = v;
                }
            }
        }
    }
    std::vector<double> spend(h, 0.0);
    std::size_t left = grid;
    for (std::size_t k = 0; k < h; ++k) {
        const std::size_t v = choice[k][left];
        spend[k] = unit * static_cast<double>(v);
        left -= v;
    }
    spend[h - 1] += unit * static_cast<double>(left);

    // Continuous refinement by moving budget between the first step and each later step.
    auto phi_of = [&](std::size_t k, double dollars) { return curves[k].at(dollars / costs[k]).phi; };
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t k = 1; k < h; ++k) {
            const double pool = spend[0] + spend[k];
            const double lo = std::max(0.0, spend[0] - 2.0 * unit);
            const double hi = std::min(pool, spend[0] + 2.0 * unit);
            const double x = golden_max(lo, hi, [&](double s0) { return phi_of(0, s0) + phi_of(k, pool - s0); });
            spend[0] = x;
            spend[k] = pool - x;
        }
    }
    std::vector<double> n(h);
    for (std::size_t k = 0; k < h; ++k) n[k] = std::min(spend[k] / costs[k], curves[k].n_desired());
    return n;
}

}  // namespace

std::vector<CaeroSolution> solve_finite_horizon(const HorizonProblem& problem, const SolverConfig& config) {
    if (problem.specs.empty() || problem.specs.size() > 5) throw ValidationError("horizon must lie in [1, 5]");
    config.validate();
    for (const auto& s : problem.specs) s.validate();
    const std::size_t h = problem.specs.size();
    const WealthSnapshot& w0 = problem.wealth;

    std::vector<CaeroSolution> desired;
    WealthSnapshot w = w0;
    double total_cost = 0.0;
    for (std::size_t k = 0; k < h; ++k) {
        const HypothesisSpec& spec = problem.specs[k];
        CaeroSolution s = solve_one_step(spec, WealthSnapshot{w.w_alpha, w0.w_dollar, w0.alpha}, config);
        if (!s.skipped) {
            total_cost += desired_n(s) * spec.cost;
            // Later steps plan with the expected wealth after this one.
            w.w_alpha += expected_increment(s.params, spec.q);
        }
        desired.push_back(std::move(s));
    }
    if (h == 1) return desired;

    if (total_cost <= w0.w_dollar) {
        std::vector<CaeroSolution> out;
        double dollars = w0.w_dollar;
        w = w0;
        for (std::size_t k = 0; k < h; ++k) {
            const HypothesisSpec& spec = problem.specs[k];
            CaeroSolution s = desired[0];
            if (k > 0) {
                // Planned steps may use fractional samples; only the executed step is integer.
                StepLimits l = step_limits(spec, WealthSnapshot{w.w_alpha, dollars, w0.alpha}, config);
                if (l.n_binding == Binding::dollar_budget) l.n_max = std::max(dollars, 0.0) / spec.cost;
                s = solve_with_limits(spec, l, config);
            }
            if (!s.skipped) {
                dollars -= desired_n(s) * spec.cost;
                w.w_alpha += expected_increment(s.params, spec.q);
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    // Scarce budget: share it across the steps.
    std::vector<StepCurve> curves;
    std::vector<double> costs;
    std::vector<StepLimits> limits;
    w = w0;
    for (std::size_t k = 0; k < h; ++k) {
        const HypothesisSpec& spec = problem.specs[k];
        StepLimits l = step_limits(spec, WealthSnapshot{w.w_alpha, w0.w_dollar, w0.alpha}, config);
        const bool usable = !desired[k].skipped;
        curves.emplace_back(spec, l, usable ? desired_n(desired[k]) : 0.0, config);
        costs.push_back(spec.cost);
        limits.push_back(l);
        if (usable) w.w_alpha += expected_increment(desired[k].params, spec.q);
    }
    const std::vector<double> n = allocate(curves, costs, w0.w_dollar);

    std::vector<CaeroSolution> out;
    for (std::size_t k = 0; k < h; ++k) {
        const HypothesisSpec& spec = problem.specs[k];
        if (desired[k].skipped) {
            out.push_back(desired[k]);
            continue;
        }
        const StepValue v = curves[k].at(n[k]);
        if (!v.params || !(v.phi > 0.0)) {
            CaeroSolution s;
            s.skipped = true;
            s.diagnostic = "budget is worth more on later steps";
            out.push_back(std::move(s));
            continue;
        }
        CaeroSolution s;
        s.params = *v.params;
        s.objective = s.params.psi * rejection_probability(s.params, spec.q);
        const bool at_cap = n[k] >= curves[k].n_desired();
        s.binding = at_cap ? Binding::alpha_wealth : Binding::dollar_budget;
        s.n_band_lo = s.params.n;
        s.n_band_hi = s.params.n;
        s.diagnostic = "dollar budget shared across the horizon";
        const std::string bad = detail::verify(s, spec, limits[k], config, !at_cap);
        if (!bad.empty()) {
            s = CaeroSolution{};
            s.skipped = true;
            s.solver_failure = true;
            s.diagnostic = "verification failed: " + bad;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace caero
