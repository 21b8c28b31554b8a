#include "caero/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "caero/error.hpp"
#include "caero/gauss.hpp"
#include "solver_internal.hpp"

namespace caero {

void SolverConfig::validate() const {
    if (!(a > 0.0 && a <= 1.0)) throw ValidationError("a must lie in (0, 1]");
    if (n_cap && !(*n_cap > 0.0)) throw ValidationError("n_cap must be positive");
    if (!(init_alpha > 0.0 && init_alpha < 1.0)) throw ValidationError("init_alpha must lie in (0, 1)");
    if (!(init_rho > 0.0 && init_rho <= 1.0)) throw ValidationError("init_rho must lie in (0, 1]");
    if (!(residual_tol > 0.0)) throw ValidationError("residual_tol must be positive");
    if (max_restarts < 1) throw ValidationError("max_restarts must be at least 1");
    if (ante_prior_scale && !(*ante_prior_scale > 0.0 && *ante_prior_scale <= 1.0)) {
        throw ValidationError("ante_prior_scale must lie in (0, 1]");
    }
    if (!(q_min > 0.0 && q_max < 1.0 && q_min < q_max)) throw ValidationError("prior bounds must satisfy 0 < q_min < q_max < 1");
}

BandSelection band_selection_from_string(const std::string& s) {
    if (s == "lower") return BandSelection::lower;
    if (s == "init_rho") return BandSelection::init_rho;
    throw ValidationError("unknown band selection '" + s + "'");
}

std::string to_string(BandSelection b) { return b == BandSelection::lower ? "lower" : "init_rho"; }

std::string to_string(Binding b) {
    switch (b) {
        case Binding::alpha_wealth: return "alpha_wealth";
        case Binding::n_cap: return "n_cap";
        case Binding::dollar_budget: return "dollar_budget";
        case Binding::power_limit: return "power_limit";
    }
    return "alpha_wealth";
}

namespace detail {

namespace {

constexpr int kNewtonIterations = 100;
constexpr double kNewtonTol = 1e-14;

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double power_at(double alpha_j, const HypothesisSpec& spec, double n) {
    return gauss::power_one_sided({alpha_j, spec.theta_bar, spec.sigma, n});
}

struct Jitter {
    explicit Jitter(std::uint64_t seed) : rng(seed) {}
    double normal(double sd) { return boost::random::normal_distribution<double>(0.0, sd)(rng); }
    boost::random::mt19937_64 rng;
};

// Starting point for attempt k; attempt 0 uses the configured values unchanged.
std::pair<double, double> start_point(const SolverConfig& config, int k) {
    double a0 = std::clamp(config.init_alpha, 1e-12, 0.5);
    double r0 = std::clamp(config.init_rho, 1e-6, 1.0 - 1e-6);
    if (k == 0) return {a0, r0};
    Jitter j(config.restart_seed + static_cast<std::uint64_t>(k));
    a0 = std::clamp(a0 * std::exp(j.normal(1.5)), 1e-12, 0.5);
    r0 = std::clamp(expit(logit(r0) + j.normal(1.5)), 1e-6, 1.0 - 1e-6);
    return {a0, r0};
}

template <int N, typename F>
bool damped_newton(Eigen::Matrix<double, N, 1>& x, F&& eval) {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;
    Vec r;
    Mat J;
    if (!eval(x, r, &J)) return false;
    for (int it = 0; it < kNewtonIterations; ++it) {
        const double norm = r.template lpNorm<Eigen::Infinity>();
        if (norm < kNewtonTol) return true;
        const Vec step = J.fullPivLu().solve(-r);
        if (!step.allFinite()) return false;
        double t = 1.0;
        bool moved = false;
        while (t > 1e-10) {
            Vec trial = x + t * step;
            Vec rt;
            Mat Jt;
            if (eval(trial, rt, &Jt) && rt.template lpNorm<Eigen::Infinity>() < (1.0 - 1e-4 * t) * norm) {
                x = trial;
                r = rt;
                J = Jt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) return norm < 1e-12;
    }
    return r.template lpNorm<Eigen::Infinity>() < 1e-12;
}

// Residuals shared by both branches: intersection of the caps and the equalizing reward.
// The equalizing residual is scaled by phi / rho and written without cancellation so that
// the degenerate limit alpha_j = rho -> 0 is not a root.
struct CoreResiduals {
    double r1, r2;
    double d1a, d1r, d1p;
    double d2a, d2r, d2p;
};

CoreResiduals core(double a, double rho, double phi, double q, double alpha) {
    const double p1 = q * a + (1.0 - q) * rho;
    const double rho2 = rho * rho;
    CoreResiduals c;
    c.r1 = a / rho + a / phi - 1.0;
    c.r2 = q * phi * (a - rho) / rho2 + alpha * p1 / rho;
    c.d1a = 1.0 / rho + 1.0 / phi;
    c.d1r = -a / rho2;
    c.d1p = -a / (phi * phi);
    c.d2a = q * phi / rho2 + alpha * q / rho;
    c.d2r = q * phi * (rho - 2.0 * a) / (rho2 * rho) - alpha * q * a / rho2;
    c.d2p = q * (a - rho) / rho2;
    return c;
}

// Equalizing residual along the intersection curve at fixed phi, parametrized by rho.
double ante_curve_residual(double rho, double phi, double q, double alpha) {
    const double a = phi * rho / (phi + rho);
    return core(a, rho, phi, q, alpha).r2;
}

std::optional<AlphaRho> ante_branch_bracket(double phi, double q, double alpha) {
    double hi = 1.0 - 1e-15;
    if (ante_curve_residual(hi, phi, q, alpha) < 0.0) return std::nullopt;
    double lo = 1e-300;
    if (ante_curve_residual(lo, phi, q, alpha) >= 0.0) return std::nullopt;
    for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i) {
        const double mid = (lo < 1e-3 * hi) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (ante_curve_residual(mid, phi, q, alpha) < 0.0) lo = mid;
        else hi = mid;
    }
    const double rho = 0.5 * (lo + hi);
    return AlphaRho{phi * rho / (phi + rho), rho};
}

// Equalizing residual along the intersection curve at fixed n, parametrized by alpha_j.
double n_curve_residual(double a, const HypothesisSpec& spec, double n, double alpha, double& rho, double& phi) {
    rho = power_at(a, spec, n);
    if (!(rho > a)) return -1.0;
    phi = a * rho / (rho - a);
    return core(a, rho, phi, spec.q, alpha).r2;
}

std::optional<FixedNPoint> n_branch_bracket(const HypothesisSpec& spec, double n, double alpha) {
    double rho = 0.0, phi = 0.0;
    double lo = 1e-300;
    if (!(n_curve_residual(lo, spec, n, alpha, rho, phi) > 0.0)) return std::nullopt;
    double hi = 0.5;
    while (n_curve_residual(hi, spec, n, alpha, rho, phi) > 0.0) {
        hi = 0.5 * (hi + 1.0);
        if (hi > 1.0 - 1e-12) return std::nullopt;
    }
    for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i) {
        const double mid = (lo < 1e-3 * hi) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (n_curve_residual(mid, spec, n, alpha, rho, phi) > 0.0) lo = mid;
        else hi = mid;
    }
    const double a = 0.5 * (lo + hi);
    n_curve_residual(a, spec, n, alpha, rho, phi);
    return FixedNPoint{a, rho, phi};
}

}  // namespace

bool caps_slack(double q, double alpha) { return q <= alpha; }

std::optional<AlphaRho> solve_ante_branch(double phi, double q, double alpha, const SolverConfig& config,
                                          int& attempts) {
    using Vec = Eigen::Vector2d;
    auto eval = [&](const Vec& x, Vec& r, Eigen::Matrix2d* J) {
        const double a = std::exp(x(0));
        const double rho = expit(x(1));
        if (!(a > 0.0 && rho > 0.0 && rho < 1.0)) return false;
        const CoreResiduals c = core(a, rho, phi, q, alpha);
        r << c.r1, c.r2;
        const double da = a, dr = rho * (1.0 - rho);
        *J << c.d1a * da, c.d1r * dr, c.d2a * da, c.d2r * dr;
        return r.allFinite();
    };
    for (int k = 0; k < config.max_restarts; ++k) {
        ++attempts;
        auto [a0, r0] = start_point(config, k);
        // Start on the intersection curve; jittered restarts also perturb alpha.
        a0 = phi * r0 / (phi + r0) * (k == 0 ? 1.0 : a0 / std::clamp(config.init_alpha, 1e-12, 0.5));
        Vec x(std::log(a0), logit(r0));
        if (damped_newton<2>(x, eval)) {
            const double a = std::exp(x(0));
            const double rho = expit(x(1));
            // alpha_j = rho is a degenerate limit of the system, not a solution.
            if (rho < 1.0 && rho > 1e-12 && rho > a * (1.0 + 1e-9)) return AlphaRho{a, rho};
        }
    }
    ++attempts;
    return ante_branch_bracket(phi, q, alpha);
}

std::optional<FixedNPoint> solve_n_branch(const HypothesisSpec& spec, double n, double alpha,
                                          const SolverConfig& config, int& attempts) {
    using Vec = Eigen::Vector3d;
    const double q = spec.q;
    auto eval = [&](const Vec& x, Vec& r, Eigen::Matrix3d* J) {
        const double a = std::exp(x(0));
        const double rho = expit(x(1));
        const double phi = std::exp(x(2));
        if (!(a > 0.0 && a < 1.0 && rho > 0.0 && rho < 1.0 && phi > 0.0)) return false;
        const gauss::PowerQuery pq{a, spec.theta_bar, spec.sigma, n};
        const double pw = gauss::power_one_sided(pq);
        const double dpw = gauss::power_alpha_derivative(pq);
        const CoreResiduals c = core(a, rho, phi, q, alpha);
        // Power residual relative to rho so the tolerance holds when the power is tiny.
        r << 1.0 - pw / rho, c.r1, c.r2;
        const double da = a, dr = rho * (1.0 - rho), dp = phi;
        *J << -dpw / rho * da, pw / (rho * rho) * dr, 0.0,
              c.d1a * da, c.d1r * dr, c.d1p * dp,
              c.d2a * da, c.d2r * dr, c.d2p * dp;
        return r.allFinite() && J->allFinite();
    };
    for (int k = 0; k < config.max_restarts; ++k) {
        ++attempts;
        const double a0 = start_point(config, k).first;
        const double r0 = std::clamp(power_at(a0, spec, n), 1e-9, 1.0 - 1e-9);
        if (!(r0 > a0)) continue;
        const double p0 = a0 * r0 / (r0 - a0);
        Vec x(std::log(a0), logit(r0), std::log(p0));
        if (damped_newton<3>(x, eval)) {
            const double a = std::exp(x(0));
            const double rho = expit(x(1));
            const double phi = std::exp(x(2));
            if (a < rho) return FixedNPoint{a, rho, phi};
        }
    }
    ++attempts;
    return n_branch_bracket(spec, n, alpha);
}

std::optional<BestN> best_n(const HypothesisSpec& spec, double n_max, double alpha, const SolverConfig& config,
                            int& attempts) {
    auto phi_at = [&](double n, FixedNPoint* out) {
        const auto f = solve_n_branch(spec, n, alpha, config, attempts);
        if (!f) return 0.0;
        if (out) *out = *f;
        return f->phi;
    };
    // The intersection ante rises with n and levels off once the power saturates.
    const double hi = std::isfinite(n_max) ? n_max : kUnboundedN;
    FixedNPoint point;
    const double top = phi_at(hi, &point);
    if (!(top > 0.0)) return std::nullopt;
    const double target = top * (1.0 - kPlateauTol);
    if (phi_at(hi * (1.0 - 1e-6), nullptr) < target) return BestN{hi, point, std::isfinite(n_max)};
    double lo_n = std::min(1e-6, 0.5 * hi), hi_n = hi;
    if (phi_at(lo_n, nullptr) >= target) hi_n = lo_n;
    for (int i = 0; i < 200 && hi_n - lo_n > 1e-10 * hi_n; ++i) {
        const double mid = std::sqrt(lo_n) * std::sqrt(hi_n);
        if (phi_at(mid, nullptr) >= target) hi_n = mid;
        else lo_n = mid;
    }
    if (hi_n >= hi * (1.0 - 1e-9)) return BestN{hi, point, std::isfinite(n_max)};
    phi_at(hi_n, &point);
    return BestN{hi_n, point, false};
}

double level_alpha(double phi, const HypothesisSpec& spec, double n) {
    auto h = [&](double a) { return a / phi + a / power_at(a, spec, n) - 1.0; };
    double lo = 1e-300;
    double hi = phi / (1.0 + phi);
    if (h(hi) <= 0.0) return hi;
    for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = (lo < 1e-3 * hi) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (h(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    double a = 0.5 * (lo + hi);
    const gauss::PowerQuery pq{a, spec.theta_bar, spec.sigma, n};
    const double rho = gauss::power_one_sided(pq);
    const double dh = 1.0 / phi + 1.0 / rho - a * gauss::power_alpha_derivative(pq) / (rho * rho);
    const double g = a / phi + a / rho - 1.0;
    if (dh > 0.0) {
        const double polished = a - g / dh;
        if (polished > 0.0 && std::abs(h(polished)) <= std::abs(g)) a = polished;
    }
    return a;
}

std::string verify(const CaeroSolution& s, const HypothesisSpec& spec, const StepLimits& limits,
                   const SolverConfig& config, bool psi_on_caps) {
    const TestParams& p = s.params;
    const double tol = config.residual_tol;
    std::ostringstream os;
    if (!(p.alpha_j > 0.0 && p.alpha_j < 1.0 && p.rho > 0.0 && p.rho < 1.0 && p.phi > 0.0 && p.n > 0.0)) {
        os << "parameters out of range";
        return os.str();
    }
    const double ero = p.phi / p.rho - p.phi / p.alpha_j + 1.0;
    const double pw = p.rho - power_at(p.alpha_j, spec, p.n);
    const double eq = expected_increment(p, spec.q);
    if (std::abs(ero) > tol) os << "intersection residual " << ero << "; ";
    if (std::abs(pw) > tol) os << "power residual " << pw << "; ";
    if (std::abs(eq) > tol * std::max(p.phi, 1.0)) os << "equalizing residual " << eq << "; ";
    if (!satisfies_reward_caps(p, limits.alpha, 1e-12)) os << "reward above caps; ";
    if (psi_on_caps && std::abs(p.psi - reward_cap(p, limits.alpha)) > 1e-9) os << "reward off the caps; ";
    if (p.phi > limits.ante_cap * (1.0 + 1e-12)) os << "ante above cap; ";
    if (p.n > limits.n_max * (1.0 + 1e-12)) os << "sample size above bound; ";
    return os.str();
}

}  // namespace detail

StepLimits step_limits(const HypothesisSpec& spec, const WealthSnapshot& wealth, const SolverConfig& config) {
    StepLimits l;
    l.alpha = wealth.alpha;
    const double fraction = config.ante_prior_scale ? *config.ante_prior_scale * (1.0 - spec.q) : config.a;
    l.ante_cap = std::min(fraction * wealth.w_alpha, wealth.w_alpha);
    l.n_max = std::floor(wealth.w_dollar / spec.cost + 1e-9);
    l.n_binding = Binding::dollar_budget;
    if (config.n_cap && *config.n_cap < l.n_max) {
        l.n_max = *config.n_cap;
        l.n_binding = Binding::n_cap;
    }
    return l;
}

CaeroSolution solve_one_step(const HypothesisSpec& spec, const WealthState& wealth, const SolverConfig& config) {
    return solve_one_step(spec, wealth.snapshot(), config);
}

CaeroSolution solve_one_step(const HypothesisSpec& spec, const WealthSnapshot& wealth, const SolverConfig& config) {
    spec.validate();
    return solve_with_limits(spec, step_limits(spec, wealth, config), config);
}

namespace {

CaeroSolution skipped(std::string why, bool failure = false, int attempts = 0) {
    CaeroSolution s;
    s.skipped = true;
    s.solver_failure = failure;
    s.diagnostic = std::move(why);
    s.attempts = attempts;
    return s;
}

// Point on the ante level curve at n with the equalizing reward.
TestParams level_params(double phi, const HypothesisSpec& spec, double n, double alpha) {
    TestParams p;
    p.phi = phi;
    p.n = n;
    p.alpha_j = detail::level_alpha(phi, spec, n);
    p.rho = gauss::power_one_sided({p.alpha_j, spec.theta_bar, spec.sigma, n});
    p.psi = std::min(phi / rejection_probability(p, spec.q), reward_cap(p, alpha));
    return p;
}

double anchored_n(const HypothesisSpec& spec, double phi, double lo, double hi, const SolverConfig& config) {
    if (config.band == BandSelection::lower) return lo;
    if (config.init_rho >= 1.0) return std::isfinite(hi) ? hi : lo;
    const double rho_t = config.init_rho;
    const double a_t = phi * rho_t / (phi + rho_t);
    double n_t = lo;
    try {
        n_t = gauss::sample_size_for_power(a_t, rho_t, spec.theta_bar, spec.sigma);
    } catch (const InfeasibleError&) {
        n_t = lo;
    }
    return std::clamp(n_t, lo, hi);
}

}  // namespace

CaeroSolution solve_with_limits(const HypothesisSpec& spec, const StepLimits& limits, const SolverConfig& config) {
    config.validate();
    spec.validate();
    if (spec.q < config.q_min || spec.q > config.q_max) {
        std::ostringstream os;
        os << "prior q=" << spec.q << " outside [" << config.q_min << ", " << config.q_max << "]";
        return skipped(os.str());
    }
    if (!(limits.ante_cap > 0.0)) return skipped("no alpha-wealth available for an ante");
    if (!(limits.n_max > 0.0)) return skipped("dollar budget cannot fund a sample");
    if (!(spec.theta_bar > 0.0)) return skipped("zero effect bound: power never exceeds the level");

    const double phi_cap = limits.ante_cap;
    const double alpha = limits.alpha;
    CaeroSolution s;

    auto slack_solution = [&]() {
        // Equalizing reward stays below both caps; every n on the ante level curve qualifies.
        const double n = std::min(anchored_n(spec, phi_cap, 0.0, limits.n_max, config), limits.n_max);
        s.params = level_params(phi_cap, spec, n > 0.0 ? n : std::min(1.0, limits.n_max), alpha);
        s.binding = Binding::alpha_wealth;
        s.n_band_lo = 0.0;
        s.n_band_hi = limits.n_max;
        s.diagnostic = "prior at or below alpha: reward caps are slack";
        s.objective = s.params.psi * rejection_probability(s.params, spec.q);
        const std::string bad = detail::verify(s, spec, limits, config, false);
        if (!bad.empty()) return skipped("verification failed: " + bad, true, 1);
        return s;
    };
    if (detail::caps_slack(spec.q, alpha)) return slack_solution();

    int attempts = 0;
    const auto ante = detail::solve_ante_branch(phi_cap, spec.q, alpha, config, attempts);
    double n_ante = std::numeric_limits<double>::infinity();
    if (ante) {
        try {
            n_ante = gauss::sample_size_for_power(ante->alpha_j, ante->rho, spec.theta_bar, spec.sigma);
        } catch (const InfeasibleError&) {
            // Prior so close to alpha that the intersection collapses onto n = 0.
            return slack_solution();
        }
    }

    if (ante && n_ante <= limits.n_max) {
        s.params = {phi_cap, ante->alpha_j, phi_cap / ante->rho + alpha, ante->rho, n_ante};
        s.binding = Binding::alpha_wealth;
        s.n_band_lo = n_ante;
        s.n_band_hi = limits.n_max;
    } else {
        const auto best = detail::best_n(spec, limits.n_max, alpha, config, attempts);
        if (!best) return skipped("no equalizing intersection below the sample-size bound", true, attempts);
        const auto& f = best->point;
        if (f.phi > phi_cap * (1.0 + 1e-12)) {
            return skipped("sample-size bound solution exceeds the ante cap", true, attempts);
        }
        s.params = {f.phi, f.alpha_j, f.phi / f.rho + alpha, f.rho, best->n};
        s.binding = best->at_bound ? limits.n_binding : Binding::power_limit;
        s.n_band_lo = best->n;
        s.n_band_hi = best->at_bound ? best->n : limits.n_max;
    }
    s.attempts = attempts;
    s.objective = s.params.psi * rejection_probability(s.params, spec.q);
    const std::string bad = detail::verify(s, spec, limits, config, true);
    if (!bad.empty()) return skipped("verification failed: " + bad, true, attempts);
    return s;
}

std::optional<TestParams> params_at_n(const HypothesisSpec& spec, const StepLimits& limits, double n,
                                      const SolverConfig& config) {
    if (!(n > 0.0) || n > limits.n_max * (1.0 + 1e-12)) return std::nullopt;
    spec.validate();
    if (!(spec.theta_bar > 0.0) || !(limits.ante_cap > 0.0)) return std::nullopt;
    const double phi_cap = limits.ante_cap;
    if (detail::caps_slack(spec.q, limits.alpha)) return level_params(phi_cap, spec, n, limits.alpha);
    int attempts = 0;
    const auto fixed = detail::solve_n_branch(spec, n, limits.alpha, config, attempts);
    if (!fixed) return std::nullopt;
    if (fixed->phi >= phi_cap) return level_params(phi_cap, spec, n, limits.alpha);
    return TestParams{fixed->phi, fixed->alpha_j, fixed->phi / fixed->rho + limits.alpha, fixed->rho, n};
}

TestParams execution_params(const CaeroSolution& solution, const HypothesisSpec& spec, double alpha,
                            const SolverConfig& config) {
    if (solution.skipped) throw InfeasibleError("cannot execute a skipped solution");
    const double phi = solution.params.phi;
    const double lo = solution.n_band_lo;
    const double hi = solution.n_band_hi;
    const double target = anchored_n(spec, phi, lo, hi, config);
    double n = std::ceil(target - 1e-9);
    if (n < 1.0) n = 1.0;
    if (n > hi) n = std::max(std::floor(hi + 1e-9), 1.0);
    if (n < lo * (1.0 - 1e-12) || n > hi * (1.0 + 1e-12)) n = hi;  // band holds no integer
    return level_params(phi, spec, n, alpha);
}

CostAwarePolicy::CostAwarePolicy(SolverConfig config, std::size_t horizon, std::optional<double> skip_above_n)
    : config_(std::move(config)), horizon_(horizon), skip_above_n_(skip_above_n) {
    config_.validate();
    if (horizon_ < 1 || horizon_ > 5) throw ValidationError("horizon must lie in [1, 5]");
}

std::string CostAwarePolicy::name() const {
    std::string s = "cost-aware";
    if (horizon_ > 1) s += "/H" + std::to_string(horizon_);
    return s;
}

Decision CostAwarePolicy::decide(const WealthState& state, const HypothesisSpec& spec,
                                 std::span<const HypothesisSpec> upcoming) const {
    Decision d;
    if (state.w_alpha() <= kAlphaWealthEpsilon) {
        d.note = "alpha-wealth exhausted";
        return d;
    }
    if (state.w_dollar() < spec.cost) {
        d.note = "dollar budget exhausted";
        return d;
    }
    CaeroSolution sol;
    if (horizon_ == 1 || upcoming.empty()) {
        sol = solve_one_step(spec, state, config_);
    } else {
        HorizonProblem prob;
        prob.wealth = state.snapshot();
        prob.specs.push_back(spec);
        for (std::size_t i = 0; i < upcoming.size() && prob.specs.size() < horizon_; ++i) {
            prob.specs.push_back(upcoming[i]);
        }
        sol = solve_finite_horizon(prob, config_).front();
    }
    if (sol.skipped) {
        d.action = Decision::Action::skip;
        d.solver_failure = sol.solver_failure;
        d.note = sol.diagnostic;
        return d;
    }
    if (skip_above_n_) {
        if (sol.n_band_lo > *skip_above_n_) {
            d.action = Decision::Action::skip;
            d.note = "optimal sample size above the execution cap";
            return d;
        }
        sol.n_band_hi = std::min(sol.n_band_hi, *skip_above_n_);
    }
    d.params = execution_params(sol, spec, state.alpha(), config_);
    d.action = Decision::Action::test;
    return d;
}

}  // namespace caero
