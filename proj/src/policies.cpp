#include "caero/policies.hpp"

#include <cmath>

#include "caero/error.hpp"
#include "caero/gauss.hpp"

namespace caero {

SchemeKind scheme_kind_from_string(const std::string& s) {
    if (s == "constant") return SchemeKind::constant;
    if (s == "relative") return SchemeKind::relative;
    if (s == "relative200") return SchemeKind::relative200;
    throw ValidationError("unknown spending scheme '" + s + "'");
}

std::string to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::constant: return "constant";
        case SchemeKind::relative: return "relative";
        case SchemeKind::relative200: return "relative200";
    }
    return "constant";
}

std::optional<double> scheme_phi(const SpendingScheme& scheme, const WealthState& state) {
    const double w = state.w_alpha();
    switch (scheme.kind) {
        case SchemeKind::constant: {
            if (w <= kAlphaWealthEpsilon) return std::nullopt;
            return std::min(scheme.fraction * state.initial_w_alpha(), w);
        }
        case SchemeKind::relative:
            if (w < scheme.stop_fraction * state.initial_w_alpha()) return std::nullopt;
            return scheme.fraction * w;
        case SchemeKind::relative200:
            if (state.tests() >= scheme.horizon || w <= 0.0) return std::nullopt;
            return scheme.fraction * w;
    }
    return std::nullopt;
}

namespace {

double fixed_power(double alpha_j, const HypothesisSpec& spec, double n) {
    return gauss::power_one_sided({alpha_j, spec.theta_bar, spec.sigma, n});
}

void check_ante(const WealthState& state, double phi) {
    if (!(phi > 0.0)) throw DomainError("ante must be positive");
    if (phi > state.w_alpha()) throw InsufficientWealthError("ante exceeds alpha-wealth");
}

}  // namespace

TestParams alpha_spending_step(const WealthState& state, double phi, const HypothesisSpec& spec, double n) {
    check_ante(state, phi);
    if (phi >= 1.0) throw DomainError("alpha-spending ante must be below 1");
    TestParams p;
    p.phi = phi;
    p.alpha_j = phi;
    p.psi = 0.0;
    p.n = n;
    p.rho = fixed_power(phi, spec, n);
    return p;
}

TestParams alpha_investing_step(const WealthState& state, double phi, const HypothesisSpec& spec, double n) {
    check_ante(state, phi);
    TestParams p;
    p.phi = phi;
    p.alpha_j = phi / (1.0 + phi);
    p.psi = phi + state.alpha();
    p.n = n;
    p.rho = fixed_power(p.alpha_j, spec, n);
    return p;
}

double ero_residual(double alpha_j, double phi, const HypothesisSpec& spec, double n) {
    return phi / fixed_power(alpha_j, spec, n) - phi / alpha_j + 1.0;
}

TestParams ero_step(const WealthState& state, double phi, const HypothesisSpec& spec, double n) {
    check_ante(state, phi);
    double lo = std::min(1e-12, 1e-3 * phi);
    double hi = std::min(phi, 1.0 - 1e-12);
    double g_lo = ero_residual(lo, phi, spec, n);
    const double g_hi = ero_residual(hi, phi, spec, n);
    if (!(g_lo < 0.0 && g_hi > 0.0)) {
        if (g_lo == 0.0) hi = lo;
        else throw InfeasibleError("no intersection of the reward caps inside (0, min(phi, 1))");
    }
    // Geometric bisection keeps relative precision when phi is tiny.
    while (hi - lo > 1e-12 * hi) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        const double g = ero_residual(mid, phi, spec, n);
        if (g < 0.0) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    double a = 0.5 * (lo + hi);
    {
        const gauss::PowerQuery pq{a, spec.theta_bar, spec.sigma, n};
        const double rho = gauss::power_one_sided(pq);
        const double drho = gauss::power_alpha_derivative(pq);
        const double g = phi / rho - phi / a + 1.0;
        const double dg = -phi * drho / (rho * rho) + phi / (a * a);
        if (dg > 0.0) {
            const double polished = a - g / dg;
            if (polished > 0.0 && polished < 1.0 &&
                std::abs(ero_residual(polished, phi, spec, n)) <= std::abs(g)) {
                a = polished;
            }
        }
    }
    TestParams p;
    p.phi = phi;
    p.alpha_j = a;
    p.rho = fixed_power(a, spec, n);
    p.psi = phi / p.rho + state.alpha();
    p.n = n;
    return p;
}

SchemePolicy::SchemePolicy(Rule rule, SpendingScheme scheme, double n) : rule_(rule), scheme_(scheme), n_(n) {
    if (!(n > 0.0)) throw DomainError("fixed sample size must be positive");
}

std::string SchemePolicy::name() const {
    const char* base = rule_ == Rule::spending ? "alpha-spending" : rule_ == Rule::investing ? "alpha-investing" : "ero";
    return std::string(base) + "/" + to_string(scheme_.kind);
}

Decision SchemePolicy::decide(const WealthState& state, const HypothesisSpec& spec,
                              std::span<const HypothesisSpec>) const {
    Decision d;
    if (n_ * spec.cost > state.w_dollar()) {
        d.note = "dollar budget cannot fund the fixed sample size";
        return d;
    }
    const auto phi = scheme_phi(scheme_, state);
    if (!phi) {
        d.note = "spending scheme stopped";
        return d;
    }
    try {
        switch (rule_) {
            case Rule::spending: d.params = alpha_spending_step(state, *phi, spec, n_); break;
            case Rule::investing: d.params = alpha_investing_step(state, *phi, spec, n_); break;
            case Rule::ero: d.params = ero_step(state, *phi, spec, n_); break;
        }
    } catch (const InfeasibleError& e) {
        d.action = Decision::Action::skip;
        d.solver_failure = true;
        d.note = e.what();
        return d;
    }
    d.action = Decision::Action::test;
    return d;
}

}  // namespace caero
