#include "caero/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "caero/error.hpp"

namespace caero {

void HypothesisSpec::validate() const {
    if (!std::isfinite(q) || q < 0.0 || q > 1.0) throw DomainError("q must lie in [0, 1]");
    if (q == 0.0 || q == 1.0) throw DegeneratePriorError("prior q must lie strictly inside (0, 1)");
    if (!std::isfinite(theta_bar) || theta_bar < 0.0) throw DomainError("theta_bar must be >= 0");
    if (!std::isfinite(sigma) || sigma <= 0.0) throw DomainError("sigma must be > 0");
    if (!std::isfinite(cost) || cost <= 0.0) throw DomainError("cost must be > 0");
    if (!std::isfinite(mu0)) throw DomainError("mu0 must be finite");
}

WealthState WealthState::init(double alpha, double eta, double budget) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
    if (!(budget >= 0.0)) throw DomainError("budget must be >= 0");
    WealthState s;
    s.alpha_ = alpha;
    s.eta_ = eta;
    s.w_alpha_ = alpha * eta;
    s.w_dollar_ = budget;
    s.initial_w_alpha_ = s.w_alpha_;
    s.initial_w_dollar_ = budget;
    return s;
}

void WealthState::apply(const HypothesisSpec& spec, const TestParams& p, const Outcome& outcome) {
    if (!(p.phi >= 0.0) || !(p.psi >= 0.0) || !(p.n >= 0.0)) {
        throw ValidationError("phi, psi and n must be non-negative");
    }
    if (!(p.alpha_j >= 0.0 && p.alpha_j <= 1.0)) throw ValidationError("alpha_j must lie in [0, 1]");
    if (outcome.p_value) {
        const double pv = *outcome.p_value;
        if (!(pv >= 0.0 && pv <= 1.0)) throw ValidationError("p-value must lie in [0, 1]");
        if (outcome.rejected != (pv <= p.alpha_j)) {
            throw ValidationError("rejection flag disagrees with p <= alpha_j");
        }
    }
    if (p.phi > w_alpha_) {
        std::ostringstream os;
        os << "ante " << p.phi << " exceeds alpha-wealth " << w_alpha_;
        throw InsufficientWealthError(os.str());
    }
    const double spend = p.n * spec.cost;
    if (spend > w_dollar_) {
        std::ostringstream os;
        os << "sampling cost " << spend << " exceeds dollar-wealth " << w_dollar_;
        throw InsufficientWealthError(os.str());
    }
    w_alpha_ = w_alpha_ - p.phi + (outcome.rejected ? p.psi : 0.0);
    w_dollar_ = w_dollar_ - spend;
    if (outcome.rejected) ++rejections_;
    if (record_history_) {
        history_.push_back({spec, p, outcome, w_alpha_, w_dollar_});
    } else {
        ++tests_unrecorded_;
    }
}

WealthState apply_outcome(const WealthState& state, const HypothesisSpec& spec,
                          const TestParams& params, const Outcome& outcome) {
    WealthState next = state;
    next.apply(spec, params, outcome);
    return next;
}

WealthState replay(double alpha, double eta, double budget, std::span<const LedgerEntry> entries) {
    WealthState s = WealthState::init(alpha, eta, budget);
    for (const auto& e : entries) s.apply(e.spec, e.params, e.outcome);
    return s;
}

double power_cap(const TestParams& p, double alpha) { return p.phi / p.rho + alpha; }

double level_cap(const TestParams& p, double alpha) { return p.phi / p.alpha_j + alpha - 1.0; }

double reward_cap(const TestParams& p, double alpha) {
    return std::min(power_cap(p, alpha), level_cap(p, alpha));
}

bool satisfies_reward_caps(const TestParams& p, double alpha, double slack) {
    const double cap = reward_cap(p, alpha);
    return p.psi <= cap + slack * std::max(1.0, std::abs(cap));
}

double rejection_probability(const TestParams& p, double q) {
    return q * p.alpha_j + (1.0 - q) * p.rho;
}

double expected_increment(const TestParams& p, double q) {
    return -p.phi + p.psi * rejection_probability(p, q);
}

double lemma1_bound(const TestParams& p, double q, double alpha) {
    const double odds = p.alpha_j / (1.0 - p.alpha_j);
    return -odds + (p.rho - (p.rho - p.alpha_j) * q) * (alpha + odds);
}

RegimeReport classify_regime(const TestParams& p, double q, double alpha) {
    RegimeReport out;
    if (!(q >= 0.0) || q >= 1.0) {
        out.diagnostic = "q = 1 makes the regime conditions undefined";
        return out;
    }
    if (p.psi > 0.0) {
        const double implied = (p.phi / p.psi - q * p.alpha_j) / (1.0 - q);
        if (std::abs(p.rho - implied) <= 1e-9) {
            out.regime = Regime::martingale;
            out.diagnostic = "power matches the equalizing value";
            return out;
        }
    }
    if (p.alpha_j >= 1.0) {
        out.diagnostic = "alpha_j = 1 leaves the Foster-Stine cost unbounded";
        return out;
    }
    const double odds = p.alpha_j / (1.0 - p.alpha_j);
    const double tol = 1e-9 * std::max(odds, 1e-12);
    if (std::abs(p.phi - odds) > tol || std::abs(p.psi - (odds + alpha)) > tol) {
        out.diagnostic = "sufficient conditions assume the Foster-Stine ante and payout";
        return out;
    }
    // Conditions compared after multiplying through by 1 - q.
    const double ratio = odds / (alpha + odds);
    const double lhs = p.rho * (1.0 - q);
    if (lhs >= ratio) {
        out.regime = Regime::submartingale;
        out.diagnostic = "power high enough for wealth to drift upward";
    } else if (lhs <= ratio - q) {
        out.regime = Regime::supermartingale;
        out.diagnostic = "power low enough for wealth to drift downward";
    } else {
        out.diagnostic = "neither sufficient condition holds";
    }
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::submartingale: return "submartingale";
        case Regime::martingale: return "martingale";
        case Regime::supermartingale: return "supermartingale";
        case Regime::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

double mfdr_estimate(double mean_false_rejects, double mean_rejects, double eta) {
    return mean_false_rejects / (mean_rejects + eta);
}

}  // namespace caero
