#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace caero {

// Stopping threshold on alpha-wealth.
inline constexpr double kAlphaWealthEpsilon = 1e-6;

struct HypothesisSpec {
    double q = 0.5;          // prior probability that the null is true
    double theta_bar = 1.0;  // anticipated effect under the alternative
    double sigma = 1.0;
    double cost = 1.0;       // dollars per sample
    double mu0 = 0.0;

    // Throws DegeneratePriorError for q in {0, 1}, DomainError otherwise.
    void validate() const;
};

struct TestParams {
    double phi = 0.0;      // ante paid up front
    double alpha_j = 0.0;  // test level
    double psi = 0.0;      // reward on rejection
    double rho = 0.0;      // power at n
    double n = 0.0;        // sample size
};

struct Outcome {
    std::optional<double> p_value;
    bool rejected = false;
    std::optional<bool> null_true;  // only known in simulation
};

struct LedgerEntry {
    HypothesisSpec spec;
    TestParams params;
    Outcome outcome;
    double w_alpha = 0.0;  // after the update
    double w_dollar = 0.0;
};

struct WealthSnapshot {
    double w_alpha = 0.0;
    double w_dollar = 0.0;
    double alpha = 0.05;
};

class WealthState {
public:
    WealthState() = default;
    static WealthState init(double alpha, double eta, double budget);

    double alpha() const { return alpha_; }
    double eta() const { return eta_; }
    double w_alpha() const { return w_alpha_; }
    double w_dollar() const { return w_dollar_; }
    double initial_w_alpha() const { return initial_w_alpha_; }
    double initial_w_dollar() const { return initial_w_dollar_; }
    std::size_t tests() const { return history_.size() + tests_unrecorded_; }
    std::size_t rejections() const { return rejections_; }
    const std::vector<LedgerEntry>& history() const { return history_; }
    WealthSnapshot snapshot() const { return {w_alpha_, w_dollar_, alpha_}; }

    // In-place update. Throws InsufficientWealthError or ValidationError.
    void apply(const HypothesisSpec& spec, const TestParams& params, const Outcome& outcome);

    void set_record_history(bool on) { record_history_ = on; }

private:
    double alpha_ = 0.05;
    double eta_ = 0.95;
    double w_alpha_ = 0.0;
    double w_dollar_ = 0.0;
    double initial_w_alpha_ = 0.0;
    double initial_w_dollar_ = 0.0;
    std::size_t rejections_ = 0;
    std::size_t tests_unrecorded_ = 0;
    bool record_history_ = true;
    std::vector<LedgerEntry> history_;
};

WealthState apply_outcome(const WealthState& state, const HypothesisSpec& spec,
                          const TestParams& params, const Outcome& outcome);

WealthState replay(double alpha, double eta, double budget, std::span<const LedgerEntry> entries);

double power_cap(const TestParams& p, double alpha);  // phi/rho + alpha
double level_cap(const TestParams& p, double alpha);  // phi/alpha_j + alpha - 1
double reward_cap(const TestParams& p, double alpha);
bool satisfies_reward_caps(const TestParams& p, double alpha, double slack = 1e-12);

// Pr[R = 1] = q alpha_j + (1 - q) rho
double rejection_probability(const TestParams& p, double q);

// E[W(j) - W(j-1)] = -phi + psi Pr[R = 1]
double expected_increment(const TestParams& p, double q);

// E[A(j) - A(j-1)] upper bound: the mFDR compensator drift at this test.
double lemma1_bound(const TestParams& p, double q, double alpha);

enum class Regime { submartingale, martingale, supermartingale, indeterminate };

struct RegimeReport {
    Regime regime = Regime::indeterminate;
    std::string diagnostic;
};

RegimeReport classify_regime(const TestParams& p, double q, double alpha);
std::string to_string(Regime r);

// E[V] / (E[R] + eta) from per-iteration means.
double mfdr_estimate(double mean_false_rejects, double mean_rejects, double eta);

}  // namespace caero
