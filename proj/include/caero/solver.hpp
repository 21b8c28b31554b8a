#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caero/ledger.hpp"
#include "caero/policies.hpp"

namespace caero {

// How the executed sample size is chosen among all n that attain the optimal ante.
enum class BandSelection {
    lower,     // smallest such n (both reward caps active)
    init_rho,  // n nearest the power target init_rho
};

struct SolverConfig {
    double a = 0.1;
    std::optional<double> n_cap;
    double init_alpha = 1e-3;
    double init_rho = 0.9;
    double residual_tol = 1e-10;
    int max_restarts = 10;
    // When set, the ante cap becomes ante_prior_scale * (1 - q) * W_alpha instead of a * W_alpha.
    std::optional<double> ante_prior_scale;
    double q_min = 1e-6;
    double q_max = 1.0 - 1e-6;
    BandSelection band = BandSelection::init_rho;
    std::uint64_t restart_seed = 0x5eed;

    void validate() const;
};

BandSelection band_selection_from_string(const std::string& s);
std::string to_string(BandSelection b);

// power_limit: the ante cap is out of reach and the ante has levelled off as the power saturates.
enum class Binding { alpha_wealth, n_cap, dollar_budget, power_limit };
std::string to_string(Binding b);

struct CaeroSolution {
    TestParams params;  // continuous n, psi at the reward-cap intersection
    double objective = 0.0;
    Binding binding = Binding::alpha_wealth;
    bool skipped = false;
    bool solver_failure = false;  // skipped after exhausting restarts
    std::string diagnostic;
    double n_band_lo = 0.0;  // every n in [lo, hi] attains the same ante
    double n_band_hi = 0.0;
    int attempts = 0;
};

// Bounds that constrain one step.
struct StepLimits {
    double ante_cap = 0.0;
    double n_max = std::numeric_limits<double>::infinity();
    Binding n_binding = Binding::dollar_budget;
    double alpha = 0.05;
};

StepLimits step_limits(const HypothesisSpec& spec, const WealthSnapshot& wealth, const SolverConfig& config);

CaeroSolution solve_one_step(const HypothesisSpec& spec, const WealthState& wealth, const SolverConfig& config);
CaeroSolution solve_one_step(const HypothesisSpec& spec, const WealthSnapshot& wealth, const SolverConfig& config);
CaeroSolution solve_with_limits(const HypothesisSpec& spec, const StepLimits& limits, const SolverConfig& config);

// Largest feasible ante at a fixed sample size, with the matching parameters.
// psi equalizes; it sits at the caps only when n is below the wealth-bound band.
std::optional<TestParams> params_at_n(const HypothesisSpec& spec, const StepLimits& limits, double n,
                                      const SolverConfig& config);

// Integer sample size inside the solution's band and the parameters executed with it.
TestParams execution_params(const CaeroSolution& solution, const HypothesisSpec& spec, double alpha,
                            const SolverConfig& config);

struct HorizonProblem {
    std::vector<HypothesisSpec> specs;  // current step first
    WealthSnapshot wealth;
};

std::vector<CaeroSolution> solve_finite_horizon(const HorizonProblem& problem, const SolverConfig& config);

// Test/skip patterns over H steps, tests before skips, the all-skip pattern excluded.
std::vector<std::string> strategy_patterns(std::size_t horizon);

// Expected alpha-wealth change along each pattern.
std::vector<double> equalizing_residuals(std::span<const TestParams> params, std::span<const double> q);

CaeroSolution brute_force_oracle(const HypothesisSpec& spec, const WealthSnapshot& wealth,
                                 const SolverConfig& config, std::size_t grid_resolution);

class CostAwarePolicy : public Policy {
public:
    CostAwarePolicy(SolverConfig config, std::size_t horizon = 1, std::optional<double> skip_above_n = {});

    std::string name() const override;
    std::size_t lookahead() const override { return horizon_ - 1; }
    Decision decide(const WealthState& state, const HypothesisSpec& spec,
                    std::span<const HypothesisSpec> upcoming) const override;

    const SolverConfig& config() const { return config_; }

private:
    SolverConfig config_;
    std::size_t horizon_;
    std::optional<double> skip_above_n_;
};

}  // namespace caero
