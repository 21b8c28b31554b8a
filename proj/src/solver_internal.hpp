#pragma once

#include <optional>

#include "caero/solver.hpp"

namespace caero::detail {

struct AlphaRho {
    double alpha_j = 0.0;
    double rho = 0.0;
};

struct FixedNPoint {
    double alpha_j = 0.0;
    double rho = 0.0;
    double phi = 0.0;
};

// Intersection point with equalizing reward at a fixed ante. nullopt if it needs rho >= 1.
std::optional<AlphaRho> solve_ante_branch(double phi, double q, double alpha, const SolverConfig& config,
                                          int& attempts);

// Intersection point with equalizing reward at a fixed sample size.
std::optional<FixedNPoint> solve_n_branch(const HypothesisSpec& spec, double n, double alpha,
                                          const SolverConfig& config, int& attempts);

// Search range for the sample size when nothing bounds it.
inline constexpr double kUnboundedN = 1e7;
// Relative ante shortfall accepted when locating where the ante levels off.
inline constexpr double kPlateauTol = 1e-12;

struct BestN {
    double n = 0.0;
    FixedNPoint point;
    bool at_bound = false;  // the sample-size bound binds
};

// Smallest sample size in (0, n_max] whose intersection ante matches the best one.
std::optional<BestN> best_n(const HypothesisSpec& spec, double n_max, double alpha, const SolverConfig& config,
                            int& attempts);

// alpha_j with 1/alpha_j - 1/rho(alpha_j, n) = 1/phi.
double level_alpha(double phi, const HypothesisSpec& spec, double n);

// True when the equalizing reward never reaches the caps (q <= alpha).
bool caps_slack(double q, double alpha);

// Checks the solution contract; returns an empty string when all invariants hold.
std::string verify(const CaeroSolution& s, const HypothesisSpec& spec, const StepLimits& limits,
                   const SolverConfig& config, bool psi_on_caps);

}  // namespace caero::detail
