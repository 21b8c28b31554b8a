// Exhaustive grid search over (alpha_j, n) for the one-step problem. Shares no
// root-finding code with the analytic solver so the two can check each other.
#include <algorithm>
#include <cmath>
#include <vector>

#include "caero/error.hpp"
#include "caero/gauss.hpp"
#include "caero/solver.hpp"

namespace caero {

namespace {

struct Column {
    double n = 0.0;
    double alpha_j = 0.0;  // boundary where the capped reward stops covering the ante
    double phi = 0.0;      // ante implied by the intersection at that boundary
    bool found = false;
};

class Grid {
public:
    Grid(const HypothesisSpec& spec, double alpha, std::size_t res) : spec_(spec), alpha_(alpha) {
        const double lo = std::log(1e-14), hi = std::log(1.0 - 1e-9);
        for (std::size_t i = 0; i < res; ++i) {
            const double a = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res - 1));
            alphas_.push_back(a);
            z_.push_back(gauss::upper_quantile(a));
        }
    }

    // Expected wealth change with psi on the power cap and phi from the intersection.
    double surplus(double a, double z, double n, double* phi_out = nullptr) const {
        const double rho = gauss::normal_cdf(spec_.theta_bar * std::sqrt(n) / spec_.sigma - z);
        if (!(rho > a)) return -1.0;
        const double phi = a * rho / (rho - a);
        const double psi = phi / rho + alpha_;
        if (phi_out) *phi_out = phi;
        return psi * (spec_.q * a + (1.0 - spec_.q) * rho) - phi;
    }

    Column column(double n) const {
        Column c;
        c.n = n;
        std::size_t last_ok = alphas_.size();
        for (std::size_t i = 0; i < alphas_.size(); ++i) {
            if (surplus(alphas_[i], z_[i], n) >= 0.0) {
                last_ok = i;
            } else if (last_ok != alphas_.size()) {
                break;
            }
        }
        if (last_ok == alphas_.size()) return c;
        double lo = alphas_[last_ok];
        double hi = last_ok + 1 < alphas_.size() ? alphas_[last_ok + 1] : lo;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (surplus(mid, gauss::upper_quantile(mid), n) >= 0.0) lo = mid;
            else hi = mid;
        }
        c.alpha_j = lo;
        c.found = surplus(lo, gauss::upper_quantile(lo), n, &c.phi) >= -1e-300;
        return c;
    }

private:
    HypothesisSpec spec_;
    double alpha_;
    std::vector<double> alphas_;
    std::vector<double> z_;
};

}  // namespace

CaeroSolution brute_force_oracle(const HypothesisSpec& spec, const WealthSnapshot& wealth,
                                 const SolverConfig& config, std::size_t grid_resolution) {
    if (grid_resolution < 100) throw ValidationError("grid_resolution must be at least 100");
    spec.validate();
    CaeroSolution out;
    out.skipped = true;
    const StepLimits limits = step_limits(spec, wealth, config);
    if (spec.q < config.q_min || spec.q > config.q_max || !(limits.ante_cap > 0.0) || !(limits.n_max > 0.0) ||
        !(spec.theta_bar > 0.0)) {
        out.diagnostic = "empty feasible set";
        return out;
    }
    const double cap = limits.ante_cap;
    const double n_top = std::isfinite(limits.n_max) ? limits.n_max : 1e7;
    const double n_bottom = std::min(1e-4, n_top);
    const Grid grid(spec, limits.alpha, grid_resolution);

    auto capped = [&](const Column& c) { return c.found ? std::min(c.phi, cap) : -1.0; };

    std::vector<Column> cols;
    const double lo = std::log(n_bottom), hi = std::log(n_top);
    for (std::size_t j = 0; j < grid_resolution; ++j) {
        const double n = j + 1 == grid_resolution
                             ? n_top
                             : std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(grid_resolution - 1));
        cols.push_back(grid.column(n));
    }
    std::size_t best = cols.size();
    double best_val = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const double v = capped(cols[j]);
        if (v > best_val * (1.0 + 1e-12) || (best == cols.size() && v > 0.0)) {
            best = j;
            best_val = v;
        }
    }
    if (best == cols.size()) {
        out.diagnostic = "empty feasible set";
        return out;
    }
    Column pick = cols[best];
    if (pick.phi >= cap && best > 0 && capped(cols[best - 1]) < cap) {
        // Locate the smallest n whose intersection ante reaches the cap.
        double a = cols[best - 1].n, b = pick.n;
        for (int it = 0; it < 100 && b - a > 1e-12 * b; ++it) {
            const double mid = 0.5 * (a + b);
            const Column c = grid.column(mid);
            if (c.found && c.phi >= cap) b = mid;
            else a = mid;
        }
        pick = grid.column(b);
    }
    if (pick.phi > cap) {
        // Walk the boundary down onto the cap exactly.
        const double b = pick.n;
        double al = 1e-300, ah = pick.alpha_j;
        for (int it = 0; it < 400 && ah - al > 1e-16 * ah; ++it) {
            const double mid = al < 1e-3 * ah ? std::sqrt(al) * std::sqrt(ah) : 0.5 * (al + ah);
            double phi = 0.0;
            grid.surplus(mid, gauss::upper_quantile(mid), b, &phi);
            if (phi < cap) al = mid;
            else ah = mid;
        }
        pick.alpha_j = al;
        grid.surplus(al, gauss::upper_quantile(al), b, &pick.phi);
    }
    TestParams p;
    p.n = pick.n;
    p.alpha_j = pick.alpha_j;
    p.rho = gauss::power_one_sided({p.alpha_j, spec.theta_bar, spec.sigma, p.n});
    p.phi = std::min(pick.phi, cap);
    p.psi = std::min(p.phi / p.rho + limits.alpha, p.phi / rejection_probability(p, spec.q));
    out.params = p;
    out.objective = p.psi * rejection_probability(p, spec.q);
    out.skipped = false;
    out.binding = pick.phi >= cap * (1.0 - 1e-9) ? Binding::alpha_wealth
                  : best + 1 == cols.size()     ? limits.n_binding
                                                : Binding::power_limit;
    out.n_band_lo = p.n;
    out.n_band_hi = limits.n_max;
    return out;
}

}  // namespace caero
