#pragma once

#include <span>

namespace caero::gauss {

double normal_pdf(double x);
double normal_cdf(double x);
// 1 - Phi(x), accurate in the upper tail.
double normal_sf(double x);
// Phi^{-1}(p) for p in (0, 1).
double normal_quantile(double p);
// z_{1-alpha}, accurate for small alpha.
double upper_quantile(double alpha);

struct PowerQuery {
    double alpha_j = 0.05;
    double theta_bar = 1.0;
    double sigma = 1.0;
    double n = 1.0;
};

// rho = Phi(theta_bar * sqrt(n) / sigma - z_{1-alpha_j})
double power_one_sided(const PowerQuery& q);

// Real-valued n at which the one-sided test reaches power rho.
// Throws InfeasibleError when rho <= alpha_j or theta_bar == 0.
double sample_size_for_power(double alpha_j, double rho, double theta_bar, double sigma);

// d rho / d alpha_j at fixed n.
double power_alpha_derivative(const PowerQuery& q);

struct ZTestResult {
    double z = 0.0;
    double p_value = 1.0;
};

// Upper-tailed test of mean <= mu0 against mean > mu0 with known sigma.
ZTestResult z_test_one_sided(std::span<const double> samples, double mu0, double sigma);

}  // namespace caero::gauss
