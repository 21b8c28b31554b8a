#include "caero/gauss.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "caero/error.hpp"

namespace caero::gauss {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be finite");
    }
}

void require_open_unit(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(what) + " must lie in (0, 1), got " + std::to_string(p));
    }
}

}  // namespace

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    require_finite(x, "normal_cdf argument");
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_sf(double x) {
    require_finite(x, "normal_sf argument");
    return 0.5 * std::erfc(x * kInvSqrt2);
}

double normal_quantile(double p) {
    require_open_unit(p, "p");
    // erfc_inv keeps full relative precision for the tail closest to zero.
    if (p < 0.5) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

double upper_quantile(double alpha) {
    require_open_unit(alpha, "alpha");
    if (alpha <= 0.5) return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * alpha);
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - alpha));
}

namespace {

void validate(const PowerQuery& q) {
    require_open_unit(q.alpha_j, "alpha_j");
    require_finite(q.theta_bar, "theta_bar");
    require_finite(q.n, "n");
    if (!(q.sigma > 0.0) || !std::isfinite(q.sigma)) throw DomainError("sigma must be positive");
    if (q.n < 0.0) throw DomainError("n must be non-negative");
}

}  // namespace

double power_one_sided(const PowerQuery& q) {
    validate(q);
    const double shift = q.theta_bar * std::sqrt(q.n) / q.sigma;
    return normal_cdf(shift - upper_quantile(q.alpha_j));
}

double power_alpha_derivative(const PowerQuery& q) {
    validate(q);
    const double z = upper_quantile(q.alpha_j);
    const double shift = q.theta_bar * std::sqrt(q.n) / q.sigma;
    return normal_pdf(shift - z) / normal_pdf(z);
}

double sample_size_for_power(double alpha_j, double rho, double theta_bar, double sigma) {
    require_open_unit(alpha_j, "alpha_j");
    require_open_unit(rho, "rho");
    require_finite(theta_bar, "theta_bar");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
    if (theta_bar <= 0.0) throw InfeasibleError("theta_bar must be positive for power to exceed alpha_j");
    if (rho <= alpha_j) throw InfeasibleError("rho must exceed alpha_j");
    const double root = (upper_quantile(alpha_j) + normal_quantile(rho)) * sigma / theta_bar;
    return root * root;
}

ZTestResult z_test_one_sided(std::span<const double> samples, double mu0, double sigma) {
    if (samples.empty()) throw DomainError("z-test needs at least one sample");
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    double sum = 0.0;
    for (double x : samples) sum += x;
    const double n = static_cast<double>(samples.size());
    const double mean = sum / n;
    ZTestResult r;
    r.z = (mean - mu0) * std::sqrt(n) / sigma;
    r.p_value = normal_sf(r.z);
    return r;
}

}  // namespace caero::gauss
