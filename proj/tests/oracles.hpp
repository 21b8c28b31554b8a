#pragma once

// Reference computations kept independent of the library's numerics.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

namespace oracle {

// erf by its Maclaurin series, long double, |x| <= 3.
inline long double erf_series(long double x) {
    long double term = x;
    long double sum = x;
    const long double x2 = x * x;
    for (int k = 1; k < 200; ++k) {
        term *= -x2 / k;
        const long double add = term / (2 * k + 1);
        sum += add;
        if (std::fabs(add) < 1e-30L) break;
    }
    return 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
}

// erfc by its continued fraction (modified Lentz), x >= 2.
inline long double erfc_cf(long double x) {
    const long double tiny = 1e-300L;
    long double f = x;
    long double c = x;
    long double d = 0.0L;
    for (int k = 1; k < 5000; ++k) {
        const long double a = k * 0.5L;
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0L) < 1e-22L) break;
    }
    return std::exp(-x * x) / std::sqrt(3.14159265358979323846264338327950288L) / f;
}

inline double phi_cdf(double x) {
    const long double t = static_cast<long double>(x) / std::sqrt(2.0L);
    if (t >= 2.0L) return static_cast<double>(1.0L - 0.5L * erfc_cf(t));
    if (t <= -2.0L) return static_cast<double>(0.5L * erfc_cf(-t));
    return static_cast<double>(0.5L * (1.0L + erf_series(t)));
}

// Upper tail 1 - Phi(x) without cancellation for large x.
inline double phi_sf(double x) {
    const long double t = static_cast<long double>(x) / std::sqrt(2.0L);
    if (t >= 2.0L) return static_cast<double>(0.5L * erfc_cf(t));
    return static_cast<double>(1.0L - phi_cdf(x));
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double quantile(double p) {
    return bisect([p](double x) { return phi_cdf(x) - p; }, -40.0, 40.0);
}

// Power of the one-sided z-test evaluated from the oracle CDF.
inline double power(double alpha_j, double theta_bar, double sigma, double n) {
    const double z = bisect([alpha_j](double x) { return phi_sf(x) - alpha_j; }, -40.0, 40.0);
    return phi_cdf(theta_bar * std::sqrt(n) / sigma - z);
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const char* base = std::getenv("CAERO_TEST_TMP");
    std::filesystem::path p = base ? base : std::filesystem::temp_directory_path() / "caero-tests";
    p /= name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace oracle

namespace oracle {

// Largest ante at fixed n for which psi on the cap intersection can equalize, scanning
// the critical value z with alpha_j = 1 - Phi(z).
inline double max_ante_at_n(double q, double theta_bar, double sigma, double n, double alpha) {
    const double shift = theta_bar * std::sqrt(n) / sigma;
    auto surplus = [&](double z, double* phi_out) {
        const double a = phi_sf(z);
        const double rho = phi_cdf(shift - z);
        if (!(rho > a)) return -1.0;
        const double phi = a * rho / (rho - a);
        if (phi_out) *phi_out = phi;
        return (phi / rho + alpha) * (q * a + (1.0 - q) * rho) - phi;
    };
    // Larger z means smaller alpha_j and smaller ante; walk down from z = 37.
    const int steps = 400;
    double z_ok = 37.0;
    if (surplus(z_ok, nullptr) < 0.0) return 0.0;
    double z_bad = z_ok;
    for (int i = 1; i <= steps; ++i) {
        const double z = 37.0 - 40.0 * i / steps;
        if (surplus(z, nullptr) < 0.0) {
            z_bad = z;
            break;
        }
        z_ok = z;
        z_bad = z;
    }
    if (z_bad == z_ok) {
        double phi = 0.0;
        surplus(z_ok, &phi);
        return phi;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (z_ok + z_bad);
        if (surplus(mid, nullptr) >= 0.0) z_ok = mid;
        else z_bad = mid;
    }
    double phi = 0.0;
    surplus(z_ok, &phi);
    return phi;
}

// Best achievable ante over n in (0, n_max], capped at ante_cap.
inline double best_ante(double q, double theta_bar, double sigma, double n_max, double alpha, double ante_cap) {
    const double top = std::isfinite(n_max) ? n_max : 1e6;
    auto f = [&](double log_n) {
        return std::min(max_ante_at_n(q, theta_bar, sigma, std::exp(log_n), alpha), ante_cap);
    };
    const double lo = std::log(1e-3), hi = std::log(top);
    const int grid = 120;
    int best = grid;
    double best_v = f(hi);
    for (int i = 0; i < grid; ++i) {
        const double v = f(lo + (hi - lo) * i / grid);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    if (best_v >= ante_cap) return ante_cap;
    double a = lo + (hi - lo) * std::max(best - 1, 0) / grid;
    double b = std::min(lo + (hi - lo) * (best + 1) / grid, hi);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 80; ++i) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) < f(d)) a = c;
        else b = d;
    }
    return std::max(best_v, f(0.5 * (a + b)));
}

}  // namespace oracle
