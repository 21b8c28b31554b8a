#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "caero/error.hpp"
#include "caero/gauss.hpp"
#include "oracles.hpp"

using namespace caero;
using namespace caero::gauss;

TEST(NormalCdf, MatchesSeriesOracle) {
    for (double x = -8.0; x <= 8.0; x += 0.0625) {
        EXPECT_NEAR(normal_cdf(x), oracle::phi_cdf(x), 1e-12) << x;
    }
}

TEST(NormalCdf, SymmetryAndMidpoint) {
    EXPECT_EQ(normal_cdf(0.0), 0.5);
    for (double x = 0.0; x <= 8.0; x += 0.01) {
        EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-12);
    }
}

TEST(NormalCdf, NinetyFifthPercentile) {
    EXPECT_NEAR(normal_cdf(1.6448536269514722), 0.95, 1e-9);
}

TEST(NormalCdf, MonotoneAndBounded) {
    double prev = 0.0;
    for (double x = -40.0; x <= 40.0; x += 0.05) {
        const double v = normal_cdf(x);
        EXPECT_GE(v, prev);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        prev = v;
    }
}

TEST(NormalCdf, RejectsNonFinite) {
    EXPECT_THROW(normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
    EXPECT_THROW(normal_cdf(std::numeric_limits<double>::infinity()), DomainError);
    EXPECT_THROW(normal_sf(-std::numeric_limits<double>::infinity()), DomainError);
}

TEST(NormalSf, UpperTailRelativeAccuracy) {
    for (double x = 2.0; x <= 30.0; x += 0.5) {
        const double ref = oracle::phi_sf(x);
        EXPECT_NEAR(normal_sf(x) / ref, 1.0, 1e-12) << x;
    }
}

TEST(NormalQuantile, KnownValues) {
    EXPECT_EQ(normal_quantile(0.5), 0.0);
    EXPECT_NEAR(normal_quantile(0.95), oracle::quantile(0.95), 1e-8);
    EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-8);
}

TEST(NormalQuantile, Symmetry) {
    for (double p = 1e-300; p < 0.5; p *= 1.7) {
        EXPECT_NEAR(normal_quantile(p), -upper_quantile(p), 1e-12 * std::max(1.0, std::abs(normal_quantile(p))));
    }
}

TEST(NormalQuantile, RoundTrips) {
    // Each tail is inverted through the function that stores it without cancellation.
    for (double x = -8.0; x <= 8.0; x += 0.01) {
        const double back = x <= 0.0 ? normal_quantile(normal_cdf(x)) : upper_quantile(normal_sf(x));
        EXPECT_NEAR(back, x, 1e-10) << x;
    }
    for (double p = 1e-9; p < 1.0 - 1e-9; p += 1e-3) {
        EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-10) << p;
    }
}

TEST(NormalQuantile, DomainErrors) {
    EXPECT_THROW(normal_quantile(0.0), DomainError);
    EXPECT_THROW(normal_quantile(1.0), DomainError);
    EXPECT_THROW(normal_quantile(-0.2), DomainError);
}

TEST(UpperQuantile, SmallAlphaAgreesWithOracle) {
    for (double a = 1e-14; a < 0.5; a *= 3.0) {
        const double ref = oracle::bisect([a](double x) { return oracle::phi_sf(x) - a; }, -40.0, 40.0);
        EXPECT_NEAR(upper_quantile(a), ref, 1e-9 * std::max(1.0, ref)) << a;
    }
}

TEST(Power, ZeroEffectEqualsLevel) {
    EXPECT_NEAR(power_one_sided({0.05, 0.0, 1.0, 25.0}), 0.05, 1e-15);
}

TEST(Power, DirectEvaluation) {
    const double expected = 1.0 - oracle::phi_cdf(oracle::quantile(0.95) - 4.0);
    EXPECT_NEAR(power_one_sided({0.05, 2.0, 1.0, 4.0}), expected, 1e-12);
}

TEST(Power, ApproachesOneMonotonically) {
    double prev = 0.0;
    for (double n = 0.01; n < 100.0; n *= 1.3) {
        const double r = power_one_sided({0.05, 2.0, 1.0, n});
        EXPECT_GE(r, prev);
        if (r < 1.0 - 1e-12) EXPECT_GT(r, prev);
        prev = r;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(Power, MonotoneInNAndAlphaForRandomDraws) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> la(std::log(1e-6), std::log(0.5));
    std::uniform_real_distribution<double> th(0.05, 3.0);
    std::uniform_real_distribution<double> sg(0.2, 3.0);
    for (int draw = 0; draw < 50; ++draw) {
        const double a = std::exp(la(rng)), t = th(rng), s = sg(rng);
        double prev = -1.0;
        for (int i = 1; i <= 100; ++i) {
            const double r = power_one_sided({a, t, s, 0.1 * i});
            EXPECT_GE(r, prev);
            if (r < 1.0 - 1e-12) {
                EXPECT_GT(r, prev);
            }
            prev = r;
        }
        EXPECT_LE(power_one_sided({a, t, s, 5.0}), power_one_sided({std::min(0.9, a * 1.5), t, s, 5.0}));
    }
}

TEST(Power, AlphaDerivativeMatchesFiniteDifference) {
    for (double a : {1e-6, 1e-4, 0.01, 0.05, 0.2}) {
        for (double n : {0.5, 3.0, 20.0}) {
            // Away from saturation, where the difference quotient keeps its digits.
            if (power_one_sided({a, 2.0, 1.0, n}) > 0.99) continue;
            const double h = a * 1e-6;
            const double fd =
                (power_one_sided({a + h, 2.0, 1.0, n}) - power_one_sided({a - h, 2.0, 1.0, n})) / (2.0 * h);
            EXPECT_NEAR(power_alpha_derivative({a, 2.0, 1.0, n}) / fd, 1.0, 1e-5);
        }
    }
}

TEST(SampleSize, ClosedFormMatchesGridSearch) {
    const double n = sample_size_for_power(0.05, 0.9, 2.0, 1.0);
    const double z = oracle::quantile(0.95) + oracle::quantile(0.9);
    EXPECT_NEAR(n, z * z / 4.0, 1e-10);
    // Coarse grid, then bisection, on the oracle power curve.
    double lo = 0.0;
    for (double m = 0.0; m < 10.0; m += 0.01) {
        if (oracle::power(0.05, 2.0, 1.0, m) < 0.9) lo = m;
    }
    const double grid = oracle::bisect([](double m) { return oracle::power(0.05, 2.0, 1.0, m) - 0.9; }, lo, lo + 0.01);
    EXPECT_NEAR(n, grid, 1e-9);
}

TEST(SampleSize, RoundTripsThroughPower) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> la(std::log(1e-8), std::log(0.3));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double a = std::exp(la(rng));
        const double rho = a + (1.0 - a) * (0.02 + 0.97 * u(rng));
        const double t = 0.1 + 3.0 * u(rng), s = 0.3 + 2.0 * u(rng);
        const double n = sample_size_for_power(a, rho, t, s);
        EXPECT_NEAR(power_one_sided({a, t, s, n}), rho, 1e-9);
        // And the other way round, relative in n.
        const double r2 = power_one_sided({a, t, s, n});
        EXPECT_NEAR(sample_size_for_power(a, r2, t, s) / n, 1.0, 1e-9);
    }
}

TEST(SampleSize, InfeasibleInputs) {
    EXPECT_THROW(sample_size_for_power(0.05, 0.05, 2.0, 1.0), InfeasibleError);
    EXPECT_THROW(sample_size_for_power(0.05, 0.01, 2.0, 1.0), InfeasibleError);
    EXPECT_THROW(sample_size_for_power(0.05, 0.9, 0.0, 1.0), InfeasibleError);
}

TEST(ZTest, SamplesAtNullMean) {
    const std::vector<double> xs(7, 1.5);
    const auto r = z_test_one_sided(xs, 1.5, 2.0);
    EXPECT_EQ(r.z, 0.0);
    EXPECT_EQ(r.p_value, 0.5);
}

TEST(ZTest, HandEvaluation) {
    const std::vector<double> xs{2, 2, 2, 2};
    const auto r = z_test_one_sided(xs, 0.0, 1.0);
    EXPECT_NEAR(r.z, 4.0, 1e-15);
    EXPECT_NEAR(r.p_value, oracle::phi_sf(4.0), 1e-15);
}

TEST(ZTest, DoublingNScalesZBySqrtTwo) {
    const std::vector<double> a{0.3, 0.7, 0.5};
    std::vector<double> b = a;
    b.insert(b.end(), a.begin(), a.end());
    EXPECT_NEAR(z_test_one_sided(b, 0.0, 1.0).z / z_test_one_sided(a, 0.0, 1.0).z, std::sqrt(2.0), 1e-12);
}

TEST(ZTest, EmptyIsDomainError) {
    EXPECT_THROW(z_test_one_sided({}, 0.0, 1.0), DomainError);
}
