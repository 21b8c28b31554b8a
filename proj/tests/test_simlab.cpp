#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "caero/error.hpp"
#include "caero/simlab.hpp"

using namespace caero;

namespace {

SimConfig base_config() {
    SimConfig c;
    c.m = 1000;
    c.n_iter = 10;
    c.threads = 1;
    c.prior.q = 0.9;
    return c;
}

SimConfig fixed_n(const std::string& policy, double n) {
    SimConfig c = base_config();
    c.policy.name = policy;
    c.n_rule = {NRule::Kind::fixed, n};
    return c;
}

}  // namespace

TEST(Stream, DeterministicPerIteration) {
    const auto c = base_config();
    const auto a = generate_stream(c, 3);
    const auto b = generate_stream(c, 3);
    ASSERT_EQ(a.items.size(), 1000u);
    for (std::size_t j = 0; j < a.items.size(); ++j) {
        EXPECT_EQ(a.items[j].null_true, b.items[j].null_true);
        EXPECT_EQ(a.items[j].sample_seed, b.items[j].sample_seed);
    }
    EXPECT_EQ(a.samples(17, 50), b.samples(17, 50));
    EXPECT_NE(generate_stream(c, 4).items[0].sample_seed, a.items[0].sample_seed);
}

TEST(Stream, PrefixOfSamplesIsStable) {
    const auto s = generate_stream(base_config(), 0);
    const auto ten = s.samples(5, 10);
    const auto thousand = s.samples(5, 1000);
    EXPECT_TRUE(std::equal(ten.begin(), ten.end(), thousand.begin()));
}

TEST(Stream, AlternativeCountMatchesBinomialMean) {
    const auto c = base_config();
    double total = 0.0;
    const int iters = 40;
    for (int i = 0; i < iters; ++i) {
        const auto s = generate_stream(c, i);
        for (const auto& it : s.items) total += it.null_true ? 0.0 : 1.0;
    }
    const double mean = total / iters;
    EXPECT_NEAR(mean, 100.0, 3.0 * std::sqrt(90.0 / iters));
}

TEST(Stream, AlternativeSamplesHaveShiftedMean) {
    const auto s = generate_stream(base_config(), 1);
    double alt = 0.0, null = 0.0;
    int na = 0, nn = 0;
    for (std::size_t j = 0; j < 200; ++j) {
        const auto x = s.samples(j, 100);
        double m = 0.0;
        for (double v : x) m += v;
        m /= 100.0;
        if (s.items[j].null_true) {
            null += m;
            ++nn;
        } else {
            alt += m;
            ++na;
        }
    }
    EXPECT_NEAR(null / nn, 0.0, 0.05);
    EXPECT_NEAR(alt / na, 2.0, 0.1);
}

TEST(Stream, BetaPriorMean) {
    auto c = base_config();
    c.prior = {PriorModel::Kind::beta, 0.9, 90};
    const auto s = generate_stream(c, 0);
    double sum = 0.0;
    for (const auto& it : s.items) sum += it.spec.q;
    // Beta(90, 10) has standard deviation 0.0298.
    EXPECT_NEAR(sum / 1000.0, 0.9, 3.0 * 0.0298 / std::sqrt(1000.0));
}

TEST(Run, FixedSampleSizeRespectsBudget) {
    auto c = fixed_n("ero", 10);
    c.prior.q = 0.1;
    const auto r = run_simulation(c);
    for (const auto& rec : r.records) {
        EXPECT_LE(rec.tests, 100u);
        EXPECT_TRUE(rec.budget_conserved);
        EXPECT_EQ(rec.spent + rec.final_w_dollar, 1000.0);
    }
}

TEST(Run, CostAwareConservesBudget) {
    auto c = base_config();
    c.policy.name = "cost-aware";
    c.n_rule = {NRule::Kind::cap, 10};
    for (const auto& rec : run_simulation(c).records) {
        EXPECT_TRUE(rec.budget_conserved);
        EXPECT_GE(rec.final_w_alpha, 0.0);
    }
}

TEST(Run, ReproducibleAcrossThreadCounts) {
    auto c = base_config();
    c.policy.name = "cost-aware";
    c.n_rule = {NRule::Kind::cap, 10};
    const auto one = run_simulation(c);
    c.threads = 3;
    const auto three = run_simulation(c);
    ASSERT_EQ(one.records.size(), three.records.size());
    for (std::size_t i = 0; i < one.records.size(); ++i) {
        EXPECT_EQ(one.records[i].tests, three.records[i].tests);
        EXPECT_EQ(one.records[i].true_rejects, three.records[i].true_rejects);
        EXPECT_EQ(one.records[i].final_w_alpha, three.records[i].final_w_alpha);
    }
    EXPECT_EQ(one.mean_tests, three.mean_tests);
}

TEST(Run, SpendingStopsAtTenTests) {
    auto c = fixed_n("alpha-spending", 1);
    c.policy.scheme = {SchemeKind::constant, 0.1, 1e-3, 200};
    const auto r = run_simulation(c);
    EXPECT_EQ(r.mean_tests, 10.0);
    EXPECT_EQ(r.se_tests, 0.0);
}

TEST(Run, Relative200PerformsTwoHundredTests) {
    auto c = fixed_n("alpha-investing", 1);
    c.policy.scheme = {SchemeKind::relative200, 0.1, 1e-3, 200};
    for (const auto& rec : run_simulation(c).records) EXPECT_EQ(rec.tests, 200u);
}

TEST(Run, UnknownPolicyIsRejected) {
    auto c = fixed_n("lord", 1);
    EXPECT_THROW(run_simulation(c), ValidationError);
    auto u = base_config();
    u.n_rule = {NRule::Kind::unbounded, 0};
    EXPECT_THROW(run_simulation(u), ValidationError);
}

TEST(Aggregate, SingleIterationReportsItsCounts) {
    IterationRecord r;
    r.tests = 12;
    r.rejections = 5;
    r.true_rejects = 4;
    r.false_rejects = 1;
    r.alternatives_tested = 8;
    const auto rep = aggregate(std::span<const IterationRecord>(&r, 1), 0.95);
    EXPECT_EQ(rep.mean_tests, 12.0);
    EXPECT_EQ(rep.mean_true_rejects, 4.0);
    EXPECT_EQ(rep.mean_false_rejects, 1.0);
    EXPECT_DOUBLE_EQ(rep.mfdr, 1.0 / (5.0 + 0.95));
    EXPECT_DOUBLE_EQ(rep.power, 0.5);
}

TEST(Aggregate, DiscardedIterationsAreExcluded) {
    std::vector<IterationRecord> recs(3);
    recs[0].tests = 10;
    recs[1].tests = 20;
    recs[2].tests = 1000;
    recs[2].discarded = true;
    const auto rep = aggregate(recs, 0.95);
    EXPECT_EQ(rep.mean_tests, 15.0);
    EXPECT_EQ(rep.discarded_iterations, 1u);
}

TEST(Sensitivity, UsesSpecifiedPriorWithTrueStream) {
    auto c = base_config();
    c.n_iter = 4;
    c.policy.name = "cost-aware";
    c.policy.solver.a = 1.0;
    c.n_rule = {NRule::Kind::cap, 1};
    const std::vector<double> qs{0.5, 0.9};
    const auto reps = sensitivity_run(c, qs);
    ASSERT_EQ(reps.size(), 2u);
    EXPECT_LT(reps[0].mean_tests, reps[1].mean_tests);
}

TEST(Logistic, Examples) {
    const std::vector<double> at_mid{0.3, 0.5};
    EXPECT_DOUBLE_EQ(estimate_prior_logistic(at_mid, 2.0, 0.4), 0.5);
    const std::vector<double> large{1e3};
    EXPECT_LT(estimate_prior_logistic(large, 2.0, 0.4), 1e-300);
    const std::vector<double> zero{0.0, 0.0};
    const double expected = 1.0 - 1.0 / (1.0 + std::exp(2.0 * std::log10(4.0)));
    EXPECT_NEAR(estimate_prior_logistic(zero, 2.0, std::log10(4.0)), expected, 1e-15);
    EXPECT_NEAR(expected, 0.769257, 1e-6);
    EXPECT_THROW(estimate_prior_logistic({}, 2.0, 0.0), DomainError);
}

TEST(Config, Validation) {
    auto c = base_config();
    c.prior.q = 1.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = base_config();
    c.m = 0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = base_config();
    c.specified_q = 0.0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(ParallelFor, PropagatesErrors) {
    EXPECT_THROW(parallel_for(8, 2, [](std::size_t i) {
                     if (i == 5) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}
