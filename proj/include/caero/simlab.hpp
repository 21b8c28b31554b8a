#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caero/ledger.hpp"
#include "caero/policies.hpp"
#include "caero/solver.hpp"

namespace caero {

struct PriorModel {
    enum class Kind { fixed, beta };
    Kind kind = Kind::fixed;
    double q = 0.9;      // fixed prior
    double beta_a = 90;  // Beta(beta_a, 100 - beta_a)
};

struct NRule {
    enum class Kind { fixed, cap, unbounded };
    Kind kind = Kind::fixed;
    double n = 1.0;
};

struct PolicyConfig {
    std::string name = "ero";  // alpha-spending | alpha-investing | ero | cost-aware
    SpendingScheme scheme;
    SolverConfig solver;
    std::size_t horizon = 1;
    std::optional<double> skip_above_n;
};

struct SimConfig {
    std::size_t m = 1000;
    std::size_t n_iter = 10000;
    PriorModel prior;
    double theta_alt = 2.0;
    double sigma = 1.0;
    double cost = 1.0;
    double alpha = 0.05;
    double eta = 0.95;
    double budget = 1000.0;
    PolicyConfig policy;
    NRule n_rule;
    std::optional<double> specified_q;
    std::uint64_t seed_base = 0;
    std::size_t samples_per_hypothesis = 1000;
    std::size_t lookahead_extra = 4;
    std::size_t threads = 0;  // 0 picks hardware concurrency

    void validate() const;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& policy, const NRule& n_rule);

struct StreamItem {
    HypothesisSpec spec;  // q holds the true prior
    bool null_true = true;
    double theta = 0.0;
    std::uint64_t sample_seed = 0;
};

struct Stream {
    std::vector<StreamItem> items;
    std::vector<double> extra_q;  // priors beyond the last item, for lookahead
    std::size_t samples_per_hypothesis = 1000;

    // First n of the hypothesis's pre-determined draws.
    std::vector<double> samples(std::size_t j, std::size_t n) const;
};

Stream generate_stream(const SimConfig& config, std::size_t iteration);

struct IterationRecord {
    std::size_t iteration = 0;
    std::size_t tests = 0;
    std::size_t rejections = 0;
    std::size_t true_rejects = 0;
    std::size_t false_rejects = 0;
    std::size_t alternatives_tested = 0;
    std::size_t solver_failures = 0;
    std::size_t skips = 0;
    double samples = 0.0;
    double spent = 0.0;
    double final_w_alpha = 0.0;
    double final_w_dollar = 0.0;
    bool budget_conserved = true;
    bool discarded = false;
};

// Source of the observations for the hypothesis at position j.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::size_t available(std::size_t j) const = 0;
    virtual std::vector<double> draw(std::size_t j, std::size_t n) const = 0;
};

IterationRecord run_policy_on_stream(const Policy& policy, const Stream& stream, WealthState wealth,
                                     const SimConfig& config);

// Latent truth per hypothesis: 1 null, 0 alternative, -1 unknown (real data).
using Truth = signed char;

// Generic loop used by both the synthetic and the dataset runners.
IterationRecord run_sequence(const Policy& policy, std::span<const HypothesisSpec> specs,
                             std::span<const HypothesisSpec> lookahead_tail, std::span<const Truth> truth,
                             const SampleSource& source, WealthState wealth);

struct AggregateReport {
    std::string label;
    double mean_tests = 0.0;
    double mean_rejections = 0.0;
    double mean_true_rejects = 0.0;
    double mean_false_rejects = 0.0;
    double mfdr = 0.0;
    double se_tests = 0.0;
    double se_true_rejects = 0.0;
    double mean_samples_per_test = 0.0;
    double mean_spent = 0.0;
    double power = 0.0;  // true rejects per alternative tested
    std::size_t discarded_iterations = 0;
    std::size_t iterations = 0;
    std::vector<IterationRecord> records;
};

AggregateReport aggregate(std::span<const IterationRecord> records, double eta);

AggregateReport run_simulation(const SimConfig& config);

// Runs several policies over the same streams.
std::vector<AggregateReport> run_comparison(const SimConfig& config, std::span<const PolicyConfig> policies,
                                            std::span<const std::string> labels = {});

// One report per specified prior; truths come from config.prior.
std::vector<AggregateReport> sensitivity_run(const SimConfig& config, std::span<const double> specified_q);

double estimate_prior_logistic(std::span<const double> prior_samples, double beta_slope, double x0);

// Calls fn(i) for i in [0, count) on a worker pool; results must be stored by index.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace caero
