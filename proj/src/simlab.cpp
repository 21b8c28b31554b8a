#include "caero/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <mutex>
#include <thread>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "caero/error.hpp"
#include "caero/gauss.hpp"

namespace caero {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

void SimConfig::validate() const {
    if (m == 0) throw ValidationError("m must be positive");
    if (n_iter == 0) throw ValidationError("n_iter must be positive");
    if (prior.kind == PriorModel::Kind::fixed && !(prior.q > 0.0 && prior.q < 1.0)) {
        throw ValidationError("fixed prior must lie in (0, 1)");
    }
    if (prior.kind == PriorModel::Kind::beta && !(prior.beta_a > 0.0 && prior.beta_a < 100.0)) {
        throw ValidationError("beta prior parameter must lie in (0, 100)");
    }
    if (!(sigma > 0.0) || !(cost > 0.0)) throw ValidationError("sigma and cost must be positive");
    if (!(alpha > 0.0 && alpha < 1.0) || !(eta > 0.0 && eta <= 1.0)) throw ValidationError("alpha or eta out of range");
    if (!(budget >= 0.0)) throw ValidationError("budget must be non-negative");
    if (n_rule.kind != NRule::Kind::unbounded && !(n_rule.n > 0.0)) throw ValidationError("n_rule needs positive n");
    if (specified_q && !(*specified_q > 0.0 && *specified_q < 1.0)) throw ValidationError("specified_q must lie in (0, 1)");
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& policy, const NRule& n_rule) {
    if (policy.name == "cost-aware") {
        SolverConfig cfg = policy.solver;
        if (n_rule.kind != NRule::Kind::unbounded) cfg.n_cap = n_rule.n;
        return std::make_unique<CostAwarePolicy>(cfg, policy.horizon, policy.skip_above_n);
    }
    if (n_rule.kind == NRule::Kind::unbounded) throw ValidationError("baseline policies need a fixed sample size");
    SchemePolicy::Rule rule;
    if (policy.name == "alpha-spending") rule = SchemePolicy::Rule::spending;
    else if (policy.name == "alpha-investing") rule = SchemePolicy::Rule::investing;
    else if (policy.name == "ero") rule = SchemePolicy::Rule::ero;
    else throw ValidationError("unknown policy '" + policy.name + "'");
    return std::make_unique<SchemePolicy>(rule, policy.scheme, n_rule.n);
}

std::vector<double> Stream::samples(std::size_t j, std::size_t n) const {
    const StreamItem& it = items.at(j);
    boost::random::mt19937_64 rng(it.sample_seed);
    boost::random::normal_distribution<double> dist(it.theta, it.spec.sigma);
    std::vector<double> out(n);
    for (auto& x : out) x = dist(rng);
    return out;
}

Stream generate_stream(const SimConfig& config, std::size_t iteration) {
    const std::uint64_t seed = config.seed_base + iteration;
    boost::random::mt19937_64 rng(seed);
    boost::random::uniform_01<double> unif;
    auto draw_q = [&]() {
        if (config.prior.kind == PriorModel::Kind::fixed) return config.prior.q;
        boost::random::beta_distribution<double> beta(config.prior.beta_a, 100.0 - config.prior.beta_a);
        const double q = beta(rng);
        // Keep the prior strictly inside (0, 1) for the validators.
        return std::clamp(q, 1e-12, 1.0 - 1e-12);
    };
    Stream s;
    s.samples_per_hypothesis = config.samples_per_hypothesis;
    s.items.reserve(config.m);
    const std::uint64_t stream_key = splitmix64(seed);
    for (std::size_t j = 0; j < config.m; ++j) {
        StreamItem it;
        it.spec.q = draw_q();
        it.spec.theta_bar = config.theta_alt;
        it.spec.sigma = config.sigma;
        it.spec.cost = config.cost;
        it.null_true = unif(rng) < it.spec.q;
        it.theta = it.null_true ? 0.0 : config.theta_alt;
        it.sample_seed = splitmix64(stream_key ^ splitmix64(j));
        s.items.push_back(it);
    }
    for (std::size_t k = 0; k < config.lookahead_extra; ++k) s.extra_q.push_back(draw_q());
    return s;
}

namespace {

class StreamSource : public SampleSource {
public:
    explicit StreamSource(const Stream& s) : s_(s) {}
    std::size_t available(std::size_t) const override { return s_.samples_per_hypothesis; }
    std::vector<double> draw(std::size_t j, std::size_t n) const override { return s_.samples(j, n); }

private:
    const Stream& s_;
};

}  // namespace

IterationRecord run_sequence(const Policy& policy, std::span<const HypothesisSpec> specs,
                             std::span<const HypothesisSpec> lookahead_tail, std::span<const Truth> truth,
                             const SampleSource& source, WealthState wealth) {
    IterationRecord rec;
    wealth.set_record_history(false);
    const double budget = wealth.w_dollar();
    std::vector<HypothesisSpec> upcoming;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        const HypothesisSpec& spec = specs[j];
        // Alpha-wealth stopping belongs to the policy; relative200 tests past the threshold.
        if (wealth.w_dollar() < spec.cost) break;
        upcoming.clear();
        for (std::size_t k = 1; k <= policy.lookahead(); ++k) {
            const std::size_t idx = j + k;
            if (idx < specs.size()) upcoming.push_back(specs[idx]);
            else if (idx - specs.size() < lookahead_tail.size()) upcoming.push_back(lookahead_tail[idx - specs.size()]);
        }
        const Decision d = policy.decide(wealth, spec, upcoming);
        if (d.action == Decision::Action::stop) break;
        if (d.action == Decision::Action::skip) {
            ++rec.skips;
            if (d.solver_failure) ++rec.solver_failures;
            continue;
        }
        const double n_real = d.params.n;
        const auto n = static_cast<std::size_t>(std::llround(n_real));
        if (std::abs(n_real - static_cast<double>(n)) > 1e-9 || n == 0 || n > source.available(j)) {
            ++rec.skips;
            continue;
        }
        const std::vector<double> x = source.draw(j, n);
        const gauss::ZTestResult z = gauss::z_test_one_sided(x, spec.mu0, spec.sigma);
        Outcome out;
        out.p_value = z.p_value;
        out.rejected = z.p_value <= d.params.alpha_j;
        if (truth[j] >= 0) out.null_true = truth[j] == 1;
        wealth.apply(spec, d.params, out);
        ++rec.tests;
        rec.samples += n_real;
        rec.spent += n_real * spec.cost;
        if (out.null_true && !*out.null_true) ++rec.alternatives_tested;
        if (out.rejected) {
            ++rec.rejections;
            if (out.null_true) {
                if (*out.null_true) ++rec.false_rejects;
                else ++rec.true_rejects;
            }
        }
    }
    rec.final_w_alpha = wealth.w_alpha();
    rec.final_w_dollar = wealth.w_dollar();
    rec.budget_conserved = rec.spent + rec.final_w_dollar == budget;
    rec.discarded = rec.solver_failures > 0;
    return rec;
}

IterationRecord run_policy_on_stream(const Policy& policy, const Stream& stream, WealthState wealth,
                                     const SimConfig& config) {
    std::vector<HypothesisSpec> specs;
    std::vector<Truth> truth;
    specs.reserve(stream.items.size());
    truth.reserve(stream.items.size());
    for (const auto& it : stream.items) {
        HypothesisSpec s = it.spec;
        if (config.specified_q) s.q = *config.specified_q;
        specs.push_back(s);
        truth.push_back(it.null_true ? Truth{1} : Truth{0});
    }
    std::vector<HypothesisSpec> tail;
    for (double q : stream.extra_q) {
        HypothesisSpec s = specs.empty() ? HypothesisSpec{} : specs.back();
        s.q = config.specified_q ? *config.specified_q : q;
        tail.push_back(s);
    }
    return run_sequence(policy, specs, tail, truth, StreamSource(stream), std::move(wealth));
}

AggregateReport aggregate(std::span<const IterationRecord> records, double eta) {
    AggregateReport r;
    r.records.assign(records.begin(), records.end());
    r.iterations = records.size();
    double tests = 0, rej = 0, tr = 0, fr = 0, tests2 = 0, tr2 = 0, samples = 0, spent = 0, alts = 0;
    std::size_t kept = 0;
    for (const auto& rec : records) {
        if (rec.discarded) {
            ++r.discarded_iterations;
            continue;
        }
        ++kept;
        tests += rec.tests;
        tests2 += static_cast<double>(rec.tests) * rec.tests;
        rej += rec.rejections;
        tr += rec.true_rejects;
        tr2 += static_cast<double>(rec.true_rejects) * rec.true_rejects;
        fr += rec.false_rejects;
        samples += rec.samples;
        spent += rec.spent;
        alts += rec.alternatives_tested;
    }
    if (kept == 0) return r;
    const double k = static_cast<double>(kept);
    r.mean_tests = tests / k;
    r.mean_rejections = rej / k;
    r.mean_true_rejects = tr / k;
    r.mean_false_rejects = fr / k;
    r.mfdr = mfdr_estimate(r.mean_false_rejects, r.mean_true_rejects + r.mean_false_rejects, eta);
    if (kept > 1) {
        r.se_tests = std::sqrt(std::max(0.0, (tests2 / k - r.mean_tests * r.mean_tests) / (k - 1.0)));
        r.se_true_rejects = std::sqrt(std::max(0.0, (tr2 / k - r.mean_true_rejects * r.mean_true_rejects) / (k - 1.0)));
    }
    r.mean_samples_per_test = tests > 0 ? samples / tests : 0.0;
    r.mean_spent = spent / k;
    r.power = alts > 0 ? tr / alts : 0.0;
    return r;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::vector<AggregateReport> run_comparison(const SimConfig& config, std::span<const PolicyConfig> policies,
                                            std::span<const std::string> labels) {
    config.validate();
    std::vector<std::unique_ptr<Policy>> built;
    for (const auto& p : policies) built.push_back(make_policy(p, config.n_rule));
    std::vector<std::vector<IterationRecord>> recs(policies.size(), std::vector<IterationRecord>(config.n_iter));
    parallel_for(config.n_iter, config.threads, [&](std::size_t i) {
        const Stream stream = generate_stream(config, i);
        for (std::size_t k = 0; k < built.size(); ++k) {
            IterationRecord r = run_policy_on_stream(*built[k], stream,
                                                     WealthState::init(config.alpha, config.eta, config.budget), config);
            r.iteration = i;
            recs[k][i] = r;
        }
    });
    std::vector<AggregateReport> out;
    for (std::size_t k = 0; k < policies.size(); ++k) {
        AggregateReport r = aggregate(recs[k], config.eta);
        r.label = k < labels.size() ? labels[k] : built[k]->name();
        out.push_back(std::move(r));
    }
    return out;
}

AggregateReport run_simulation(const SimConfig& config) {
    const PolicyConfig p = config.policy;
    return run_comparison(config, std::span<const PolicyConfig>(&p, 1)).front();
}

std::vector<AggregateReport> sensitivity_run(const SimConfig& config, std::span<const double> specified_q) {
    config.validate();
    auto policy = make_policy(config.policy, config.n_rule);
    std::vector<std::vector<IterationRecord>> recs(specified_q.size(), std::vector<IterationRecord>(config.n_iter));
    parallel_for(config.n_iter, config.threads, [&](std::size_t i) {
        const Stream stream = generate_stream(config, i);
        for (std::size_t k = 0; k < specified_q.size(); ++k) {
            SimConfig c = config;
            c.specified_q = specified_q[k];
            IterationRecord r =
                run_policy_on_stream(*policy, stream, WealthState::init(c.alpha, c.eta, c.budget), c);
            r.iteration = i;
            recs[k][i] = r;
        }
    });
    std::vector<AggregateReport> out;
    for (std::size_t k = 0; k < specified_q.size(); ++k) {
        AggregateReport r = aggregate(recs[k], config.eta);
        r.label = "specified q=" + std::to_string(specified_q[k]);
        out.push_back(std::move(r));
    }
    return out;
}

double estimate_prior_logistic(std::span<const double> prior_samples, double beta_slope, double x0) {
    if (prior_samples.empty()) throw DomainError("prior estimation needs at least one sample");
    double sum = 0.0;
    for (double x : prior_samples) sum += x;
    const double mean = sum / static_cast<double>(prior_samples.size());
    return 1.0 - 1.0 / (1.0 + std::exp(-beta_slope * (mean - x0)));
}

}  // namespace caero
