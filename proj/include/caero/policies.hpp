#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "caero/ledger.hpp"

namespace caero {

enum class SchemeKind { constant, relative, relative200 };

struct SpendingScheme {
    SchemeKind kind = SchemeKind::constant;
    double fraction = 0.1;
    double stop_fraction = 1e-3;
    std::size_t horizon = 200;  // relative200 only
};

SchemeKind scheme_kind_from_string(const std::string& s);
std::string to_string(SchemeKind k);

// Ante for the next test, or nullopt when the scheme stops.
std::optional<double> scheme_phi(const SpendingScheme& scheme, const WealthState& state);

TestParams alpha_spending_step(const WealthState& state, double phi, const HypothesisSpec& spec, double n);
TestParams alpha_investing_step(const WealthState& state, double phi, const HypothesisSpec& spec, double n);
// Throws InfeasibleError when no intersection exists.
TestParams ero_step(const WealthState& state, double phi, const HypothesisSpec& spec, double n);

// Residual of the intersection condition at alpha_j for fixed (phi, n).
double ero_residual(double alpha_j, double phi, const HypothesisSpec& spec, double n);

struct Decision {
    enum class Action { test, skip, stop };
    Action action = Action::stop;
    TestParams params;
    bool solver_failure = false;
    std::string note;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    // Number of upcoming specs the policy wants to see beyond the current one.
    virtual std::size_t lookahead() const { return 0; }
    virtual Decision decide(const WealthState& state, const HypothesisSpec& spec,
                            std::span<const HypothesisSpec> upcoming) const = 0;
};

// Fixed-n baselines driven by a spending scheme.
class SchemePolicy : public Policy {
public:
    enum class Rule { spending, investing, ero };

    SchemePolicy(Rule rule, SpendingScheme scheme, double n);

    std::string name() const override;
    Decision decide(const WealthState& state, const HypothesisSpec& spec,
                    std::span<const HypothesisSpec> upcoming) const override;

private:
    Rule rule_;
    SpendingScheme scheme_;
    double n_;
};

}  // namespace caero
