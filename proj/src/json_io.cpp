#include "caero/json_io.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "caero/error.hpp"

namespace caero {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(std::string(what) + ": unknown field '" + key + "'");
    }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
void read_opt(const Json& j, const char* key, std::optional<T>& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (it->is_null()) {
        out.reset();
        return;
    }
    T v{};
    read(j, key, v);
    out = v;
}

template <class T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

// JSON has no infinity; large finite budgets stand in for unbounded ones.
Json number(double x) {
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

}  // namespace

void to_json(Json& j, const HypothesisSpec& v) {
    j = {{"q", v.q}, {"theta_bar", v.theta_bar}, {"sigma", v.sigma}, {"cost", v.cost}, {"mu0", v.mu0}};
}

void from_json(const Json& j, HypothesisSpec& v) {
    check_keys(j, {"q", "theta_bar", "sigma", "cost", "mu0"}, "hypothesis spec");
    read(j, "q", v.q);
    read(j, "theta_bar", v.theta_bar);
    read(j, "sigma", v.sigma);
    read(j, "cost", v.cost);
    read(j, "mu0", v.mu0);
}

void to_json(Json& j, const TestParams& v) {
    j = {{"phi", v.phi}, {"alpha_j", v.alpha_j}, {"psi", v.psi}, {"rho", v.rho}, {"n", v.n}};
}

void from_json(const Json& j, TestParams& v) {
    check_keys(j, {"phi", "alpha_j", "psi", "rho", "n"}, "test params");
    read(j, "phi", v.phi);
    read(j, "alpha_j", v.alpha_j);
    read(j, "psi", v.psi);
    read(j, "rho", v.rho);
    read(j, "n", v.n);
}

void to_json(Json& j, const WealthSnapshot& v) {
    j = {{"w_alpha", v.w_alpha}, {"w_dollar", number(v.w_dollar)}, {"alpha", v.alpha}};
}

void to_json(Json& j, const SpendingScheme& v) {
    j = {{"kind", to_string(v.kind)},
         {"fraction", v.fraction},
         {"stop_fraction", v.stop_fraction},
         {"horizon", v.horizon}};
}

void from_json(const Json& j, SpendingScheme& v) {
    check_keys(j, {"kind", "fraction", "stop_fraction", "horizon"}, "scheme");
    std::string kind = to_string(v.kind);
    read(j, "kind", kind);
    v.kind = scheme_kind_from_string(kind);
    read(j, "fraction", v.fraction);
    read(j, "stop_fraction", v.stop_fraction);
    read(j, "horizon", v.horizon);
}

void to_json(Json& j, const SolverConfig& v) {
    j = {{"a", v.a},
         {"n_cap", opt(v.n_cap)},
         {"init_alpha", v.init_alpha},
         {"init_rho", v.init_rho},
         {"residual_tol", v.residual_tol},
         {"max_restarts", v.max_restarts},
         {"ante_prior_scale", opt(v.ante_prior_scale)},
         {"q_min", v.q_min},
         {"q_max", v.q_max},
         {"band", to_string(v.band)},
         {"restart_seed", v.restart_seed}};
}

void from_json(const Json& j, SolverConfig& v) {
    check_keys(j,
               {"a", "n_cap", "init_alpha", "init_rho", "residual_tol", "max_restarts", "ante_prior_scale", "q_min",
                "q_max", "band", "restart_seed"},
               "solver config");
    read(j, "a", v.a);
    read_opt(j, "n_cap", v.n_cap);
    read(j, "init_alpha", v.init_alpha);
    read(j, "init_rho", v.init_rho);
    read(j, "residual_tol", v.residual_tol);
    read(j, "max_restarts", v.max_restarts);
    read_opt(j, "ante_prior_scale", v.ante_prior_scale);
    read(j, "q_min", v.q_min);
    read(j, "q_max", v.q_max);
    std::string band = to_string(v.band);
    read(j, "band", band);
    v.band = band_selection_from_string(band);
    read(j, "restart_seed", v.restart_seed);
}

void to_json(Json& j, const CaeroSolution& v) {
    j = {{"params", v.params},
         {"objective", v.objective},
         {"binding", to_string(v.binding)},
         {"skipped", v.skipped},
         {"solver_failure", v.solver_failure},
         {"diagnostic", v.diagnostic},
         {"n_band_lo", number(v.n_band_lo)},
         {"n_band_hi", number(v.n_band_hi)},
         {"attempts", v.attempts}};
}

void to_json(Json& j, const PriorModel& v) {
    j = {{"kind", v.kind == PriorModel::Kind::fixed ? "fixed" : "beta"}, {"q", v.q}, {"beta_a", v.beta_a}};
}

void from_json(const Json& j, PriorModel& v) {
    check_keys(j, {"kind", "q", "beta_a"}, "prior");
    std::string kind = v.kind == PriorModel::Kind::fixed ? "fixed" : "beta";
    read(j, "kind", kind);
    if (kind == "fixed") {
        v.kind = PriorModel::Kind::fixed;
    } else if (kind == "beta") {
        v.kind = PriorModel::Kind::beta;
    } else {
        throw ValidationError("prior kind must be fixed or beta, got '" + kind + "'");
    }
    read(j, "q", v.q);
    read(j, "beta_a", v.beta_a);
}

namespace {

const char* n_rule_name(NRule::Kind k) {
    switch (k) {
        case NRule::Kind::fixed: return "fixed";
        case NRule::Kind::cap: return "cap";
        case NRule::Kind::unbounded: return "unbounded";
    }
    return "fixed";
}

}  // namespace

void to_json(Json& j, const NRule& v) {
    j = {{"kind", n_rule_name(v.kind)}, {"n", v.n}};
}

void from_json(const Json& j, NRule& v) {
    check_keys(j, {"kind", "n"}, "n rule");
    std::string kind = n_rule_name(v.kind);
    read(j, "kind", kind);
    if (kind == "fixed") {
        v.kind = NRule::Kind::fixed;
    } else if (kind == "cap") {
        v.kind = NRule::Kind::cap;
    } else if (kind == "unbounded") {
        v.kind = NRule::Kind::unbounded;
    } else {
        throw ValidationError("n rule kind must be fixed, cap or unbounded, got '" + kind + "'");
    }
    read(j, "n", v.n);
}

void to_json(Json& j, const PolicyConfig& v) {
    j = {{"name", v.name},
         {"scheme", v.scheme},
         {"solver", v.solver},
         {"horizon", v.horizon},
         {"skip_above_n", opt(v.skip_above_n)}};
}

void from_json(const Json& j, PolicyConfig& v) {
    check_keys(j, {"name", "scheme", "solver", "horizon", "skip_above_n"}, "policy");
    read(j, "name", v.name);
    read(j, "scheme", v.scheme);
    read(j, "solver", v.solver);
    read(j, "horizon", v.horizon);
    read_opt(j, "skip_above_n", v.skip_above_n);
}

void to_json(Json& j, const SimConfig& v) {
    j = {{"m", v.m},
         {"n_iter", v.n_iter},
         {"prior", v.prior},
         {"theta_alt", v.theta_alt},
         {"sigma", v.sigma},
         {"cost", v.cost},
         {"alpha", v.alpha},
         {"eta", v.eta},
         {"budget", number(v.budget)},
         {"policy", v.policy},
         {"n_rule", v.n_rule},
         {"specified_q", opt(v.specified_q)},
         {"seed_base", v.seed_base},
         {"samples_per_hypothesis", v.samples_per_hypothesis},
         {"lookahead_extra", v.lookahead_extra},
         {"threads", v.threads}};
}

void from_json(const Json& j, SimConfig& v) {
    check_keys(j,
               {"m", "n_iter", "prior", "theta_alt", "sigma", "cost", "alpha", "eta", "budget", "policy", "n_rule",
                "specified_q", "seed_base", "samples_per_hypothesis", "lookahead_extra", "threads", "solver"},
               "sim config");
    read(j, "m", v.m);
    read(j, "n_iter", v.n_iter);
    read(j, "prior", v.prior);
    read(j, "theta_alt", v.theta_alt);
    read(j, "sigma", v.sigma);
    read(j, "cost", v.cost);
    read(j, "alpha", v.alpha);
    read(j, "eta", v.eta);
    if (j.contains("budget") && j["budget"].is_null()) {
        v.budget = std::numeric_limits<double>::infinity();
    } else {
        read(j, "budget", v.budget);
    }
    read(j, "policy", v.policy);
    // A top-level solver block is shorthand for policy.solver.
    read(j, "solver", v.policy.solver);
    read(j, "n_rule", v.n_rule);
    read_opt(j, "specified_q", v.specified_q);
    read(j, "seed_base", v.seed_base);
    read(j, "samples_per_hypothesis", v.samples_per_hypothesis);
    read(j, "lookahead_extra", v.lookahead_extra);
    read(j, "threads", v.threads);
}

void to_json(Json& j, const DatasetConfig& v) {
    j = {{"data_path", v.data_path},   {"prior_k", v.prior_k},   {"beta_slope", v.beta_slope},
         {"x0", v.x0},                 {"theta_bar", v.theta_bar}, {"n_cap_exec", v.n_cap_exec},
         {"permutations", v.permutations}, {"budget", v.budget}, {"cost", v.cost},
         {"alpha", v.alpha},           {"eta", v.eta},           {"seed_base", v.seed_base},
         {"threads", v.threads}};
}

void from_json(const Json& j, DatasetConfig& v) {
    check_keys(j,
               {"data_path", "prior_k", "beta_slope", "x0", "theta_bar", "n_cap_exec", "permutations", "budget", "cost",
                "alpha", "eta", "seed_base", "threads"},
               "dataset config");
    read(j, "data_path", v.data_path);
    read(j, "prior_k", v.prior_k);
    read(j, "beta_slope", v.beta_slope);
    read(j, "x0", v.x0);
    read(j, "theta_bar", v.theta_bar);
    read(j, "n_cap_exec", v.n_cap_exec);
    read(j, "permutations", v.permutations);
    read(j, "budget", v.budget);
    read(j, "cost", v.cost);
    read(j, "alpha", v.alpha);
    read(j, "eta", v.eta);
    read(j, "seed_base", v.seed_base);
    read(j, "threads", v.threads);
}

void to_json(Json& j, const IterationRecord& v) {
    j = {{"iteration", v.iteration},
         {"tests", v.tests},
         {"rejections", v.rejections},
         {"true_rejects", v.true_rejects},
         {"false_rejects", v.false_rejects},
         {"alternatives_tested", v.alternatives_tested},
         {"solver_failures", v.solver_failures},
         {"skips", v.skips},
         {"samples", v.samples},
         {"spent", v.spent},
         {"final_w_alpha", v.final_w_alpha},
         {"final_w_dollar", number(v.final_w_dollar)},
         {"budget_conserved", v.budget_conserved},
         {"discarded", v.discarded}};
}

void to_json(Json& j, const AggregateReport& v) {
    j = {{"label", v.label},
         {"mean_tests", v.mean_tests},
         {"mean_rejections", v.mean_rejections},
         {"mean_true_rejects", v.mean_true_rejects},
         {"mean_false_rejects", v.mean_false_rejects},
         {"mfdr", v.mfdr},
         {"se_tests", v.se_tests},
         {"se_true_rejects", v.se_true_rejects},
         {"mean_samples_per_test", v.mean_samples_per_test},
         {"mean_spent", v.mean_spent},
         {"power", v.power},
         {"discarded_iterations", v.discarded_iterations},
         {"iterations", v.iterations}};
}

Json apply_overrides(Json config, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key=value: '" + o + "'");
        std::string path = "/" + o.substr(0, eq);
        for (auto& ch : path) {
            if (ch == '.') ch = '/';
        }
        const std::string raw = o.substr(eq + 1);
        Json value = Json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        try {
            config[Json::json_pointer(path)] = value;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("override '" + o + "': " + e.what());
        }
    }
    return config;
}

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace caero
