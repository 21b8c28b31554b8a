#include "tables.hpp"

#include <iomanip>
#include <sstream>

#include "caero/error.hpp"

namespace caero::cli {

SimConfig baseline_row(const SimConfig& base, const std::string& policy, SchemeKind scheme, double n) {
    SimConfig c = base;
    c.policy = PolicyConfig{};
    c.policy.name = policy;
    c.policy.scheme.kind = scheme;
    c.n_rule = NRule{NRule::Kind::fixed, n};
    return c;
}

SimConfig cost_aware_row(const SimConfig& base, NRule rule, double a, double init_rho) {
    SimConfig c = base;
    c.policy = PolicyConfig{};
    c.policy.name = "cost-aware";
    c.policy.solver.a = a;
    c.policy.solver.init_rho = init_rho;
    c.n_rule = rule;
    return c;
}

namespace {

SimConfig fixed_prior(SimConfig c, double q) {
    c.prior = PriorModel{PriorModel::Kind::fixed, q, 90};
    c.specified_q.reset();
    return c;
}

void add_baselines(TableSpec& t, const SimConfig& base, double n) {
    for (SchemeKind scheme : {SchemeKind::constant, SchemeKind::relative}) {
        for (const char* policy : {"alpha-spending", "alpha-investing", "ero"}) {
            t.rows.push_back({to_string(scheme), policy, baseline_row(base, policy, scheme, n)});
        }
    }
}

}  // namespace

SimConfig t1_constant_ero(const SimConfig& base) {
    return baseline_row(fixed_prior(base, 0.9), "ero", SchemeKind::constant, 1.0);
}

SimConfig t1_constant_spending(const SimConfig& base) {
    return baseline_row(fixed_prior(base, 0.9), "alpha-spending", SchemeKind::constant, 1.0);
}

SimConfig t1_cost_aware_cap10(const SimConfig& base) {
    return cost_aware_row(fixed_prior(base, 0.9), NRule{NRule::Kind::cap, 10.0}, 0.1, 0.9);
}

SimConfig t4_cost_aware_cap10(const SimConfig& base) {
    return cost_aware_row(fixed_prior(base, 0.1), NRule{NRule::Kind::cap, 10.0}, 1.0, 1.0);
}

SimConfig t2_horizon(const SimConfig& base, std::size_t horizon) {
    SimConfig c = cost_aware_row(base, NRule{NRule::Kind::cap, 10.0}, 0.1, 0.9);
    c.prior = PriorModel{PriorModel::Kind::beta, 0.9, 90};
    c.specified_q.reset();
    c.policy.horizon = horizon;
    return c;
}

SimConfig t5_row(const SimConfig& base, double specified_q) {
    SimConfig c = cost_aware_row(fixed_prior(base, 0.9), NRule{NRule::Kind::cap, 1.0}, 1.0, 0.9);
    c.specified_q = specified_q;
    return c;
}

TableSpec table_spec(const std::string& id, const SimConfig& base) {
    TableSpec t;
    t.id = id;
    if (id == "t1") {
        t.title = "Cost-aware ERO against fixed-n baselines, q = 0.9";
        const SimConfig b = fixed_prior(base, 0.9);
        add_baselines(t, b, 1.0);
        t.rows.push_back({"cost-aware", "ERO n = 1", cost_aware_row(b, {NRule::Kind::cap, 1.0}, 0.1, 0.9)});
        t.rows.push_back({"cost-aware", "ERO n <= 10", t1_cost_aware_cap10(b)});
        t.rows.push_back({"cost-aware", "ERO n <= 100", cost_aware_row(b, {NRule::Kind::cap, 100.0}, 0.1, 0.9)});
        t.rows.push_back({"cost-aware", "ERO n*", cost_aware_row(b, {NRule::Kind::unbounded, 0.0}, 0.1, 0.9)});
    } else if (id == "t2") {
        t.title = "Finite horizon, q ~ Beta(90, 10), n <= 10";
        for (std::size_t h = 1; h <= 5; ++h) {
            t.rows.push_back({"cost-aware", "horizon " + std::to_string(h), t2_horizon(base, h)});
        }
    } else if (id == "t4") {
        t.title = "Cost-aware ERO against fixed-n baselines, q = 0.1";
        const SimConfig b = fixed_prior(base, 0.1);
        add_baselines(t, b, 1.0);
        t.rows.push_back({"cost-aware", "ERO n = 1", cost_aware_row(b, {NRule::Kind::cap, 1.0}, 1.0, 1.0)});
        t.rows.push_back({"cost-aware", "ERO n <= 10", t4_cost_aware_cap10(b)});
        t.rows.push_back({"cost-aware", "ERO n*", cost_aware_row(b, {NRule::Kind::unbounded, 0.0}, 1.0, 1.0)});
    } else if (id == "t5") {
        t.title = "Misspecified prior, true q = 0.9, n = 1";
        for (double q : kSensitivityGrid) {
            std::ostringstream label;
            label << "specified q = " << q;
            t.rows.push_back({"cost-aware", label.str(), t5_row(base, q)});
        }
    } else if (id == "t6") {
        t.title = "Fixed n = 10 baselines, q = 0.9";
        const SimConfig b = fixed_prior(base, 0.9);
        add_baselines(t, b, 10.0);
        t.rows.push_back({"cost-aware", "ERO n <= 10", t1_cost_aware_cap10(b)});
    } else {
        throw ValidationError("unknown table id '" + id + "' (expected t1, t2, t4, t5 or t6)");
    }
    return t;
}

std::vector<AggregateReport> run_table(const TableSpec& table) {
    std::vector<AggregateReport> out;
    for (const auto& row : table.rows) {
        AggregateReport r = run_simulation(row.config);
        r.label = row.scheme + " / " + row.method;
        out.push_back(std::move(r));
    }
    return out;
}

void render_table(std::ostream& out, const TableSpec& table, const std::vector<AggregateReport>& reports) {
    out << table.title << '\n';
    out << std::left << std::setw(12) << "Scheme" << std::setw(22) << "Method" << std::right << std::setw(10)
        << "Tests" << std::setw(14) << "True Rejects" << std::setw(15) << "False Rejects" << std::setw(9) << "mFDR"
        << '\n';
    std::string last;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& row = table.rows[i];
        const auto& r = reports[i];
        out << std::left << std::setw(12) << (row.scheme == last ? "" : row.scheme) << std::setw(22) << row.method
            << std::right << std::fixed << std::setprecision(1) << std::setw(10) << r.mean_tests
            << std::setprecision(2) << std::setw(14) << r.mean_true_rejects << std::setw(15)
            << r.mean_false_rejects << std::setprecision(3) << std::setw(9) << r.mfdr << '\n';
        last = row.scheme;
    }
    out.unsetf(std::ios::floatfield);
}

void write_table_csv(std::ostream& out, const TableSpec& table, const std::vector<AggregateReport>& reports) {
    out << "scheme,method,tests,true_rejects,false_rejects,mfdr,se_tests,se_true_rejects,samples_per_test,"
           "spent,power,iterations,discarded\n";
    out << std::setprecision(10);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out << table.rows[i].scheme << ',' << table.rows[i].method << ',' << r.mean_tests << ','
            << r.mean_true_rejects << ',' << r.mean_false_rejects << ',' << r.mfdr << ',' << r.se_tests << ','
            << r.se_true_rejects << ',' << r.mean_samples_per_test << ',' << r.mean_spent << ',' << r.power << ','
            << r.iterations << ',' << r.discarded_iterations << '\n';
    }
}

}  // namespace caero::cli
