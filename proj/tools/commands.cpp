#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "caero/dataset.hpp"
#include "caero/error.hpp"
#include "caero/http_service.hpp"
#include "caero/json_io.hpp"
#include "caero/session.hpp"
#include "caero/simlab.hpp"
#include "caero/solver.hpp"
#include "tables.hpp"

namespace caero::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iters;
    std::string out_dir;
    std::optional<std::string> policy;
    std::optional<double> q;
    std::optional<double> n_cap;
    std::optional<double> budget;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> threads;
    std::vector<std::string> sets;
    std::vector<std::string> args;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "JSON file mirroring the config field names");
    cmd->add_option("--seed", o.seed, "Base seed; iteration i uses seed + i");
    cmd->add_option("--iters", o.iters, "Number of iterations or permutations");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--set", o.sets, "Override a config field, e.g. policy.solver.a=0.2")->take_all();
    cmd->add_option("--threads", o.threads, "Worker threads; 0 uses all cores");
}

void add_policy_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--policy", o.policy, "alpha-spending | alpha-investing | ero | cost-aware");
    cmd->add_option("--q", o.q, "Prior probability that the null is true");
    cmd->add_option("--n-cap", o.n_cap, "Upper bound on the sample size per test");
    cmd->add_option("--budget", o.budget, "Dollar budget");
    cmd->add_option("--horizon", o.horizon, "Finite horizon length (1 to 5)");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ValidationError("config file " + path + " is not valid JSON");
    return j;
}

template <class T>
T resolve(T base, const Options& o) {
    Json j = base;
    if (!o.config_path.empty()) {
        const Json file = read_json_file(o.config_path);
        if (!file.is_object()) throw ValidationError("config file must hold a JSON object");
        for (const auto& [k, v] : file.items()) j[k] = v;
    }
    j = apply_overrides(j, o.sets);
    T out = base;
    from_json(j, out);
    return out;
}

SimConfig apply_sim_flags(SimConfig c, const Options& o) {
    if (o.seed) c.seed_base = *o.seed;
    if (o.iters) c.n_iter = *o.iters;
    if (o.threads) c.threads = *o.threads;
    if (o.policy) c.policy.name = *o.policy;
    if (o.q) c.prior = PriorModel{PriorModel::Kind::fixed, *o.q, c.prior.beta_a};
    if (o.budget) c.budget = *o.budget;
    if (o.horizon) c.policy.horizon = *o.horizon;
    if (o.n_cap) {
        c.n_rule = c.policy.name == "cost-aware" ? NRule{NRule::Kind::cap, *o.n_cap} : NRule{NRule::Kind::fixed, *o.n_cap};
    }
    return c;
}

std::string timestamp() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

class Run {
public:
    Run(std::string command, const Options& o) : command_(std::move(command)), o_(o) {
        dir_ = o.out_dir.empty() ? fs::path("alpha-ledger-runs") / command_ : fs::path(o.out_dir);
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw StorageError("cannot create output directory " + dir_.string() + ": " + ec.message());
        started_ = timestamp();
    }

    const fs::path& dir() const { return dir_; }

    void write(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream f(p);
        f << content;
        f.close();
        if (!f) throw StorageError("cannot write " + p.string());
        files_.push_back(name);
    }

    void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

    void finish(const Json& resolved) {
        write_json("resolved_config.json", resolved);
        Json manifest = {{"command", command_},
                         {"args", o_.args},
                         {"config_path", o_.config_path.empty() ? Json(nullptr) : Json(o_.config_path)},
                         {"output_directory", dir_.string()},
                         {"overrides", o_.sets},
                         {"started_at", started_},
                         {"finished_at", timestamp()},
                         {"outputs", files_}};
        write_json("manifest.json", manifest);
    }

private:
    std::string command_;
    const Options& o_;
    fs::path dir_;
    std::string started_;
    std::vector<std::string> files_;
};

std::string records_csv(const AggregateReport& r) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "iteration,tests,rejections,true_rejects,false_rejects,alternatives_tested,solver_failures,skips,samples,"
          "spent,final_w_alpha,final_w_dollar,budget_conserved,discarded\n";
    for (const auto& x : r.records) {
        os << x.iteration << ',' << x.tests << ',' << x.rejections << ',' << x.true_rejects << ','
           << x.false_rejects << ',' << x.alternatives_tested << ',' << x.solver_failures << ',' << x.skips << ','
           << x.samples << ',' << x.spent << ',' << x.final_w_alpha << ',' << x.final_w_dollar << ','
           << x.budget_conserved << ',' << x.discarded << '\n';
    }
    return os.str();
}

int cmd_sim(const Options& o, std::ostream& out) {
    const SimConfig c = apply_sim_flags(resolve(SimConfig{}, o), o);
    c.validate();
    Run run("sim", o);
    AggregateReport r = run_simulation(c);
    TableSpec t{"sim", "Simulation: " + r.label, {{"sim", r.label, c}}};
    render_table(out, t, {r});
    Json report = r;
    run.write_json("report.json", report);
    run.write("records.csv", records_csv(r));
    run.finish(c);
    return 0;
}

int cmd_table(const std::string& id, const Options& o, std::ostream& out) {
    SimConfig base = apply_sim_flags(SimConfig{}, o);
    if (!o.config_path.empty()) base = apply_sim_flags(resolve(SimConfig{}, o), o);
    TableSpec t = table_spec(id, base);
    Json resolved = Json::array();
    for (auto& row : t.rows) {
        row.config = resolve(row.config, Options{.sets = o.sets});
        if (o.n_cap) row.config.n_rule.n = *o.n_cap;
        row.config.validate();
        resolved.push_back({{"scheme", row.scheme}, {"method", row.method}, {"config", row.config}});
    }
    Run run("table-" + id, o);
    const auto reports = run_table(t);
    render_table(out, t, reports);
    std::ostringstream csv;
    write_table_csv(csv, t, reports);
    run.write("table.csv", csv.str());
    run.write_json("table.json", Json(reports));
    run.finish(resolved);
    return 0;
}

struct SolveFlags {
    double theta_bar = 2.0;
    double sigma = 1.0;
    double cost = 1.0;
    double alpha = 0.05;
    std::optional<double> w_alpha;
    std::vector<double> future_q;
};

int cmd_solve(const Options& o, const SolveFlags& f, std::ostream& out) {
    SolverConfig solver = resolve(SolverConfig{}, o);
    if (o.n_cap) solver.n_cap = *o.n_cap;
    solver.validate();
    HypothesisSpec spec;
    spec.q = o.q.value_or(0.9);
    spec.theta_bar = f.theta_bar;
    spec.sigma = f.sigma;
    spec.cost = f.cost;
    spec.validate();
    WealthSnapshot wealth{f.w_alpha.value_or(f.alpha * 0.95), o.budget.value_or(1000.0), f.alpha};
    const std::size_t horizon = o.horizon.value_or(1);
    CaeroSolution sol;
    if (horizon > 1) {
        if (f.future_q.size() + 1 < horizon) {
            throw ValidationError("--horizon " + std::to_string(horizon) + " needs " + std::to_string(horizon - 1) +
                                  " values in --future-q");
        }
        HorizonProblem prob{{spec}, wealth};
        for (std::size_t i = 0; i + 1 < horizon; ++i) {
            HypothesisSpec s = spec;
            s.q = f.future_q[i];
            s.validate();
            prob.specs.push_back(s);
        }
        sol = solve_finite_horizon(prob, solver).front();
    } else {
        sol = solve_one_step(spec, wealth, solver);
    }
    Json result = {{"spec", spec}, {"wealth", wealth}, {"horizon", horizon}, {"solution", sol}};
    if (!sol.skipped) {
        const TestParams exec = execution_params(sol, spec, wealth.alpha, solver);
        result["executed"] = exec;
        result["regime"] = to_string(classify_regime(exec, spec.q, wealth.alpha).regime);
        result["expected_increment"] = expected_increment(exec, spec.q);
    }
    out << result.dump(2) << '\n';
    Run run("solve", o);
    run.write_json("solution.json", result);
    run.finish({{"solver", solver}, {"spec", spec}, {"wealth", wealth}, {"horizon", horizon}});
    return 0;
}

struct DatasetFlags {
    std::string data;
    bool synthetic = false;
    std::size_t genes = 6033;
};

int cmd_dataset(const Options& o, const DatasetFlags& f, std::ostream& out) {
    DatasetConfig c = resolve(DatasetConfig{}, o);
    if (!f.data.empty()) c.data_path = f.data;
    if (o.seed) c.seed_base = *o.seed;
    if (o.iters) c.permutations = *o.iters;
    if (o.budget) c.budget = *o.budget;
    if (o.threads) c.threads = *o.threads;
    if (o.n_cap) c.n_cap_exec = *o.n_cap;
    c.validate();
    Dataset data;
    if (f.synthetic || c.data_path.empty()) {
        SyntheticDatasetSpec s;
        s.genes = f.genes;
        s.seed = c.seed_base;
        data = synthesize_dataset(s);
        c.data_path.clear();
    } else {
        data = load_dataset_csv(c.data_path);
    }
    const PreparedDataset prepared = prepare_dataset(data, c);
    Run run("dataset", o);
    std::vector<AggregateReport> reports;
    for (const auto& policy : {dataset_baseline_policy(c), dataset_cost_aware_policy(c)}) {
        AggregateReport r = run_dataset(prepared, c, policy);
        r.label = policy.name == "cost-aware" ? "cost-aware ERO" : "ERO n = " + format_number(c.n_cap_exec);
        reports.push_back(std::move(r));
    }
    out << "Dataset: " << (c.data_path.empty() ? "synthetic stand-in" : c.data_path) << ", " << data.size()
        << " hypotheses, " << c.permutations << " permutations\n";
    out << std::left << std::setw(18) << "Method" << std::right << std::setw(10) << "Tests" << std::setw(12)
        << "Rejections" << std::setw(12) << "Samples" << std::setw(10) << "Spent" << '\n';
    std::ostringstream csv;
    csv << "method,tests,rejections,true_rejects,samples_per_test,spent\n" << std::setprecision(10);
    for (const auto& r : reports) {
        out << std::left << std::setw(18) << r.label << std::right << std::fixed << std::setprecision(2)
            << std::setw(10) << r.mean_tests << std::setw(12) << r.mean_rejections << std::setw(12)
            << r.mean_samples_per_test << std::setw(10) << r.mean_spent << '\n';
        csv << r.label << ',' << r.mean_tests << ',' << r.mean_rejections << ',' << r.mean_true_rejects << ','
            << r.mean_samples_per_test << ',' << r.mean_spent << '\n';
    }
    out.unsetf(std::ios::floatfield);
    run.write("dataset.csv", csv.str());
    run.write_json("report.json", Json(reports));
    run.finish(c);
    return 0;
}

HttpService* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const Options& o, const std::string& host, int port, std::string data_dir, std::ostream& out) {
    if (data_dir.empty()) {
        const char* env = std::getenv("ALPHA_LEDGER_DATA_DIR");
        data_dir = env && *env ? env : "alpha-ledger-data";
    }
    Run run("serve", o);
    run.finish({{"host", host}, {"port", port}, {"data_dir", data_dir}});
    SessionService sessions(data_dir);
    HttpService server(sessions);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    out << "listening on " << host << ':' << port << ", data in " << data_dir << std::endl;
    const bool ok = server.listen(host, port);
    g_server = nullptr;
    if (!ok) throw StorageError("cannot listen on " + host + ":" + std::to_string(port));
    return 0;
}

int cmd_curves(const std::string& kind, const Options& o, std::ostream& out) {
    std::ostringstream csv;
    csv << std::setprecision(12);
    Json resolved;
    if (kind == "power_mfdr_vs_q") {
        SimConfig base;
        base.budget = 1e8;
        base.n_iter = 100;
        base.policy.name = "cost-aware";
        base.policy.solver.init_rho = 1.0;
        base.n_rule = NRule{NRule::Kind::unbounded, 0.0};
        base = apply_sim_flags(resolve(base, o), o);
        csv << "mean_q,policy,power,mfdr,samples_per_test,tests,true_rejects\n";
        resolved = Json::array();
        for (int a = 10; a <= 90; a += 10) {
            SimConfig c = base;
            c.prior = PriorModel{PriorModel::Kind::beta, 0.9, static_cast<double>(a)};
            c.validate();
            const AggregateReport r = run_simulation(c);
            csv << a / 100.0 << ',' << r.label << ',' << r.power << ',' << r.mfdr << ',' << r.mean_samples_per_test
                << ',' << r.mean_tests << ',' << r.mean_true_rejects << '\n';
            resolved.push_back(c);
        }
    } else if (kind == "optimal_n_vs_q") {
        SolverConfig solver;
        solver.a = 1.0;
        solver.init_rho = 1.0;
        solver = resolve(solver, o);
        if (o.n_cap) solver.n_cap = *o.n_cap;
        const WealthSnapshot wealth{0.0475, o.budget.value_or(1000.0), 0.05};
        csv << "q,n_optimal,n_band_hi,phi,alpha_j,rho,psi,skipped\n";
        for (int k = 1; k <= 99; ++k) {
            HypothesisSpec spec;
            spec.q = k / 100.0;
            spec.theta_bar = 2.0;
            const CaeroSolution s = solve_one_step(spec, wealth, solver);
            csv << spec.q << ',' << s.params.n << ',' << s.n_band_hi << ',' << s.params.phi << ','
                << s.params.alpha_j << ',' << s.params.rho << ',' << s.params.psi << ',' << s.skipped << '\n';
        }
        resolved = {{"solver", solver}, {"wealth", wealth}};
    } else {
        throw ValidationError("unknown curve kind '" + kind + "' (expected power_mfdr_vs_q or optimal_n_vs_q)");
    }
    out << csv.str();
    Run run("curves-" + kind, o);
    run.write(kind + ".csv", csv.str());
    run.finish(resolved);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cost-aware generalized alpha-investing engine", "alpha-ledger"};
    app.require_subcommand(1);
    Options o;
    o.args = args;

    auto* sim = app.add_subcommand("sim", "Run one simulation configuration");
    add_common(sim, o);
    add_policy_flags(sim, o);

    std::string table_id;
    auto* table = app.add_subcommand("table", "Reproduce a comparison table (t1, t2, t4, t5, t6)");
    table->add_option("id", table_id, "Table id")->required();
    add_common(table, o);
    table->add_option("--budget", o.budget, "Dollar budget");
    table->add_option("--n-cap", o.n_cap, "Replace every row's sample-size value");

    SolveFlags sf;
    auto* solve = app.add_subcommand("solve", "Solve one cost-aware step and print the solution as JSON");
    add_common(solve, o);
    add_policy_flags(solve, o);
    solve->add_option("--theta-bar", sf.theta_bar, "Effect bound under the alternative");
    solve->add_option("--sigma", sf.sigma, "Noise standard deviation");
    solve->add_option("--cost", sf.cost, "Dollars per sample");
    solve->add_option("--alpha", sf.alpha, "Target mFDR level");
    solve->add_option("--w-alpha", sf.w_alpha, "Current alpha-wealth (default alpha * 0.95)");
    solve->add_option("--future-q", sf.future_q, "Priors of the following hypotheses for --horizon")->delimiter(',');

    DatasetFlags df;
    auto* dataset = app.add_subcommand("dataset", "Compare fixed-n and cost-aware ERO on a CSV dataset");
    add_common(dataset, o);
    dataset->add_option("--data", df.data, "CSV: id[,sigma_hat],samples...");
    dataset->add_flag("--synthetic", df.synthetic, "Use the synthetic stand-in dataset");
    dataset->add_option("--genes", df.genes, "Rows in the synthetic dataset");
    dataset->add_option("--budget", o.budget, "Dollar budget");
    dataset->add_option("--n-cap", o.n_cap, "Fixed sample size of the baseline and skip threshold");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir;
    auto* serve = app.add_subcommand("serve", "Run the interactive session service");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--data-dir", data_dir, "Session logs (default $ALPHA_LEDGER_DATA_DIR)");
    serve->add_option("--out", o.out_dir, "Directory for the run manifest");

    std::string curve_kind;
    auto* curves = app.add_subcommand("curves", "Emit plot-ready series as CSV");
    curves->add_option("kind", curve_kind, "power_mfdr_vs_q | optimal_n_vs_q")->required();
    add_common(curves, o);
    add_policy_flags(curves, o);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream cli_out, cli_err;
        const int code = app.exit(e, cli_out, cli_err);
        out << cli_out.str();
        err << cli_err.str();
        return code == 0 ? 0 : 2;
    }
    try {
        if (*sim) return cmd_sim(o, out);
        if (*table) return cmd_table(table_id, o, out);
        if (*solve) return cmd_solve(o, sf, out);
        if (*dataset) return cmd_dataset(o, df, out);
        if (*serve) return cmd_serve(o, host, port, data_dir, out);
        if (*curves) return cmd_curves(curve_kind, o, out);
    } catch (const DegeneratePriorError& e) {
        err << "degenerate prior: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const IngestError& e) {
        err << "ingest error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace caero::cli
