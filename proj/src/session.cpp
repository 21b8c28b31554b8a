#include "caero/session.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "caero/error.hpp"

namespace caero {

SolverConfig default_session_solver_config() {
    SolverConfig c;
    c.q_min = 0.01;
    c.q_max = 0.99;
    return c;
}

namespace {

constexpr std::size_t kMaxHorizon = 5;
constexpr std::size_t kWhatIfPoints = 40;

double budget_from_json(const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

Json number(double x) {
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

Json wealth_json(const WealthState& w) {
    return {{"w_alpha", w.w_alpha()}, {"w_dollar", number(w.w_dollar())}};
}

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string new_session_id() {
    static std::mutex mu;
    static std::mt19937_64 rng = [] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }();
    std::lock_guard lock(mu);
    std::ostringstream os;
    os << std::hex;
    for (int i = 0; i < 2; ++i) {
        os.width(16);
        os.fill('0');
        os << rng();
    }
    return os.str();
}

bool valid_session_id(const std::string& id) {
    return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

void write_all(int fd, const std::string& data, const std::string& where) {
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t w = ::write(fd, data.data() + done, data.size() - done);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw StorageError("write to " + where + " failed: " + std::strerror(errno));
        }
        done += static_cast<std::size_t>(w);
    }
}

void append_line(const std::filesystem::path& path, const std::string& line) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND);
    if (fd < 0) throw StorageError("cannot open " + path.string() + ": " + std::strerror(errno));
    struct stat st {};
    ::fstat(fd, &st);
    try {
        write_all(fd, line, path.string());
        if (::fsync(fd) != 0) throw StorageError("fsync of " + path.string() + " failed");
    } catch (...) {
        // Leave no partial event behind.
        if (::ftruncate(fd, st.st_size) != 0) {
            // The loader ignores a trailing partial line.
        }
        ::close(fd);
        throw;
    }
    ::close(fd);
}

void write_new_file(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw StorageError("cannot create " + tmp + ": " + std::strerror(errno));
    try {
        write_all(fd, content, tmp);
        if (::fsync(fd) != 0) throw StorageError("fsync of " + tmp + " failed");
    } catch (...) {
        ::close(fd);
        ::unlink(tmp.c_str());
        throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        ::unlink(tmp.c_str());
        throw StorageError("cannot create " + path.string() + ": " + std::strerror(errno));
    }
}

const Json& field(const Json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw StorageError(std::string("event lacks field '") + key + "'");
    return *it;
}

}  // namespace

void SessionState::apply(const Json& event) {
    const std::string type = field(event, "type").get<std::string>();
    if (type == "init") {
        if (!events.empty()) throw StorageError("init event after the start of the log");
        id = field(event, "session_id").get<std::string>();
        alpha = field(event, "alpha").get<double>();
        eta = field(event, "eta").get<double>();
        budget = budget_from_json(field(event, "budget"));
        solver = default_session_solver_config();
        from_json(field(event, "solver_config"), solver);
        wealth = WealthState::init(alpha, eta, budget);
    } else if (events.empty()) {
        throw StorageError("log does not start with an init event");
    } else if (type == "proposal") {
        const Json& p = field(event, "proposal");
        const std::string pid = field(p, "proposal_id").get<std::string>();
        if (pending) throw StorageError("proposal " + pid + " logged while another is pending");
        proposals[pid] = p;
        ++next_proposal;
        if (!field(p, "skipped").get<bool>()) {
            PendingProposal pp;
            pp.id = pid;
            pp.spec = field(p, "spec").get<HypothesisSpec>();
            const Json& r = field(p, "recommended");
            pp.params = {field(r, "phi").get<double>(), field(r, "alpha_j").get<double>(),
                         field(r, "psi").get<double>(), field(r, "rho").get<double>(), field(r, "n").get<double>()};
            pending = pp;
        }
    } else if (type == "outcome") {
        const std::string pid = field(event, "proposal_id").get<std::string>();
        if (!pending || pending->id != pid) throw StorageError("outcome for proposal " + pid + " that is not pending");
        Outcome o;
        if (!field(event, "p_value").is_null()) o.p_value = event["p_value"].get<double>();
        o.rejected = field(event, "rejected").get<bool>();
        wealth.apply(pending->spec, pending->params, o);
        if (wealth.w_alpha() != field(event, "w_alpha").get<double>() ||
            (std::isfinite(wealth.w_dollar()) && wealth.w_dollar() != field(event, "w_dollar").get<double>())) {
            throw StorageError("replayed wealth differs from the logged value for proposal " + pid);
        }
        pending.reset();
        resolved[pid] = event;
    } else if (type == "skip") {
        const std::string pid = field(event, "proposal_id").get<std::string>();
        if (!pending || pending->id != pid) throw StorageError("skip for proposal " + pid + " that is not pending");
        pending.reset();
        resolved[pid] = event;
    } else {
        throw StorageError("unknown event type '" + type + "'");
    }
    events.push_back(event);
}

Json session_summary(const SessionState& s) {
    Json j = {{"session_id", s.id},
              {"alpha", s.alpha},
              {"eta", s.eta},
              {"budget", number(s.budget)},
              {"solver_config", s.solver},
              {"w_alpha", s.wealth.w_alpha()},
              {"w_dollar", number(s.wealth.w_dollar())},
              {"tests", s.wealth.tests()},
              {"rejections", s.wealth.rejections()},
              {"events", s.events.size()},
              {"stopped", s.wealth.w_alpha() <= kAlphaWealthEpsilon}};
    j["pending_proposal"] = s.pending ? s.proposals.at(s.pending->id) : Json(nullptr);
    return j;
}

std::vector<Json> what_if_rows(const HypothesisSpec& spec, const WealthSnapshot& wealth, const SolverConfig& config,
                               double recommended_n) {
    const StepLimits limits = step_limits(spec, wealth, config);
    double top = limits.n_max;
    if (!std::isfinite(top)) top = std::max(100.0, 4.0 * recommended_n);
    top = std::floor(top + 1e-9);
    std::set<double> grid;
    if (top <= static_cast<double>(kWhatIfPoints)) {
        for (double n = 1.0; n <= top; n += 1.0) grid.insert(n);
    } else {
        const double step = std::log(top) / static_cast<double>(kWhatIfPoints - 1);
        for (std::size_t k = 0; k < kWhatIfPoints; ++k) {
            grid.insert(std::min(top, std::round(std::exp(step * static_cast<double>(k)))));
        }
    }
    if (recommended_n >= 1.0 && recommended_n <= top) grid.insert(recommended_n);
    std::vector<Json> rows;
    for (double n : grid) {
        const auto p = params_at_n(spec, limits, n, config);
        if (!p || !satisfies_reward_caps(*p, wealth.alpha, 1e-12)) continue;
        rows.push_back({{"n", n},
                        {"phi", p->phi},
                        {"alpha_j", p->alpha_j},
                        {"rho", p->rho},
                        {"psi", p->psi},
                        {"expected_increment", expected_increment(*p, spec.q)}});
    }
    return rows;
}

SessionService::SessionService(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw StorageError("cannot create data directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path SessionService::log_path(const std::string& id) const {
    return dir_ / (id + ".jsonl");
}

SessionState SessionService::load(const std::filesystem::path& log) {
    std::ifstream in(log, std::ios::binary);
    if (!in) throw StorageError("cannot read " + log.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    SessionState s;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) break;  // partial final line from an interrupted append
        const std::string line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        const Json ev = Json::parse(line, nullptr, false);
        if (ev.is_discarded()) throw StorageError("corrupt event in " + log.string());
        try {
            s.apply(ev);
        } catch (const nlohmann::json::exception& e) {
            throw StorageError("malformed event in " + log.string() + ": " + e.what());
        }
    }
    if (s.events.empty()) throw StorageError("empty session log " + log.string());
    if (start < text.size()) std::filesystem::resize_file(log, start);
    return s;
}

std::shared_ptr<SessionService::Slot> SessionService::slot(const std::string& id) {
    if (!valid_session_id(id)) throw NotFoundError("unknown session '" + id + "'");
    std::lock_guard lock(map_mu_);
    const auto it = slots_.find(id);
    if (it != slots_.end()) return it->second;
    const auto path = log_path(id);
    if (!std::filesystem::exists(path)) throw NotFoundError("unknown session '" + id + "'");
    auto s = std::make_shared<Slot>();
    s->state = load(path);
    slots_[id] = s;
    return s;
}

void SessionService::append(const std::string& id, SessionState& state, Json event) {
    event["seq"] = state.events.size();
    event["recorded_at_ms"] = now_ms();
    // Fold a copy first so a rejected event never reaches the log.
    SessionState probe = state;
    probe.apply(event);
    append_line(log_path(id), event.dump() + "\n");
    state = std::move(probe);
}

Json SessionService::create_session(double alpha, double eta, double budget, const SolverConfig& solver) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
    if (!(budget >= 0.0)) throw ValidationError("budget must be nonnegative");
    solver.validate();
    const std::string id = new_session_id();
    Json init = {{"type", "init"},         {"seq", 0},          {"session_id", id},
                 {"alpha", alpha},         {"eta", eta},        {"budget", number(budget)},
                 {"solver_config", solver}, {"w_alpha", alpha * eta}, {"w_dollar", number(budget)},
                 {"recorded_at_ms", now_ms()}};
    auto s = std::make_shared<Slot>();
    s->state.apply(init);
    write_new_file(log_path(id), init.dump() + "\n");
    {
        std::lock_guard lock(map_mu_);
        slots_[id] = s;
    }
    return session_summary(s->state);
}

Json SessionService::get_session(const std::string& id) {
    auto s = slot(id);
    std::shared_lock lock(s->mu);
    return session_summary(s->state);
}

Json SessionService::propose_test(const std::string& id, const HypothesisSpec& spec, std::size_t horizon,
                                  const std::vector<HypothesisSpec>& future) {
    if (horizon < 1 || horizon > kMaxHorizon) throw ValidationError("horizon must lie in [1, 5]");
    spec.validate();
    for (const auto& f : future) f.validate();
    auto s = slot(id);
    std::unique_lock lock(s->mu);
    SessionState& st = s->state;
    if (st.pending) throw ConflictError("proposal " + st.pending->id + " is still pending");
    if (st.wealth.w_alpha() <= kAlphaWealthEpsilon) throw ConflictError("alpha-wealth exhausted; testing has stopped");
    if (st.wealth.w_dollar() < spec.cost) throw ConflictError("dollar budget cannot fund a single sample");

    CaeroSolution sol;
    if (horizon > 1 && !future.empty()) {
        HorizonProblem prob;
        prob.wealth = st.wealth.snapshot();
        prob.specs.push_back(spec);
        for (std::size_t i = 0; i < future.size() && prob.specs.size() < horizon; ++i) prob.specs.push_back(future[i]);
        sol = solve_finite_horizon(prob, st.solver).front();
    } else {
        sol = solve_one_step(spec, st.wealth, st.solver);
    }

    const std::string pid = "p" + std::to_string(st.next_proposal);
    Json p = {{"proposal_id", pid},
              {"session_id", st.id},
              {"spec", spec},
              {"horizon", horizon},
              {"skipped", sol.skipped},
              {"solver_failure", sol.solver_failure},
              {"diagnostic", sol.diagnostic},
              {"solution", sol},
              {"wealth_before", wealth_json(st.wealth)}};
    if (sol.skipped) {
        p["recommended"] = nullptr;
        p["regime"] = nullptr;
        p["expected_increment"] = nullptr;
        p["what_if"] = Json::array();
    } else {
        const TestParams rec = execution_params(sol, spec, st.alpha, st.solver);
        const RegimeReport regime = classify_regime(rec, spec.q, st.alpha);
        p["recommended"] = {{"phi", rec.phi},     {"alpha_j", rec.alpha_j}, {"psi", rec.psi},
                            {"rho", rec.rho},     {"n", rec.n},             {"n_continuous", sol.params.n},
                            {"cost", rec.n * spec.cost}};
        p["regime"] = to_string(regime.regime);
        p["regime_diagnostic"] = regime.diagnostic;
        p["expected_increment"] = expected_increment(rec, spec.q);
        p["what_if"] = what_if_rows(spec, st.wealth.snapshot(), st.solver, rec.n);
    }
    append(id, st, {{"type", "proposal"}, {"proposal", p}});
    return p;
}

Json SessionService::record_outcome(const std::string& id, const std::string& proposal_id,
                                    const OutcomeReport& report) {
    auto s = slot(id);
    std::unique_lock lock(s->mu);
    SessionState& st = s->state;
    const auto done = st.resolved.find(proposal_id);
    if (done != st.resolved.end()) {
        if (done->second.at("type") == "outcome") return done->second;
        throw ConflictError("proposal " + proposal_id + " was skipped");
    }
    if (!st.pending || st.pending->id != proposal_id) {
        throw ConflictError("proposal " + proposal_id + " is not pending");
    }
    if (!report.p_value && !report.rejected) throw ValidationError("report needs a p_value or a rejected flag");
    const PendingProposal& pp = *st.pending;
    bool rejected = false;
    if (report.p_value) {
        const double pv = *report.p_value;
        if (!(pv >= 0.0 && pv <= 1.0)) throw ValidationError("p_value must lie in [0, 1]");
        rejected = pv <= pp.params.alpha_j;
        if (report.rejected && *report.rejected != rejected) {
            throw ValidationError("rejected flag disagrees with p_value <= alpha_j");
        }
    } else {
        rejected = *report.rejected;
    }
    if (!satisfies_reward_caps(pp.params, st.alpha)) {
        throw DomainError("pending parameters violate the reward caps");
    }
    WealthState next = st.wealth;
    next.apply(pp.spec, pp.params, Outcome{report.p_value, rejected, std::nullopt});
    Json ev = {{"type", "outcome"},
               {"proposal_id", proposal_id},
               {"p_value", report.p_value ? Json(*report.p_value) : Json(nullptr)},
               {"rejected", rejected},
               {"alpha_j", pp.params.alpha_j},
               {"phi", pp.params.phi},
               {"psi", pp.params.psi},
               {"n", pp.params.n},
               {"delta_w_alpha", next.w_alpha() - st.wealth.w_alpha()},
               {"delta_w_dollar", -pp.params.n * pp.spec.cost},
               {"w_alpha", next.w_alpha()},
               {"w_dollar", number(next.w_dollar())}};
    append(id, st, ev);
    return st.resolved.at(proposal_id);
}

Json SessionService::skip_test(const std::string& id, const std::string& proposal_id) {
    auto s = slot(id);
    std::unique_lock lock(s->mu);
    SessionState& st = s->state;
    const auto done = st.resolved.find(proposal_id);
    if (done != st.resolved.end()) {
        if (done->second.at("type") == "skip") return done->second;
        throw ConflictError("proposal " + proposal_id + " already has an outcome");
    }
    if (!st.pending || st.pending->id != proposal_id) {
        throw ConflictError("no pending proposal with id " + proposal_id);
    }
    Json ev = {{"type", "skip"},
               {"proposal_id", proposal_id},
               {"w_alpha", st.wealth.w_alpha()},
               {"w_dollar", number(st.wealth.w_dollar())}};
    append(id, st, ev);
    return st.resolved.at(proposal_id);
}

Json SessionService::get_history(const std::string& id) {
    auto s = slot(id);
    std::shared_lock lock(s->mu);
    const SessionState& st = s->state;
    Json traj = Json::array();
    for (const auto& ev : st.events) {
        const std::string type = ev.at("type");
        if (type == "init" || type == "outcome") {
            traj.push_back({{"seq", ev.at("seq")}, {"w_alpha", ev.at("w_alpha")}, {"w_dollar", ev.at("w_dollar")}});
        }
    }
    return {{"session_id", st.id}, {"events", st.events}, {"trajectory", traj}, {"summary", session_summary(st)}};
}

}  // namespace caero
