#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "caero/json_io.hpp"
#include "caero/ledger.hpp"
#include "caero/solver.hpp"

namespace caero {

// Solver settings for interactive sessions; priors outside [0.01, 0.99] are skipped.
SolverConfig default_session_solver_config();

struct OutcomeReport {
    std::optional<double> p_value;
    std::optional<bool> rejected;
};

struct PendingProposal {
    std::string id;
    HypothesisSpec spec;
    TestParams params;  // executed parameters, integer n
};

// In-memory fold of a session's event log.
struct SessionState {
    std::string id;
    double alpha = 0.05;
    double eta = 0.95;
    double budget = 1000.0;
    SolverConfig solver;
    WealthState wealth;
    std::optional<PendingProposal> pending;
    std::size_t next_proposal = 1;
    std::map<std::string, Json> proposals;  // proposal id -> proposal response
    std::map<std::string, Json> resolved;   // proposal id -> outcome or skip response
    std::vector<Json> events;

    // Applies one logged event. Throws StorageError on a malformed event.
    void apply(const Json& event);
};

// Event-sourced store: one append-only JSON-lines log per session under data_dir.
class SessionService {
public:
    explicit SessionService(std::filesystem::path data_dir);

    Json create_session(double alpha, double eta, double budget, const SolverConfig& solver);
    Json get_session(const std::string& id);
    Json propose_test(const std::string& id, const HypothesisSpec& spec, std::size_t horizon = 1,
                      const std::vector<HypothesisSpec>& future = {});
    Json record_outcome(const std::string& id, const std::string& proposal_id, const OutcomeReport& report);
    Json skip_test(const std::string& id, const std::string& proposal_id);
    Json get_history(const std::string& id);

    const std::filesystem::path& data_dir() const { return dir_; }
    std::filesystem::path log_path(const std::string& id) const;

    // Rebuilds a session from its log alone.
    static SessionState load(const std::filesystem::path& log);

private:
    struct Slot {
        std::shared_mutex mu;
        SessionState state;
    };

    std::shared_ptr<Slot> slot(const std::string& id);
    void append(const std::string& id, SessionState& state, Json event);

    std::filesystem::path dir_;
    std::mutex map_mu_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

Json session_summary(const SessionState& s);

// Rows of the largest feasible ante at fixed n, for n on a grid up to the sample-size bound.
std::vector<Json> what_if_rows(const HypothesisSpec& spec, const WealthSnapshot& wealth, const SolverConfig& config,
                               double recommended_n);

}  // namespace caero
