#include "caero/http_service.hpp"

#include <regex>

#include <httplib.h>

#include "caero/error.hpp"

namespace caero {

namespace {

Json error_body(const std::string& code, const std::string& message, const Json& detail = nullptr) {
    return {{"code", code}, {"message", message}, {"detail", detail}};
}

Json parse_body(const std::string& body) {
    if (body.empty()) return Json::object();
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ValidationError("request body is not valid JSON");
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

HttpResponse create(SessionService& svc, const Json& req) {
    for (const auto& [k, _] : req.items()) {
        if (k != "alpha" && k != "eta" && k != "budget" && k != "solver_config") {
            throw ValidationError("unknown field '" + k + "'");
        }
    }
    SolverConfig solver = default_session_solver_config();
    if (req.contains("solver_config")) from_json(req["solver_config"], solver);
    double budget = 1000.0;
    if (req.contains("budget")) {
        budget = req["budget"].is_null() ? std::numeric_limits<double>::infinity() : get_or(req, "budget", 1000.0);
    }
    return {201, svc.create_session(get_or(req, "alpha", 0.05), get_or(req, "eta", 0.95), budget, solver)};
}

HttpResponse propose(SessionService& svc, const std::string& id, const Json& req) {
    HypothesisSpec spec;
    std::vector<HypothesisSpec> future;
    std::size_t horizon = get_or<std::size_t>(req, "horizon", 1);
    if (req.contains("spec")) {
        for (const auto& [k, _] : req.items()) {
            if (k != "spec" && k != "horizon" && k != "future_specs") throw ValidationError("unknown field '" + k + "'");
        }
        from_json(req["spec"], spec);
    } else {
        Json flat = req;
        flat.erase("horizon");
        flat.erase("future_specs");
        from_json(flat, spec);
    }
    if (req.contains("future_specs")) {
        if (!req["future_specs"].is_array()) throw ValidationError("future_specs must be an array");
        for (const auto& f : req["future_specs"]) {
            HypothesisSpec s;
            from_json(f, s);
            future.push_back(s);
        }
    }
    return {201, svc.propose_test(id, spec, horizon, future)};
}

HttpResponse outcome(SessionService& svc, const std::string& id, const std::string& pid, const Json& req) {
    for (const auto& [k, _] : req.items()) {
        if (k != "p_value" && k != "rejected") throw ValidationError("unknown field '" + k + "'");
    }
    OutcomeReport r;
    if (req.contains("p_value") && !req["p_value"].is_null()) {
        if (!req["p_value"].is_number()) throw ValidationError("p_value must be a number");
        r.p_value = req["p_value"].get<double>();
    }
    if (req.contains("rejected") && !req["rejected"].is_null()) {
        if (!req["rejected"].is_boolean()) throw ValidationError("rejected must be a boolean");
        r.rejected = req["rejected"].get<bool>();
    }
    return {200, svc.record_outcome(id, pid, r)};
}

HttpResponse route(SessionService& svc, const std::string& method, const std::string& path, const std::string& body) {
    static const std::regex sessions("^/sessions/?$");
    static const std::regex session("^/sessions/([^/]+)$");
    static const std::regex history("^/sessions/([^/]+)/history$");
    static const std::regex proposals("^/sessions/([^/]+)/proposals$");
    static const std::regex action("^/sessions/([^/]+)/proposals/([^/]+)/(outcome|skip)$");
    std::smatch m;
    if (std::regex_match(path, sessions)) {
        if (method == "POST") return create(svc, parse_body(body));
    } else if (std::regex_match(path, m, session)) {
        if (method == "GET") return {200, svc.get_session(m[1])};
    } else if (std::regex_match(path, m, history)) {
        if (method == "GET") return {200, svc.get_history(m[1])};
    } else if (std::regex_match(path, m, proposals)) {
        if (method == "POST") return propose(svc, m[1], parse_body(body));
    } else if (std::regex_match(path, m, action)) {
        if (method == "POST") {
            if (m[3] == "outcome") return outcome(svc, m[1], m[2], parse_body(body));
            return {200, svc.skip_test(m[1], m[2])};
        }
    } else {
        return {404, error_body("not_found", "no route for " + path)};
    }
    return {405, error_body("method_not_allowed", method + " is not supported on " + path)};
}

}  // namespace

HttpResponse handle_request(SessionService& service, const std::string& method, const std::string& path,
                            const std::string& body) {
    try {
        return route(service, method, path, body);
    } catch (const ValidationError& e) {
        return {400, error_body("validation_error", e.what())};
    } catch (const NotFoundError& e) {
        return {404, error_body("not_found", e.what())};
    } catch (const ConflictError& e) {
        return {409, error_body("conflict", e.what())};
    } catch (const DegeneratePriorError& e) {
        return {422, error_body("degenerate_prior", e.what())};
    } catch (const InsufficientWealthError& e) {
        return {422, error_body("insufficient_wealth", e.what())};
    } catch (const DomainError& e) {
        return {422, error_body("domain_error", e.what())};
    } catch (const InfeasibleError& e) {
        return {422, error_body("infeasible", e.what())};
    } catch (const StorageError& e) {
        return {500, error_body("storage_error", e.what())};
    } catch (const std::exception& e) {
        return {500, error_body("internal_error", e.what())};
    }
}

HttpService::HttpService(SessionService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        const HttpResponse r = handle_request(service_, req.method, req.path, req.body);
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(r.body.dump(), "application/json");
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
    server_->Put(".*", handler);
    server_->Delete(".*", handler);
    server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
}

HttpService::~HttpService() {
    stop();
}

bool HttpService::listen(const std::string& host, int port) {
    return server_->listen(host, port);
}

int HttpService::bind_any_port(const std::string& host) {
    return server_->bind_to_any_port(host);
}

bool HttpService::serve() {
    return server_->listen_after_bind();
}

void HttpService::stop() {
    if (server_) server_->stop();
}

void HttpService::wait_until_ready() const {
    server_->wait_until_ready();
}

}  // namespace caero
