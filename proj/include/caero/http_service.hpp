#pragma once

#include <memory>
#include <string>

#include "caero/json_io.hpp"
#include "caero/session.hpp"

namespace httplib {
class Server;
}

namespace caero {

struct HttpResponse {
    int status = 200;
    Json body;
};

// Routes one request; errors become {code, message, detail} with a matching status.
HttpResponse handle_request(SessionService& service, const std::string& method, const std::string& path,
                            const std::string& body);

class HttpService {
public:
    explicit HttpService(SessionService& service);
    ~HttpService();

    // Binds and serves until stop(). Returns false if the address cannot be bound.
    bool listen(const std::string& host, int port);
    // Binds to a free port and returns it; call serve() afterwards.
    int bind_any_port(const std::string& host);
    bool serve();
    void stop();
    void wait_until_ready() const;

private:
    SessionService& service_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace caero
