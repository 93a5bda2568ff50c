#pragma once

#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "modem/gateway.hpp"

namespace httplib {
class Server;
}

namespace modem {

/// Parses the chat wire format, including the "modem" extension object
/// ({"force_domain": name, "mcq": bool}). Throws std::invalid_argument
/// or UnknownDomainError on violations.
ChatRequest parse_chat_request(const nlohmann::json& j);

/// Chat-completions response body with the routing metadata extension.
nlohmann::json chat_response_to_json(const ChatResponse& response);

/// HTTP front of a Gateway: POST /v1/chat/completions, GET /healthz,
/// GET /metrics, GET /v1/routing/preview?text=...
class GatewayServer {
public:
    /// port 0 binds an ephemeral port (see port() after start()).
    GatewayServer(Gateway& gateway, std::string bind_address, int port);
    ~GatewayServer();

    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    /// Binds and serves on a background thread. Throws BindError when
    /// the address is unavailable.
    void start();

    /// Graceful stop; in-flight requests finish first.
    void stop();

    int port() const { return bound_port_; }

private:
    void register_routes();

    Gateway& gateway_;
    std::string bind_address_;
    int requested_port_;
    int bound_port_ = -1;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace modem
