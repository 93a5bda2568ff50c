#include "modem/server.hpp"

#include <httplib.h>

#include "modem/errors.hpp"

namespace modem {

namespace {

nlohmann::json error_body(const std::string& message, const std::string& type) {
    return {{"error", {{"message", message}, {"type", type}}}};
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

ChatRequest parse_chat_request(const nlohmann::json& j) {
    ChatRequest request;
    if (!j.contains("messages") || !j["messages"].is_array()) {
        throw std::invalid_argument("request must carry a messages array");
    }
    for (const nlohmann::json& m : j["messages"]) {
        if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
            !m["content"].is_string()) {
            throw std::invalid_argument("each message needs string role and content");
        }
        ChatMessage message;
        message.role = parse_role(m["role"].get<std::string>());
        message.content = m["content"].get<std::string>();
        request.messages.push_back(std::move(message));
    }
    if (j.contains("temperature") && !j["temperature"].is_null()) {
        if (!j["temperature"].is_number()) {
            throw std::invalid_argument("temperature must be a number");
        }
        request.temperature = j["temperature"].get<double>();
    }
    if (j.contains("max_tokens") && !j["max_tokens"].is_null()) {
        auto value = j["max_tokens"].get<std::int64_t>();
        if (value <= 0) throw std::invalid_argument("max_tokens must be positive");
        request.max_tokens = static_cast<std::uint32_t>(value);
    }
    if (j.contains("modem") && j["modem"].is_object()) {
        const nlohmann::json& ext = j["modem"];
        if (ext.contains("force_domain") && !ext["force_domain"].is_null()) {
            request.forced_domain = parse_domain(ext["force_domain"].get<std::string>());
        }
        if (ext.contains("mcq")) request.mcq = ext["mcq"].get<bool>();
    }
    request.validate();
    return request;
}

nlohmann::json chat_response_to_json(const ChatResponse& response) {
    nlohmann::json modem_ext = response.routing.to_json();
    modem_ext["cost_usd"] = format_usd(response.cost);
    modem_ext["expert_model"] = response.expert_model;

    return {
        {"object", "chat.completion"},
        {"model", response.expert_model},
        {"choices",
         {{
             {"index", 0},
             {"message", {{"role", "assistant"}, {"content", response.content}}},
             {"finish_reason", "stop"},
         }}},
        {"usage",
         {
             {"prompt_tokens", response.usage.prompt_tokens},
             {"completion_tokens", response.usage.completion_tokens},
             {"total_tokens",
              response.usage.prompt_tokens + response.usage.completion_tokens},
             {"estimated", response.usage.estimated},
         }},
        {"modem", modem_ext},
    };
}

GatewayServer::GatewayServer(Gateway& gateway, std::string bind_address, int port)
    : gateway_(gateway),
      bind_address_(std::move(bind_address)),
      requested_port_(port),
      server_(std::make_unique<httplib::Server>()) {
    register_routes();
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::register_routes() {
    server_->Post("/v1/chat/completions",
                  [this](const httplib::Request& req, httplib::Response& res) {
                      nlohmann::json body;
                      try {
                          body = nlohmann::json::parse(req.body);
                      } catch (const nlohmann::json::exception&) {
                          send_json(res, 400, error_body("request body is not valid JSON",
                                                         "invalid_request"));
                          return;
                      }
                      try {
                          ChatRequest request = parse_chat_request(body);
                          ChatResponse response = gateway_.handle(request);
                          send_json(res, 200, chat_response_to_json(response));
                      } catch (const DispatchError& e) {
                          nlohmann::json payload =
                              error_body(e.what(), e.http_status == 503
                                                       ? "classifier_unavailable"
                                                       : "upstream_failure");
                          if (e.routing) payload["modem"] = e.routing->to_json();
                          send_json(res, e.http_status, payload);
                      } catch (const UnknownDomainError& e) {
                          send_json(res, 400, error_body(e.what(), "invalid_request"));
                      } catch (const std::invalid_argument& e) {
                          send_json(res, 400, error_body(e.what(), "invalid_request"));
                      } catch (const std::exception& e) {
                          send_json(res, 500, error_body(e.what(), "internal"));
                      }
                  });

    server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        Gateway::AggregatedHealth health = gateway_.health();
        send_json(res, health.overall ? 200 : 503, health.to_json());
    });

    server_->Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, gateway_.metrics().to_json());
    });

    server_->Get("/v1/routing/preview",
                 [this](const httplib::Request& req, httplib::Response& res) {
                     if (!req.has_param("text")) {
                         send_json(res, 400,
                                   error_body("missing query parameter 'text'",
                                              "invalid_request"));
                         return;
                     }
                     try {
                         RoutingDecision decision =
                             gateway_.preview(req.get_param_value("text"));
                         send_json(res, 200, decision.to_json());
                     } catch (const ClassifierUnavailableError& e) {
                         send_json(res, 503, error_body(e.what(), "classifier_unavailable"));
                     } catch (const std::exception& e) {
                         send_json(res, 500, error_body(e.what(), "internal"));
                     }
                 });
}

void GatewayServer::start() {
    if (requested_port_ == 0) {
        bound_port_ = server_->bind_to_any_port(bind_address_);
        if (bound_port_ <= 0) {
            throw BindError("cannot bind " + bind_address_ + " on an ephemeral port");
        }
    } else {
        if (!server_->bind_to_port(bind_address_, requested_port_)) {
            throw BindError("cannot bind " + bind_address_ + ":" +
                            std::to_string(requested_port_));
        }
        bound_port_ = requested_port_;
    }

    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void GatewayServer::stop() {
    if (server_ && server_->is_running()) {
        server_->stop();
    }
    if (thread_.joinable()) {
        thread_.join();
    }
}

}  // namespace modem
