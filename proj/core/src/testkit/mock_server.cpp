#include "modem/testkit/mock_server.hpp"

#include <chrono>

#include <httplib.h>

#include "modem/errors.hpp"

namespace modem::testkit {

MockRule MockRule::from_json(const nlohmann::json& j) {
    MockRule rule;
    if (j.contains("match") && !j["match"].is_null()) {
        rule.match = j["match"].get<std::string>();
    }
    rule.response_content = j.value("response_content", std::string());
    if (j.contains("usage") && j["usage"].is_array() && j["usage"].size() == 2) {
        rule.prompt_tokens = j["usage"][0].get<std::uint64_t>();
        rule.completion_tokens = j["usage"][1].get<std::uint64_t>();
    }
    rule.status = j.value("status", 200);
    rule.delay_ms = j.value("delay_ms", 0u);
    if (j.contains("max_uses") && !j["max_uses"].is_null()) {
        rule.max_uses = j["max_uses"].get<std::uint32_t>();
    }
    rule.omit_usage = j.value("omit_usage", false);
    return rule;
}

void MockScript::validate() const {
    if (rules.empty()) throw ConfigError("mock script has no rules");
    for (std::size_t i = 0; i + 1 < rules.size(); ++i) {
        if (!rules[i].match && !rules[i].max_uses) {
            throw ConfigError("unlimited catch-all rule at position " + std::to_string(i) +
                              " shadows later rules; it must terminate the list");
        }
    }
}

MockScript MockScript::from_json(const nlohmann::json& j) {
    MockScript script;
    for (const nlohmann::json& r : j.at("rules")) script.rules.push_back(MockRule::from_json(r));
    script.health_status = j.value("health_status", 200);
    script.health_delay_ms = j.value("health_delay_ms", 0u);
    script.validate();
    return script;
}

MockScript MockScript::echo(std::string content, std::uint64_t prompt_tokens,
                            std::uint64_t completion_tokens) {
    MockRule rule;
    rule.response_content = std::move(content);
    rule.prompt_tokens = prompt_tokens;
    rule.completion_tokens = completion_tokens;
    MockScript script;
    script.rules.push_back(std::move(rule));
    return script;
}

MockServer::MockServer(MockScript script)
    : script_(std::move(script)),
      uses_(script_.rules.size(), 0),
      server_(std::make_unique<httplib::Server>()) {
    script_.validate();

    server_->Post("/v1/chat/completions",
                  [this](const httplib::Request& req, httplib::Response& res) {
                      int status = 200;
                      std::string body;
                      handle_completion(req.body, status, body);
                      res.status = status;
                      res.set_content(body, "application/json");
                  });

    server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        if (script_.health_delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(script_.health_delay_ms));
        }
        res.status = script_.health_status;
        res.set_content("{\"ok\":true}", "application/json");
    });
}

MockServer::~MockServer() { stop(); }

void MockServer::handle_completion(const std::string& body, int& status_out,
                                   std::string& response_out) {
    RecordedRequest recorded;
    recorded.path = "/v1/chat/completions";
    recorded.body = body;
    std::string joined;
    try {
        recorded.json = nlohmann::json::parse(body);
        if (recorded.json.contains("messages")) {
            for (const auto& m : recorded.json["messages"]) {
                if (!joined.empty()) joined += '\n';
                joined += m.value("content", std::string());
            }
        }
    } catch (const nlohmann::json::exception&) {
        recorded.json = nullptr;
    }
    recorded.joined_content = joined;

    const MockRule* selected = nullptr;
    std::uint32_t delay_ms = 0;
    {
        // Matching, use-counting, and recording share one lock so
        // concurrent requests see a consistent rule sequence.
        std::lock_guard<std::mutex> lock(mutex_);
        requests_.push_back(std::move(recorded));
        for (std::size_t i = 0; i < script_.rules.size(); ++i) {
            const MockRule& rule = script_.rules[i];
            if (rule.max_uses && uses_[i] >= *rule.max_uses) continue;
            if (rule.match && joined.find(*rule.match) == std::string::npos) continue;
            uses_[i] += 1;
            selected = &rule;
            break;
        }
    }

    if (!selected) {
        status_out = 500;
        response_out = "{\"error\":\"no mock rule matched\"}";
        return;
    }
    delay_ms = selected->delay_ms;
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));

    if (selected->status < 200 || selected->status >= 300) {
        status_out = selected->status;
        response_out = "{\"error\":\"scripted failure\"}";
        return;
    }

    nlohmann::json payload = {
        {"object", "chat.completion"},
        {"model", "mock"},
        {"choices",
         {{
             {"index", 0},
             {"message", {{"role", "assistant"}, {"content", selected->response_content}}},
             {"finish_reason", "stop"},
         }}},
    };
    if (!selected->omit_usage) {
        payload["usage"] = {
            {"prompt_tokens", selected->prompt_tokens},
            {"completion_tokens", selected->completion_tokens},
            {"total_tokens", selected->prompt_tokens + selected->completion_tokens},
        };
    }
    status_out = selected->status;
    response_out = payload.dump();
}

void MockServer::start() {
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw BindError("mock server cannot bind a loopback port");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void MockServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::string MockServer::endpoint_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
}

std::vector<RecordedRequest> MockServer::requests() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_;
}

std::size_t MockServer::request_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_.size();
}

}  // namespace modem::testkit
