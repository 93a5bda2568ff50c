#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace modem::testkit {

/// One scripted behaviour. `match` is a substring test against the
/// concatenated message contents of the incoming request; an unset match
/// hits everything. `max_uses` retires the rule after that many hits,
/// which is how 500-then-200 retry sequences are scripted.
struct MockRule {
    std::optional<std::string> match;
    std::string response_content;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    int status = 200;
    std::uint32_t delay_ms = 0;
    std::optional<std::uint32_t> max_uses;
    bool omit_usage = false;

    static MockRule from_json(const nlohmann::json& j);
};

struct MockScript {
    std::vector<MockRule> rules;
    int health_status = 200;
    std::uint32_t health_delay_ms = 0;

    /// First matching rule wins, so an unconditional, unlimited rule
    /// anywhere but last would shadow the rest; validate rejects that.
    void validate() const;

    static MockScript from_json(const nlohmann::json& j);

    /// Catch-all script answering `content` with the given usage.
    static MockScript echo(std::string content, std::uint64_t prompt_tokens = 10,
                           std::uint64_t completion_tokens = 2);
};

struct RecordedRequest {
    std::string path;
    std::string body;
    nlohmann::json json;
    std::string joined_content;  // all message contents, newline-joined
};

/// Deterministic chat-completions backend for tests: scripted responses,
/// lossless ordered request recording, a /healthz endpoint, and nothing
/// else. Always binds an ephemeral loopback port.
class MockServer {
public:
    explicit MockServer(MockScript script);
    ~MockServer();

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    void start();
    void stop();

    int port() const { return port_; }
    std::string endpoint_url() const;

    std::vector<RecordedRequest> requests() const;
    std::size_t request_count() const;

private:
    void handle_completion(const std::string& body, int& status_out,
                           std::string& response_out);

    MockScript script_;
    std::vector<std::uint32_t> uses_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = -1;

    mutable std::mutex mutex_;
    std::vector<RecordedRequest> requests_;
};

}  // namespace modem::testkit
