#include "modem/backend.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "modem/cost.hpp"
#include "modem/errors.hpp"

namespace modem {

namespace {

/// Splits "http://host:port/prefix" into the client base and the path
/// prefix (possibly empty). httplib clients take only the base.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

httplib::Client make_client(const BackendConfig& config) {
    auto [base, prefix] = split_endpoint(config.endpoint_url);
    (void)prefix;
    httplib::Client client(base);
    auto timeout = std::chrono::milliseconds(config.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (const char* token = std::getenv(backend_token_env_name(config.id).c_str());
        token && *token) {
        client.set_bearer_token_auth(token);
    }
    return client;
}

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

std::string backend_token_env_name(const std::string& backend_id) {
    std::string env = "MODEM_BACKEND_";
    for (char c : backend_id) {
        unsigned char uc = static_cast<unsigned char>(c);
        env += std::isalnum(uc) ? static_cast<char>(std::toupper(uc)) : '_';
    }
    env += "_TOKEN";
    return env;
}

void BackendConfig::validate() const {
    if (endpoint_url.empty()) throw ConfigError("backend endpoint_url is empty");
    if (model_id.empty()) throw ConfigError("backend model_id is empty");
    if (timeout_ms == 0) throw ConfigError("backend timeout_ms must be positive");
    if (retry_backoff_ms == 0) throw ConfigError("backend retry_backoff_ms must be positive");
}

ExpertClient::ExpertClient(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
}

BackendResponse ExpertClient::attempt_complete(const std::string& body) const {
    auto [base, prefix] = split_endpoint(config_.endpoint_url);
    httplib::Client client = make_client(config_);

    auto start = std::chrono::steady_clock::now();
    httplib::Result result = client.Post(prefix + "/v1/chat/completions", body,
                                         "application/json");
    double elapsed = elapsed_ms_since(start);

    if (!result) {
        // httplib reports read-deadline expiry as a plain read error, so
        // classify by elapsed time against the configured timeout.
        bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                         elapsed + 5.0 >= static_cast<double>(config_.timeout_ms);
        throw BackendError(timed_out ? BackendErrorKind::Timeout : BackendErrorKind::Transport,
                           std::string("backend '") + config_.id + "' " +
                               (timed_out ? "timed out" : "transport failure") + " after " +
                               std::to_string(static_cast<long>(elapsed)) + " ms");
    }

    if (result->status < 200 || result->status >= 300) {
        throw BackendError(BackendErrorKind::Upstream,
                           "backend '" + config_.id + "' returned HTTP " +
                               std::to_string(result->status),
                           result->status, result->body);
    }

    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception&) {
        throw BackendError(BackendErrorKind::MalformedUpstream,
                           "backend '" + config_.id + "' returned unparseable JSON",
                           result->status, result->body);
    }

    BackendResponse response;
    response.latency_ms = elapsed;
    try {
        response.content = payload.at("choices").at(0).at("message").at("content")
                               .get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw BackendError(BackendErrorKind::MalformedUpstream,
                           "backend '" + config_.id +
                               "' response lacks choices[0].message.content",
                           result->status, result->body);
    }
    response.model_id = payload.value("model", config_.model_id);

    if (payload.contains("usage") && payload["usage"].is_object() &&
        payload["usage"].contains("prompt_tokens") &&
        payload["usage"].contains("completion_tokens")) {
        response.usage.prompt_tokens = payload["usage"]["prompt_tokens"].get<std::uint64_t>();
        response.usage.completion_tokens =
            payload["usage"]["completion_tokens"].get<std::uint64_t>();
        response.usage.estimated = false;
    } else {
        std::size_t prompt_bytes = 0;
        nlohmann::json request = nlohmann::json::parse(body);
        for (const auto& message : request["messages"]) {
            prompt_bytes += message["content"].get_ref<const std::string&>().size();
        }
        response.usage.prompt_tokens = (prompt_bytes + 3) / 4;  // ceil(bytes/4)
        response.usage.completion_tokens = estimate_tokens(response.content);
        response.usage.estimated = true;
    }
    return response;
}

BackendResponse ExpertClient::complete(const std::vector<ChatMessage>& messages,
                                       double temperature,
                                       std::optional<std::uint32_t> max_tokens) const {
    if (messages.empty()) throw std::invalid_argument("message list is empty");

    nlohmann::json body_json = {
        {"model", config_.model_id},
        {"temperature", temperature},
    };
    nlohmann::json message_array = nlohmann::json::array();
    for (const ChatMessage& message : messages) {
        message_array.push_back(
            {{"role", std::string(role_name(message.role))}, {"content", message.content}});
    }
    body_json["messages"] = std::move(message_array);
    if (max_tokens) body_json["max_tokens"] = *max_tokens;
    std::string body = body_json.dump();

    for (std::uint32_t attempt = 0;; ++attempt) {
        try {
            return attempt_complete(body);
        } catch (const BackendError& err) {
            if (!err.retryable() || attempt >= config_.max_retries) throw;
            auto backoff = std::chrono::milliseconds(
                static_cast<std::uint64_t>(config_.retry_backoff_ms) << attempt);
            std::this_thread::sleep_for(backoff);
        }
    }
}

HealthStatus ExpertClient::health_check() const {
    auto [base, prefix] = split_endpoint(config_.endpoint_url);
    httplib::Client client = make_client(config_);

    auto start = std::chrono::steady_clock::now();
    httplib::Result result = client.Get(prefix + "/healthz");
    HealthStatus status;
    status.latency_ms = elapsed_ms_since(start);
    status.healthy = result && result->status >= 200 && result->status < 300;
    return status;
}

}  // namespace modem
