#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modem/types.hpp"

namespace modem {

/// Connection settings for one chat-completions backend. `id` names the
/// backend in logs and selects its bearer-token environment variable
/// (MODEM_BACKEND_<ID>_TOKEN, id uppercased, non-alphanumerics mapped
/// to '_').
struct BackendConfig {
    std::string id;
    std::string endpoint_url;
    std::string model_id;
    std::uint32_t timeout_ms = 120000;
    std::uint32_t max_retries = 2;
    std::uint32_t retry_backoff_ms = 500;  // doubles per retry

    void validate() const;
};

struct BackendResponse {
    std::string content;
    TokenUsage usage;
    std::string model_id;
    double latency_ms = 0.0;
};

struct HealthStatus {
    bool healthy = false;
    double latency_ms = 0.0;
};

/// Environment variable name carrying the bearer token for a backend id.
std::string backend_token_env_name(const std::string& backend_id);

/// HTTP client for one expert endpoint. Shareable across threads; each
/// call opens its own connection.
class ExpertClient {
public:
    explicit ExpertClient(BackendConfig config);

    /// POST /v1/chat/completions. Retries timeouts, transport errors, and
    /// 5xx responses up to max_retries with exponential backoff; throws
    /// BackendError once attempts are exhausted or on a non-retryable
    /// failure. When the backend omits usage, token counts are estimated
    /// from byte lengths and flagged estimated=true.
    BackendResponse complete(const std::vector<ChatMessage>& messages, double temperature,
                             std::optional<std::uint32_t> max_tokens) const;

    /// GET /healthz; healthy iff 2xx within the configured timeout.
    /// Never throws — failures come back as healthy=false.
    HealthStatus health_check() const;

    const BackendConfig& config() const { return config_; }

private:
    BackendResponse attempt_complete(const std::string& body) const;

    BackendConfig config_;
};

}  // namespace modem
