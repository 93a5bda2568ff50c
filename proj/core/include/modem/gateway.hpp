#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/backend.hpp"
#include "modem/classifier.hpp"
#include "modem/cost.hpp"
#include "modem/domain.hpp"
#include "modem/errors.hpp"
#include "modem/types.hpp"
#include "modem/usage_log.hpp"

namespace modem {

/// Chain-of-thought wrapper applied to routed questions. The body must
/// contain "{question}" exactly once; the MCQ sentence is appended only
/// for multiple-choice requests.
struct PromptTemplate {
    std::string id = "default";
    std::string body;
    std::string mcq_suffix;

    void validate() const;  // throws ConfigError unless {question} appears exactly once

    /// Step-by-step template used when a config names no other.
    static PromptTemplate default_template();
};

std::string render_prompt(const PromptTemplate& tmpl, const std::string& question, bool mcq);

/// The five experts plus their prompt templates. Immutable once
/// validated; shared freely across request handlers.
class ExpertRegistry {
public:
    ExpertRegistry(std::vector<ExpertProfile> experts, std::vector<PromptTemplate> templates);

    const ExpertProfile& expert(Domain d) const { return experts_[ordinal(d)]; }
    const PromptTemplate& template_for(const ExpertProfile& profile) const;

    /// Model-id -> price schedule view for cost aggregation.
    PricingDirectory pricing() const;

private:
    std::array<ExpertProfile, kDomainCount> experts_;
    std::map<std::string, PromptTemplate> templates_;
};

/// Request-handling failure with an HTTP-visible class: 502 for upstream
/// expert failures, 503 when no classifier is available. The routing
/// decision rides along when one was made before the failure.
struct DispatchError : Error {
    DispatchError(int http_status_, std::string message,
                  std::optional<RoutingDecision> routing_ = std::nullopt)
        : Error(std::move(message)), http_status(http_status_), routing(std::move(routing_)) {}

    int http_status;
    std::optional<RoutingDecision> routing;
};

struct GatewayOptions {
    /// Classification input truncation, in characters. n-gram evidence
    /// saturates long before this; bounding it keeps preview latency flat.
    std::size_t classify_max_chars = 4096;
    /// Optional abstention: decisions below this confidence fall back to
    /// the Other expert (marked overridden). Off by default — pure argmax.
    std::optional<double> min_confidence;
    /// Shared connection settings for all expert backends.
    std::uint32_t timeout_ms = 120000;
    std::uint32_t max_retries = 2;
    std::uint32_t retry_backoff_ms = 500;
};

struct GatewayMetrics {
    std::uint64_t requests_total = 0;
    std::uint64_t responses_ok = 0;
    std::uint64_t responses_error = 0;
    std::uint64_t previews_total = 0;
    std::array<std::uint64_t, kDomainCount> routed_by_domain{};
    PicoUsd total_cost = 0;

    nlohmann::json to_json() const;
};

/// The router service core: classify, wrap, dispatch, account. One
/// instance serves many concurrent requests; the usage log and metrics
/// are the only mutable state.
class Gateway {
public:
    /// usage_log may be null (no accounting persistence, e.g. previews
    /// only); classifier may be null, in which case routing requires
    /// forced domains and anything else raises DispatchError(503).
    Gateway(ExpertRegistry registry, std::shared_ptr<const Classifier> classifier,
            GatewayOptions options, UsageLog* usage_log);

    /// Forced domain wins; otherwise classifies the last user message,
    /// truncated to options.classify_max_chars characters.
    RoutingDecision route(const ChatRequest& request) const;

    /// Classify-only path for GET /v1/routing/preview: no dispatch, no
    /// usage record.
    RoutingDecision preview(std::string_view text) const;

    /// Full pipeline: route -> render prompt -> expert completion ->
    /// price -> usage record. Throws DispatchError on classifier (503)
    /// and upstream (502) failures; failed dispatches write no record.
    ChatResponse handle(const ChatRequest& request);

    /// Probes every expert's /healthz. overall is the conjunction.
    struct AggregatedHealth {
        bool overall = false;
        std::array<HealthStatus, kDomainCount> per_domain{};
        nlohmann::json to_json() const;
    };
    AggregatedHealth health() const;

    GatewayMetrics metrics() const;

    const ExpertRegistry& registry() const { return registry_; }
    const GatewayOptions& options() const { return options_; }

private:
    ExpertRegistry registry_;
    std::shared_ptr<const Classifier> classifier_;
    GatewayOptions options_;
    UsageLog* usage_log_;
    std::array<std::unique_ptr<ExpertClient>, kDomainCount> clients_;

    mutable std::mutex metrics_mutex_;
    mutable GatewayMetrics metrics_;
    std::atomic<std::uint64_t> next_request_id_{1};
};

}  // namespace modem
