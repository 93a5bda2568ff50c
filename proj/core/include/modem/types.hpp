#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/domain.hpp"
#include "modem/money.hpp"

namespace modem {

enum class Origin : std::uint8_t { Curated, Synthetic, Handcrafted };

std::string_view origin_name(Origin o);
Origin parse_origin(std::string_view name);

/// One (text, domain, source-dataset) training or evaluation record.
struct LabeledExample {
    std::string text;
    Domain domain = Domain::Other;
    std::string source;
    Origin origin = Origin::Curated;
};

/// Outcome of classifying one prompt. Scores always cover the five
/// domains and sum to one; confidence is the winning score.
struct RoutingDecision {
    Domain domain = Domain::Math;
    double confidence = 0.0;
    std::array<double, kDomainCount> scores{};
    bool overridden = false;

    /// Argmax decision with ties broken by lowest ordinal.
    static RoutingDecision from_scores(const std::array<double, kDomainCount>& scores);
    /// One-hot decision for a client-forced domain.
    static RoutingDecision forced(Domain d);

    nlohmann::json to_json() const;
};

struct PriceSchedule {
    MicroUsdPerMillion input_micro = 0;
    std::optional<MicroUsdPerMillion> output_micro;  // defaults to input when unset
    MicroUsdPerMillion router_micro = 30000;         // $0.03 per million tokens

    MicroUsdPerMillion effective_output() const { return output_micro.value_or(input_micro); }

    static PriceSchedule from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// One expert backend: which domain it serves, where it lives, and what
/// it costs.
struct ExpertProfile {
    /// Stable identifier, e.g. "math". Also selects the bearer-token
    /// environment variable MODEM_BACKEND_<ID>_TOKEN.
    std::string id;
    Domain domain = Domain::Other;
    std::string model_id;
    std::string endpoint_url;
    PriceSchedule prices;
    std::string prompt_template_id = "default";
};

enum class Role : std::uint8_t { System, User, Assistant };

std::string_view role_name(Role r);
Role parse_role(std::string_view name);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<std::uint32_t> max_tokens;
    std::optional<Domain> forced_domain;
    bool mcq = false;

    /// The text the router classifies: content of the last user message.
    const std::string& routing_text() const;

    /// Throws std::invalid_argument when the message list or parameter
    /// ranges violate the wire contract.
    void validate() const;
};

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    bool estimated = false;  // true when the backend omitted usage
};

struct ChatResponse {
    std::string content;
    TokenUsage usage;
    RoutingDecision routing;
    std::string expert_model;
    PicoUsd cost = 0;
};

/// Append-only accounting record for one served request. The cost field
/// is always the cost module's value for the same inputs.
struct UsageRecord {
    std::string request_id;
    Domain domain = Domain::Other;
    std::string expert_model;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    PicoUsd cost = 0;
    std::chrono::system_clock::time_point timestamp;

    nlohmann::json to_json() const;
    static UsageRecord from_json(const nlohmann::json& j);
};

std::string format_utc(std::chrono::system_clock::time_point tp);
std::chrono::system_clock::time_point parse_utc(const std::string& iso8601);

}  // namespace modem
