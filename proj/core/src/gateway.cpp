#include "modem/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "modem/errors.hpp"
#include "modem/text.hpp"

namespace modem {

namespace {

constexpr std::string_view kPlaceholder = "{question}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

void PromptTemplate::validate() const {
    if (id.empty()) throw ConfigError("prompt template id is empty");
    if (count_occurrences(body, kPlaceholder) != 1) {
        throw ConfigError("prompt template '" + id +
                          "' must contain {question} exactly once");
    }
}

PromptTemplate PromptTemplate::default_template() {
    PromptTemplate tmpl;
    tmpl.id = "default";
    tmpl.body =
        "Solve the following problem step by step, explaining each step clearly to ensure "
        "the reasoning process is well-justified.\n\n{question}";
    tmpl.mcq_suffix = "Clearly state which multiple choice option you pick.";
    return tmpl;
}

std::string render_prompt(const PromptTemplate& tmpl, const std::string& question, bool mcq) {
    std::string rendered = tmpl.body;
    rendered.replace(rendered.find(kPlaceholder), kPlaceholder.size(), question);
    if (mcq && !tmpl.mcq_suffix.empty()) {
        rendered += "\n\n";
        rendered += tmpl.mcq_suffix;
    }
    return rendered;
}

ExpertRegistry::ExpertRegistry(std::vector<ExpertProfile> experts,
                               std::vector<PromptTemplate> templates) {
    // The stock template backs every expert that declares no override; a
    // supplied template with id "default" replaces it wholesale.
    const bool default_supplied =
        std::any_of(templates.begin(), templates.end(),
                    [](const PromptTemplate& t) { return t.id == "default"; });
    if (!default_supplied) templates.push_back(PromptTemplate::default_template());
    for (PromptTemplate& tmpl : templates) {
        tmpl.validate();
        if (!templates_.emplace(tmpl.id, std::move(tmpl)).second) {
            throw ConfigError("duplicate prompt template id");
        }
    }

    std::array<bool, kDomainCount> seen{};
    for (ExpertProfile& profile : experts) {
        std::size_t idx = ordinal(profile.domain);
        if (seen[idx]) {
            throw ConfigError("registry declares domain '" +
                              std::string(domain_name(profile.domain)) + "' twice");
        }
        if (profile.id.empty()) throw ConfigError("expert id is empty");
        if (profile.model_id.empty() || profile.endpoint_url.empty()) {
            throw ConfigError("expert '" + profile.id + "' needs model_id and endpoint_url");
        }
        if (!templates_.count(profile.prompt_template_id)) {
            throw ConfigError("expert '" + profile.id + "' references unknown template '" +
                              profile.prompt_template_id + "'");
        }
        seen[idx] = true;
        experts_[idx] = std::move(profile);
    }
    for (Domain d : kAllDomains) {
        if (!seen[ordinal(d)]) {
            throw ConfigError("registry is missing an expert for domain '" +
                              std::string(domain_name(d)) + "'");
        }
    }
}

const PromptTemplate& ExpertRegistry::template_for(const ExpertProfile& profile) const {
    return templates_.at(profile.prompt_template_id);
}

PricingDirectory ExpertRegistry::pricing() const {
    PricingDirectory directory;
    for (const ExpertProfile& profile : experts_) {
        directory.by_model_id.emplace(profile.model_id, profile.prices);
    }
    return directory;
}

nlohmann::json GatewayMetrics::to_json() const {
    nlohmann::json per_domain = nlohmann::json::object();
    for (Domain d : kAllDomains) {
        per_domain[std::string(domain_name(d))] = routed_by_domain[ordinal(d)];
    }
    return {
        {"requests_total", requests_total},
        {"responses_ok", responses_ok},
        {"responses_error", responses_error},
        {"previews_total", previews_total},
        {"routed_by_domain", per_domain},
        {"total_cost_usd", format_usd(total_cost)},
    };
}

nlohmann::json Gateway::AggregatedHealth::to_json() const {
    nlohmann::json backends = nlohmann::json::object();
    for (Domain d : kAllDomains) {
        const HealthStatus& status = per_domain[ordinal(d)];
        backends[std::string(domain_name(d))] = {
            {"healthy", status.healthy},
            {"latency_ms", status.latency_ms},
        };
    }
    return {{"healthy", overall}, {"backends", backends}};
}

Gateway::Gateway(ExpertRegistry registry, std::shared_ptr<const Classifier> classifier,
                 GatewayOptions options, UsageLog* usage_log)
    : registry_(std::move(registry)),
      classifier_(std::move(classifier)),
      options_(options),
      usage_log_(usage_log) {
    for (Domain d : kAllDomains) {
        const ExpertProfile& profile = registry_.expert(d);
        BackendConfig config;
        config.id = profile.id;
        config.endpoint_url = profile.endpoint_url;
        config.model_id = profile.model_id;
        config.timeout_ms = options_.timeout_ms;
        config.max_retries = options_.max_retries;
        config.retry_backoff_ms = options_.retry_backoff_ms;
        clients_[ordinal(d)] = std::make_unique<ExpertClient>(std::move(config));
    }
}

RoutingDecision Gateway::route(const ChatRequest& request) const {
    if (request.forced_domain) {
        return RoutingDecision::forced(*request.forced_domain);
    }
    if (!classifier_) {
        throw ClassifierUnavailableError("no classifier configured and no forced domain");
    }
    std::string_view text = truncate_chars(request.routing_text(), options_.classify_max_chars);
    RoutingDecision decision = classifier_->classify(text);
    if (options_.min_confidence && decision.confidence < *options_.min_confidence &&
        decision.domain != Domain::Other) {
        // Low-confidence abstention: hand the request to the generalist.
        decision.domain = Domain::Other;
        decision.confidence = decision.scores[ordinal(Domain::Other)];
        decision.overridden = true;
    }
    return decision;
}

RoutingDecision Gateway::preview(std::string_view text) const {
    if (!classifier_) {
        throw ClassifierUnavailableError("no classifier configured");
    }
    RoutingDecision decision =
        classifier_->classify(truncate_chars(text, options_.classify_max_chars));
    {
        std::lock_guard<std::mutex> lock(metrics_mutex_);
        metrics_.previews_total += 1;
    }
    return decision;
}

ChatResponse Gateway::handle(const ChatRequest& request) {
    request.validate();
    {
        std::lock_guard<std::mutex> lock(metrics_mutex_);
        metrics_.requests_total += 1;
    }

    RoutingDecision decision;
    try {
        decision = route(request);
    } catch (const ClassifierUnavailableError& e) {
        std::lock_guard<std::mutex> lock(metrics_mutex_);
        metrics_.responses_error += 1;
        throw DispatchError(503, e.what());
    }
    {
        std::lock_guard<std::mutex> lock(metrics_mutex_);
        metrics_.routed_by_domain[ordinal(decision.domain)] += 1;
    }

    const ExpertProfile& expert = registry_.expert(decision.domain);
    const PromptTemplate& tmpl = registry_.template_for(expert);

    // Dispatch the conversation as-is except for the routed question,
    // which is wrapped in the expert's template.
    std::vector<ChatMessage> messages = request.messages;
    messages.back().content = render_prompt(tmpl, request.routing_text(), request.mcq);

    BackendResponse backend_response;
    try {
        backend_response = clients_[ordinal(decision.domain)]->complete(
            messages, request.temperature, request.max_tokens);
    } catch (const BackendError& e) {
        std::lock_guard<std::mutex> lock(metrics_mutex_);
        metrics_.responses_error += 1;
        throw DispatchError(502, e.what(), decision);
    }

    ChatResponse response;
    response.content = backend_response.content;
    response.usage = backend_response.usage;
    response.routing = decision;
    response.expert_model = expert.model_id;
    response.cost = price_request(expert.prices, backend_response.usage.prompt_tokens,
                                  backend_response.usage.completion_tokens);

    std::uint64_t sequence = next_request_id_.fetch_add(1);
    char request_id[32];
    std::snprintf(request_id, sizeof(request_id), "req-%08llu",
                  static_cast<unsigned long long>(sequence));

    if (usage_log_) {
        UsageRecord record;
        record.request_id = request_id;
        record.domain = decision.domain;
        record.expert_model = expert.model_id;
        record.prompt_tokens = backend_response.usage.prompt_tokens;
        record.completion_tokens = backend_response.usage.completion_tokens;
        record.cost = response.cost;
        record.timestamp = std::chrono::system_clock::now();
        usage_log_->append(record);
    }

    {
        std::lock_guard<std::mutex> lock(metrics_mutex_);
        metrics_.responses_ok += 1;
        metrics_.total_cost += response.cost;
    }
    return response;
}

Gateway::AggregatedHealth Gateway::health() const {
    AggregatedHealth aggregated;
    aggregated.overall = true;
    for (Domain d : kAllDomains) {
        HealthStatus status = clients_[ordinal(d)]->health_check();
        aggregated.overall = aggregated.overall && status.healthy;
        aggregated.per_domain[ordinal(d)] = status;
    }
    return aggregated;
}

GatewayMetrics Gateway::metrics() const {
    std::lock_guard<std::mutex> lock(metrics_mutex_);
    return metrics_;
}

}  // namespace modem
