#include "modem/config.hpp"

#include <fstream>

#include "modem/classifier.hpp"
#include "modem/errors.hpp"
#include "modem/remote_classifier.hpp"

namespace modem {

namespace {

ExpertProfile expert_from_json(const nlohmann::json& j, MicroUsdPerMillion default_router) {
    ExpertProfile profile;
    profile.id = j.at("id").get<std::string>();
    profile.domain = parse_domain(j.at("domain").get<std::string>());
    profile.model_id = j.at("model_id").get<std::string>();
    profile.endpoint_url = j.at("endpoint").get<std::string>();
    profile.prices.input_micro = micro_per_million_from_json(j.at("input_price_usd_per_million"));
    if (j.contains("output_price_usd_per_million") &&
        !j["output_price_usd_per_million"].is_null()) {
        profile.prices.output_micro =
            micro_per_million_from_json(j["output_price_usd_per_million"]);
    }
    profile.prices.router_micro =
        j.contains("router_price_usd_per_million")
            ? micro_per_million_from_json(j["router_price_usd_per_million"])
            : default_router;
    if (j.contains("prompt_template")) {
        profile.prompt_template_id = j["prompt_template"].get<std::string>();
    }
    return profile;
}

PromptTemplate template_from_json(const nlohmann::json& j) {
    PromptTemplate tmpl;
    tmpl.id = j.at("id").get<std::string>();
    tmpl.body = j.at("body").get<std::string>();
    tmpl.mcq_suffix = j.value("mcq_suffix", PromptTemplate::default_template().mcq_suffix);
    return tmpl;
}

}  // namespace

GatewayConfig GatewayConfig::from_json(const nlohmann::json& j) {
    GatewayConfig config;
    config.bind_address = j.value("bind_address", config.bind_address);
    config.port = j.value("port", config.port);
    if (config.port < 0 || config.port > 65535) {
        throw ConfigError("port must lie in [0, 65535]");
    }
    config.usage_log_path = j.value("usage_log", config.usage_log_path);

    if (j.contains("classifier")) {
        const nlohmann::json& c = j["classifier"];
        if (c.contains("model_path")) config.classifier.model_path = c["model_path"];
        if (c.contains("remote_endpoint")) {
            config.classifier.remote_endpoint = c["remote_endpoint"];
        }
        if (config.classifier.model_path && config.classifier.remote_endpoint) {
            throw ConfigError("classifier declares both model_path and remote_endpoint");
        }
    }

    config.options.classify_max_chars =
        j.value("classify_max_chars", config.options.classify_max_chars);
    if (config.options.classify_max_chars == 0) {
        throw ConfigError("classify_max_chars must be positive");
    }
    if (j.contains("min_confidence") && !j["min_confidence"].is_null()) {
        double threshold = j["min_confidence"].get<double>();
        if (!(threshold >= 0.0 && threshold <= 1.0)) {
            throw ConfigError("min_confidence must lie in [0,1]");
        }
        config.options.min_confidence = threshold;
    }
    if (j.contains("backend")) {
        const nlohmann::json& b = j["backend"];
        config.options.timeout_ms = b.value("timeout_ms", config.options.timeout_ms);
        config.options.max_retries = b.value("max_retries", config.options.max_retries);
        config.options.retry_backoff_ms =
            b.value("retry_backoff_ms", config.options.retry_backoff_ms);
        if (config.options.timeout_ms == 0) throw ConfigError("timeout_ms must be positive");
        if (config.options.retry_backoff_ms == 0) {
            throw ConfigError("retry_backoff_ms must be positive");
        }
    }

    MicroUsdPerMillion default_router =
        j.contains("router_price_usd_per_million")
            ? micro_per_million_from_json(j["router_price_usd_per_million"])
            : PriceSchedule{}.router_micro;

    if (!j.contains("experts") || !j["experts"].is_array()) {
        throw ConfigError("config must declare an experts array");
    }
    try {
        for (const nlohmann::json& e : j["experts"]) {
            config.experts.push_back(expert_from_json(e, default_router));
        }
        if (j.contains("templates")) {
            for (const nlohmann::json& t : j["templates"]) {
                config.templates.push_back(template_from_json(t));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config;
}

GatewayConfig GatewayConfig::load(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

ExpertRegistry GatewayConfig::make_registry() const {
    return ExpertRegistry(experts, templates);
}

std::shared_ptr<const Classifier> GatewayConfig::make_classifier() const {
    if (classifier.model_path) {
        return std::make_shared<NativeClassifier>(load_model(*classifier.model_path));
    }
    if (classifier.remote_endpoint) {
        return std::make_shared<RemoteClassifier>(*classifier.remote_endpoint);
    }
    return nullptr;
}

}  // namespace modem
