#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/gateway.hpp"

namespace modem {

/// Where routing decisions come from: a native model file, a remote
/// encoder endpoint, or neither (forced-domain-only operation).
struct ClassifierSource {
    std::optional<std::string> model_path;
    std::optional<std::string> remote_endpoint;
};

/// Everything `modem serve` needs, loaded from one JSON file. See
/// configs/ for complete examples.
struct GatewayConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8080;
    ClassifierSource classifier;
    GatewayOptions options;
    std::string usage_log_path = "usage_log.jsonl";
    std::vector<ExpertProfile> experts;
    std::vector<PromptTemplate> templates;

    static GatewayConfig from_json(const nlohmann::json& j);
    /// Throws IoError on unreadable files and ConfigError on structural
    /// problems in the document.
    static GatewayConfig load(const std::filesystem::path& path);

    /// Validates and assembles the expert registry.
    ExpertRegistry make_registry() const;

    /// Loads the native model or constructs the remote adapter; null
    /// when no classifier is configured.
    std::shared_ptr<const Classifier> make_classifier() const;
};

}  // namespace modem
