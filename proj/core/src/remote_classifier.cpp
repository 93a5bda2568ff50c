#include "modem/remote_classifier.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "modem/errors.hpp"

namespace modem {

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

}  // namespace

RemoteClassifier::RemoteClassifier(std::string endpoint_url, std::uint32_t timeout_ms)
    : endpoint_url_(std::move(endpoint_url)), timeout_ms_(timeout_ms) {
    if (endpoint_url_.empty()) throw ConfigError("remote classifier endpoint is empty");
}

RoutingDecision RemoteClassifier::classify(std::string_view text) const {
    auto [base, prefix] = split_endpoint(endpoint_url_);
    httplib::Client client(base);
    auto timeout = std::chrono::milliseconds(timeout_ms_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    // The configured URL is the classify endpoint itself; a bare
    // host:port defaults to /classify.
    std::string path = prefix.empty() ? "/classify" : prefix;
    nlohmann::json request = {{"text", std::string(text)}};
    httplib::Result result = client.Post(path, request.dump(), "application/json");
    if (!result) {
        throw ClassifierUnavailableError("remote classifier unreachable at " + endpoint_url_);
    }
    if (result->status < 200 || result->status >= 300) {
        throw ClassifierUnavailableError("remote classifier returned HTTP " +
                                         std::to_string(result->status));
    }

    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("remote classifier response is not valid JSON");
    }
    if (!payload.contains("scores") || !payload["scores"].is_object()) {
        throw ProtocolError("remote classifier response lacks a scores object");
    }
    const nlohmann::json& scores_json = payload["scores"];
    if (scores_json.size() != kDomainCount) {
        throw ProtocolError("remote classifier scores must cover exactly the five domains");
    }

    std::array<double, kDomainCount> scores{};
    double sum = 0.0;
    for (Domain d : kAllDomains) {
        std::string name(domain_name(d));
        if (!scores_json.contains(name) || !scores_json[name].is_number()) {
            throw ProtocolError("remote classifier scores missing domain '" + name + "'");
        }
        double p = scores_json[name].get<double>();
        if (!std::isfinite(p) || p < 0.0) {
            throw ProtocolError("remote classifier score for '" + name + "' is not a probability");
        }
        scores[ordinal(d)] = p;
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-6) {
        throw ProtocolError("remote classifier scores sum to " + std::to_string(sum) +
                            ", outside the 1e-6 tolerance");
    }
    for (double& p : scores) p /= sum;

    return RoutingDecision::from_scores(scores);
}

}  // namespace modem
