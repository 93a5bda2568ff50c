#include "modem/types.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <stdexcept>

#include "modem/errors.hpp"
#include "modem/text.hpp"

namespace modem {

std::string_view origin_name(Origin o) {
    switch (o) {
        case Origin::Curated: return "curated";
        case Origin::Synthetic: return "synthetic";
        case Origin::Handcrafted: return "handcrafted";
    }
    return "curated";
}

Origin parse_origin(std::string_view name) {
    if (name == "curated") return Origin::Curated;
    if (name == "synthetic") return Origin::Synthetic;
    if (name == "handcrafted") return Origin::Handcrafted;
    throw ConfigError("unknown origin: '" + std::string(name) + "'");
}

RoutingDecision RoutingDecision::from_scores(const std::array<double, kDomainCount>& scores) {
    RoutingDecision d;
    d.scores = scores;
    d.overridden = false;
    // Strict greater-than over ordinal order breaks ties toward the
    // lowest ordinal.
    std::size_t best = 0;
    for (std::size_t i = 1; i < kDomainCount; ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    d.domain = static_cast<Domain>(best);
    d.confidence = scores[best];
    return d;
}

RoutingDecision RoutingDecision::forced(Domain dom) {
    RoutingDecision d;
    d.scores.fill(0.0);
    d.scores[static_cast<std::size_t>(ordinal(dom))] = 1.0;
    d.domain = dom;
    d.confidence = 1.0;
    d.overridden = true;
    return d;
}

nlohmann::json RoutingDecision::to_json() const {
    nlohmann::json s = nlohmann::json::object();
    for (Domain dom : kAllDomains) {
        s[std::string(domain_name(dom))] = scores[static_cast<std::size_t>(ordinal(dom))];
    }
    return nlohmann::json{
        {"domain", std::string(domain_name(domain))},
        {"confidence", confidence},
        {"scores", std::move(s)},
        {"overridden", overridden},
    };
}

PriceSchedule PriceSchedule::from_json(const nlohmann::json& j) {
    PriceSchedule p;
    if (!j.contains("input_usd_per_million")) {
        throw ConfigError("price schedule missing input_usd_per_million");
    }
    p.input_micro = micro_per_million_from_json(j.at("input_usd_per_million"));
    if (j.contains("output_usd_per_million") && !j.at("output_usd_per_million").is_null()) {
        p.output_micro = micro_per_million_from_json(j.at("output_usd_per_million"));
    }
    if (j.contains("router_usd_per_million")) {
        p.router_micro = micro_per_million_from_json(j.at("router_usd_per_million"));
    }
    return p;
}

nlohmann::json PriceSchedule::to_json() const {
    nlohmann::json j{
        {"input_usd_per_million", usd_per_million(input_micro)},
        {"router_usd_per_million", usd_per_million(router_micro)},
    };
    if (output_micro) {
        j["output_usd_per_million"] = usd_per_million(*output_micro);
    }
    return j;
}

std::string_view role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    throw std::invalid_argument("unknown message role: '" + std::string(name) + "'");
}

const std::string& ChatRequest::routing_text() const {
    static const std::string empty;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::User) {
            return it->content;
        }
    }
    return empty;
}

void ChatRequest::validate() const {
    if (messages.empty()) {
        throw std::invalid_argument("messages must be non-empty");
    }
    if (messages.back().role != Role::User) {
        throw std::invalid_argument("last message must have role 'user'");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw std::invalid_argument("temperature must be in [0, 2]");
    }
    if (max_tokens && *max_tokens == 0) {
        throw std::invalid_argument("max_tokens must be positive");
    }
}

nlohmann::json UsageRecord::to_json() const {
    return nlohmann::json{
        {"request_id", request_id},
        {"domain", std::string(domain_name(domain))},
        {"expert_model", expert_model},
        {"prompt_tokens", prompt_tokens},
        {"completion_tokens", completion_tokens},
        // Exact decimal string keeps the accounting drift-free.
        {"cost_usd", format_usd(cost)},
        {"timestamp", format_utc(timestamp)},
    };
}

UsageRecord UsageRecord::from_json(const nlohmann::json& j) {
    UsageRecord r;
    r.request_id = j.value("request_id", "");
    r.domain = parse_domain(j.at("domain").get<std::string>());
    r.expert_model = j.at("expert_model").get<std::string>();
    r.prompt_tokens = j.at("prompt_tokens").get<std::uint64_t>();
    r.completion_tokens = j.at("completion_tokens").get<std::uint64_t>();
    const auto& cost = j.at("cost_usd");
    if (cost.is_string()) {
        r.cost = parse_usd(cost.get<std::string>());
    } else {
        r.cost = static_cast<PicoUsd>(std::llround(cost.get<double>() * 1e12));
    }
    if (j.contains("timestamp")) {
        r.timestamp = parse_utc(j.at("timestamp").get<std::string>());
    }
    return r;
}

std::string format_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::chrono::system_clock::time_point parse_utc(const std::string& iso8601) {
    std::tm tm{};
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(iso8601.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &s) != 6) {
        throw ConfigError("bad timestamp: '" + iso8601 + "'");
    }
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return std::chrono::system_clock::from_time_t(timegm(&tm));
}

}  // namespace modem
