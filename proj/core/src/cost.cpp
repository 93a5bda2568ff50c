#include "modem/cost.hpp"

#include <algorithm>
#include <cstdio>

#include "modem/errors.hpp"

namespace modem {

namespace {

/// tokens x micro-USD-per-million-tokens = pico-USD, exactly.
PicoUsd token_cost(std::uint64_t tokens, MicroUsdPerMillion price) {
    __int128 wide = static_cast<__int128>(tokens) * price;
    if (wide > static_cast<__int128>(INT64_MAX)) {
        throw ConfigError("cost overflows the accounting range");
    }
    return static_cast<PicoUsd>(wide);
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

PicoUsd price_request(const PriceSchedule& prices, std::uint64_t prompt_tokens,
                      std::uint64_t completion_tokens) {
    PicoUsd prompt_cost = token_cost(prompt_tokens, prices.input_micro + prices.router_micro);
    PicoUsd completion_cost =
        token_cost(completion_tokens, prices.effective_output() + prices.router_micro);
    if (prompt_cost > INT64_MAX - completion_cost) {
        throw ConfigError("cost overflows the accounting range");
    }
    return prompt_cost + completion_cost;
}

std::uint64_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

CostReport aggregate(const std::vector<UsageRecord>& records, const PricingDirectory& pricing) {
    CostReport report;
    __int128 blended_numer = 0;  // sum of prompt_tokens x (input + router), micro
    std::uint64_t blended_denom = 0;

    for (const UsageRecord& record : records) {
        auto it = pricing.by_model_id.find(record.expert_model);
        if (it == pricing.by_model_id.end()) {
            throw UnknownExpertError(record.expert_model);
        }
        const PriceSchedule& prices = it->second;

        DomainCostLine& line = report.per_domain[record.domain];
        line.requests += 1;
        line.prompt_tokens += record.prompt_tokens;
        line.completion_tokens += record.completion_tokens;
        line.cost += record.cost;

        report.total_cost += record.cost;
        report.total_requests += 1;

        blended_numer += static_cast<__int128>(record.prompt_tokens) *
                         (prices.input_micro + prices.router_micro);
        blended_denom += record.prompt_tokens;
    }

    if (blended_denom > 0) {
        // Half-up to whole micro-USD per million tokens.
        __int128 rounded = (blended_numer + blended_denom / 2) / blended_denom;
        report.blended_input_price = static_cast<MicroUsdPerMillion>(rounded);
    }
    return report;
}

nlohmann::json CostReport::to_json() const {
    nlohmann::json domains = nlohmann::json::object();
    for (const auto& [domain, line] : per_domain) {
        domains[std::string(domain_name(domain))] = {
            {"requests", line.requests},
            {"prompt_tokens", line.prompt_tokens},
            {"completion_tokens", line.completion_tokens},
            {"cost_usd", format_usd(line.cost)},
        };
    }
    nlohmann::json j = {
        {"per_domain", domains},
        {"total_requests", total_requests},
        {"total_cost_usd", format_usd(total_cost)},
    };
    if (blended_input_price) {
        j["blended_input_price_usd_per_million"] = format_usd_per_million(*blended_input_price);
    } else {
        j["blended_input_price_usd_per_million"] = nullptr;
    }
    return j;
}

std::string render_cost_report(const CostReport& report) {
    std::string out;
    out += pad_right("Domain", 10) + pad_left("Requests", 10) + pad_left("Prompt", 12) +
           pad_left("Completion", 12) + pad_left("Cost (USD)", 16) + "\n";
    for (Domain d : kAllDomains) {
        auto it = report.per_domain.find(d);
        if (it == report.per_domain.end()) continue;
        const DomainCostLine& line = it->second;
        out += pad_right(std::string(domain_name(d)), 10) +
               pad_left(std::to_string(line.requests), 10) +
               pad_left(std::to_string(line.prompt_tokens), 12) +
               pad_left(std::to_string(line.completion_tokens), 12) +
               pad_left(format_usd(line.cost), 16) + "\n";
    }
    out += pad_right("Total", 10) + pad_left(std::to_string(report.total_requests), 10) +
           pad_left("", 12) + pad_left("", 12) + pad_left(format_usd(report.total_cost), 16) +
           "\n";
    if (report.blended_input_price) {
        out += "Blended input price: $" + format_usd_per_million(*report.blended_input_price) +
               " per million tokens\n";
    }
    return out;
}

ComparisonRow ComparisonRow::from_json(const nlohmann::json& j) {
    ComparisonRow row;
    row.name = j.at("name").get<std::string>();
    if (j.contains("accuracy") && !j["accuracy"].is_null()) {
        row.accuracy = j["accuracy"].is_string() ? j["accuracy"].get<std::string>()
                                                 : j["accuracy"].dump();
    } else {
        row.accuracy = "-";
    }
    row.parameters = j.value("parameters", std::string("-"));
    row.input_price = micro_per_million_from_json(j.at("input_price_usd_per_million"));
    return row;
}

nlohmann::json ComparisonRow::to_json() const {
    return {
        {"name", name},
        {"accuracy", accuracy},
        {"parameters", parameters},
        {"input_price_usd_per_million", format_usd_per_million(input_price)},
    };
}

std::string render_comparison_table(const std::vector<ComparisonRow>& rows) {
    std::size_t name_width = std::string("Model").size();
    for (const ComparisonRow& row : rows) name_width = std::max(name_width, row.name.size());

    std::string out;
    out += pad_right("Model", name_width + 2) + pad_left("Accuracy (%)", 14) +
           pad_left("Parameters", 12) + pad_left("Input Tokens ($/million tokens)", 33) + "\n";
    for (const ComparisonRow& row : rows) {
        out += pad_right(row.name, name_width + 2) + pad_left(row.accuracy, 14) +
               pad_left(row.parameters, 12) +
               pad_left(format_usd_per_million(row.input_price), 33) + "\n";
    }
    return out;
}

}  // namespace modem
