#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/domain.hpp"
#include "modem/money.hpp"
#include "modem/types.hpp"

namespace modem {

/// cost = prompt_tokens x (input + router) + completion_tokens x
/// (output + router), all per million tokens. The output price falls
/// back to the input price when unset; the router surcharge applies to
/// every token (see PriceSchedule). Exact integer arithmetic in
/// pico-dollars; throws ConfigError on overflow.
PicoUsd price_request(const PriceSchedule& prices, std::uint64_t prompt_tokens,
                      std::uint64_t completion_tokens);

/// ceil(byte_length / 4). Fallback when a backend omits usage counts;
/// results are flagged estimated wherever they flow.
std::uint64_t estimate_tokens(std::string_view text);

/// Input prices keyed by model id, used by aggregate to compute the
/// blended per-million price. Built from a gateway registry or directly
/// in tests.
struct PricingDirectory {
    std::map<std::string, PriceSchedule> by_model_id;
};

struct DomainCostLine {
    std::uint64_t requests = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    PicoUsd cost = 0;
};

struct CostReport {
    std::map<Domain, DomainCostLine> per_domain;
    /// Prompt-token-weighted mean of (input + router) prices, absent when
    /// the log contains no prompt tokens.
    std::optional<MicroUsdPerMillion> blended_input_price;
    PicoUsd total_cost = 0;
    std::uint64_t total_requests = 0;

    nlohmann::json to_json() const;
};

/// Groups usage records by domain and computes totals plus the blended
/// input price. Throws UnknownExpertError when a record names a model id
/// absent from the directory.
CostReport aggregate(const std::vector<UsageRecord>& records, const PricingDirectory& pricing);

/// Plain-text per-domain cost table ending in a Total row.
std::string render_cost_report(const CostReport& report);

/// One row of the published-style comparison table. Accuracy and
/// parameter count are free-form display strings since competitor rows
/// mix measured values, ranges, and footnote markers.
struct ComparisonRow {
    std::string name;
    std::string accuracy;    // e.g. "88.6", "-" when unknown
    std::string parameters;  // e.g. "405B", "8x22B", "<73B"
    MicroUsdPerMillion input_price = 0;

    static ComparisonRow from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Renders rows in the Model / Accuracy / Parameters / Input-price
/// layout used by the cost comparison tables.
std::string render_comparison_table(const std::vector<ComparisonRow>& rows);

}  // namespace modem
