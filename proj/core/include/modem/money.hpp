#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace modem {

/// Prices are kept as integer micro-USD per million tokens and request
/// costs as integer pico-USD (1e-12 USD). Both are exact decimals, so
/// report tables are bit-stable and cost arithmetic is drift-free.
using MicroUsdPerMillion = std::int64_t;
using PicoUsd = std::int64_t;

/// Accepts a JSON number (e.g. 0.88) or decimal string ("0.88") with up to
/// six fractional digits. Throws ConfigError on negatives or bad syntax.
MicroUsdPerMillion micro_per_million_from_json(const nlohmann::json& v);

/// Exact decimal parse of a non-negative USD-per-million value.
MicroUsdPerMillion parse_micro_per_million(std::string_view decimal);

/// Exact decimal string for a cost, at least two fractional digits
/// ("0.91", "10.06", "0.000031").
std::string format_usd(PicoUsd pico);

/// Exact inverse of format_usd (up to twelve fractional digits).
PicoUsd parse_usd(std::string_view decimal);

/// Renders a price in USD per million tokens ("0.92").
std::string format_usd_per_million(MicroUsdPerMillion micro);

inline double usd(PicoUsd pico) { return static_cast<double>(pico) * 1e-12; }

inline double usd_per_million(MicroUsdPerMillion micro) {
    return static_cast<double>(micro) * 1e-6;
}

}  // namespace modem
