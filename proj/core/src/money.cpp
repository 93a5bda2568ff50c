#include "modem/money.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "modem/errors.hpp"

namespace modem {

namespace {

// Parses "<int>[.<frac>]" into an integer scaled by 10^scale_digits.
std::int64_t parse_scaled_decimal(std::string_view s, int scale_digits,
                                  const char* what) {
    if (s.empty()) {
        throw ConfigError(std::string(what) + ": empty decimal");
    }
    std::size_t i = 0;
    if (s[i] == '-') {
        throw ConfigError(std::string(what) + ": negative value '" + std::string(s) + "'");
    }
    if (s[i] == '+') ++i;
    std::int64_t int_part = 0;
    bool any_digit = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
        any_digit = true;
        if (int_part > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
            throw ConfigError(std::string(what) + ": value out of range");
        }
        int_part = int_part * 10 + (s[i] - '0');
    }
    std::int64_t frac = 0;
    int frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            any_digit = true;
            if (frac_digits < scale_digits) {
                frac = frac * 10 + (s[i] - '0');
                ++frac_digits;
            } else if (s[i] != '0') {
                throw ConfigError(std::string(what) + ": more than " +
                                  std::to_string(scale_digits) + " fractional digits in '" +
                                  std::string(s) + "'");
            }
        }
    }
    if (!any_digit || i != s.size()) {
        throw ConfigError(std::string(what) + ": malformed decimal '" + std::string(s) + "'");
    }
    for (; frac_digits < scale_digits; ++frac_digits) {
        frac *= 10;
    }
    std::int64_t scale = 1;
    for (int k = 0; k < scale_digits; ++k) scale *= 10;
    if (int_part > (std::numeric_limits<std::int64_t>::max() - frac) / scale) {
        throw ConfigError(std::string(what) + ": value out of range");
    }
    return int_part * scale + frac;
}

std::string format_scaled_decimal(std::int64_t value, int scale_digits, int min_frac) {
    std::int64_t scale = 1;
    for (int k = 0; k < scale_digits; ++k) scale *= 10;
    const bool negative = value < 0;
    const std::uint64_t mag = negative ? -static_cast<std::uint64_t>(value)
                                       : static_cast<std::uint64_t>(value);
    const std::uint64_t int_part = mag / static_cast<std::uint64_t>(scale);
    std::uint64_t frac = mag % static_cast<std::uint64_t>(scale);

    std::string frac_str(static_cast<std::size_t>(scale_digits), '0');
    for (int k = scale_digits - 1; k >= 0; --k) {
        frac_str[static_cast<std::size_t>(k)] = static_cast<char>('0' + frac % 10);
        frac /= 10;
    }
    while (static_cast<int>(frac_str.size()) > min_frac && frac_str.back() == '0') {
        frac_str.pop_back();
    }
    std::string out = negative ? "-" : "";
    out += std::to_string(int_part);
    if (!frac_str.empty()) {
        out += '.';
        out += frac_str;
    }
    return out;
}

}  // namespace

MicroUsdPerMillion parse_micro_per_million(std::string_view decimal) {
    return parse_scaled_decimal(decimal, 6, "price");
}

MicroUsdPerMillion micro_per_million_from_json(const nlohmann::json& v) {
    if (v.is_string()) {
        return parse_micro_per_million(v.get<std::string>());
    }
    if (v.is_number()) {
        const double d = v.get<double>();
        if (!std::isfinite(d) || d < 0) {
            throw ConfigError("price must be a finite non-negative number");
        }
        return static_cast<MicroUsdPerMillion>(std::llround(d * 1e6));
    }
    throw ConfigError("price must be a number or decimal string");
}

std::string format_usd(PicoUsd pico) { return format_scaled_decimal(pico, 12, 2); }

PicoUsd parse_usd(std::string_view decimal) {
    return parse_scaled_decimal(decimal, 12, "cost");
}

std::string format_usd_per_million(MicroUsdPerMillion micro) {
    return format_scaled_decimal(micro, 6, 2);
}

}  // namespace modem
