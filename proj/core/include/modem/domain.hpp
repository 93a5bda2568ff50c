#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace modem {

/// The closed five-way domain taxonomy. Ordinals are fixed and used for
/// deterministic tie-breaking wherever scores are equal.
enum class Domain : std::uint8_t {
    Math = 0,
    Health = 1,
    Science = 2,
    Coding = 3,
    Other = 4,
};

inline constexpr std::size_t kDomainCount = 5;

inline constexpr std::array<Domain, kDomainCount> kAllDomains = {
    Domain::Math, Domain::Health, Domain::Science, Domain::Coding, Domain::Other,
};

constexpr int ordinal(Domain d) { return static_cast<int>(d); }

/// Canonical display name ("Math", "Health", ...).
std::string_view domain_name(Domain d);

/// Case-insensitive parse over the five canonical names.
/// Throws UnknownDomainError for anything else.
Domain parse_domain(std::string_view name);

/// Non-throwing variant; returns false on unknown names.
bool try_parse_domain(std::string_view name, Domain& out);

}  // namespace modem
