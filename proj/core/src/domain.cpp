#include "modem/domain.hpp"

#include <cctype>

#include "modem/errors.hpp"

namespace modem {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

std::string_view domain_name(Domain d) {
    switch (d) {
        case Domain::Math: return "Math";
        case Domain::Health: return "Health";
        case Domain::Science: return "Science";
        case Domain::Coding: return "Coding";
        case Domain::Other: return "Other";
    }
    return "Other";
}

bool try_parse_domain(std::string_view name, Domain& out) {
    const std::string lowered = ascii_lower(name);
    for (Domain d : kAllDomains) {
        if (lowered == ascii_lower(domain_name(d))) {
            out = d;
            return true;
        }
    }
    return false;
}

Domain parse_domain(std::string_view name) {
    Domain d;
    if (!try_parse_domain(name, d)) {
        throw UnknownDomainError(std::string(name));
    }
    return d;
}

}  // namespace modem
