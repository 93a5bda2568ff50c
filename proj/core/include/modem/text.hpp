#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace modem {

/// FNV-1a 64-bit over raw bytes. Seedless and platform-independent, so
/// hashed-feature fixtures are portable across implementations.
std::uint64_t fnv1a64(std::string_view bytes);

/// Strips leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

/// Lowercases ASCII letters; other bytes pass through untouched.
std::string ascii_lower(std::string_view s);

/// Canonical text key for deduplication: ASCII-lowercased with every
/// whitespace run collapsed to a single space and ends trimmed.
std::string normalize_text(std::string_view s);

/// Tokenizes for the featurizer: ASCII-lowercases, then splits on ASCII
/// whitespace/punctuation/control characters and on Unicode whitespace and
/// general/CJK punctuation codepoints. Bytes of other non-ASCII codepoints
/// are kept inside tokens verbatim.
std::vector<std::string> tokenize(std::string_view text);

/// Truncates to at most max_bytes without splitting a UTF-8 sequence.
std::string_view truncate_utf8(std::string_view s, std::size_t max_bytes);

/// Truncates to at most max_chars UTF-8 code points (invalid bytes count
/// as one character each).
std::string_view truncate_chars(std::string_view s, std::size_t max_chars);

}  // namespace modem
