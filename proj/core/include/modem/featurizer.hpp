#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace modem {

inline constexpr std::uint32_t kHashDimensions = 1u << 20;

/// Sparse L2-normalized hashed feature vector. Entries are sorted by
/// feature index; empty text (or text with no tokens) yields no entries.
struct FeatureVector {
    std::vector<std::pair<std::uint32_t, double>> entries;

    bool empty() const { return entries.empty(); }
    double l2_norm() const;
};

/// Hashed n-gram featurization: lowercased tokens (see tokenize) produce
/// word unigrams, word bigrams, and character trigrams over the
/// space-joined token string padded with one space on each side. Each
/// n-gram is tagged by kind, hashed with FNV-1a 64, mapped into 2^20
/// buckets with a sign taken from the hash's top bit, term-frequency
/// weighted, and L2-normalized.
FeatureVector featurize(std::string_view text);

}  // namespace modem
