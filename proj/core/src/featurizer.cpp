#include "modem/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "modem/text.hpp"

namespace modem {

namespace {

constexpr char kUnigramTag[] = "u:";
constexpr char kBigramTag[] = "b:";
constexpr char kTrigramTag[] = "c:";
// Separates bigram parts so "ab c" and "a bc" hash differently.
constexpr char kJoin = '\x1f';

void add_feature(std::unordered_map<std::uint32_t, double>& acc, std::string_view feature) {
    const std::uint64_t h = fnv1a64(feature);
    const auto index = static_cast<std::uint32_t>(h & (kHashDimensions - 1));
    const double sign = (h >> 63) ? -1.0 : 1.0;
    acc[index] += sign;
}

}  // namespace

double FeatureVector::l2_norm() const {
    double sum = 0.0;
    for (const auto& [index, value] : entries) {
        sum += value * value;
    }
    return std::sqrt(sum);
}

FeatureVector featurize(std::string_view text) {
    const std::vector<std::string> tokens = tokenize(text);
    FeatureVector out;
    if (tokens.empty()) {
        return out;
    }

    std::unordered_map<std::uint32_t, double> acc;
    std::string scratch;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        scratch.assign(kUnigramTag);
        scratch += tokens[i];
        add_feature(acc, scratch);
        if (i + 1 < tokens.size()) {
            scratch.assign(kBigramTag);
            scratch += tokens[i];
            scratch += kJoin;
            scratch += tokens[i + 1];
            add_feature(acc, scratch);
        }
    }

    std::string joined = " ";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        joined += tokens[i];
        joined += ' ';
    }
    for (std::size_t i = 0; i + 3 <= joined.size(); ++i) {
        scratch.assign(kTrigramTag);
        scratch.append(joined, i, 3);
        add_feature(acc, scratch);
    }

    out.entries.reserve(acc.size());
    for (const auto& [index, value] : acc) {
        if (value != 0.0) {  // opposite-sign collisions can cancel exactly
            out.entries.emplace_back(index, value);
        }
    }
    std::sort(out.entries.begin(), out.entries.end());

    double norm_sq = 0.0;
    for (const auto& [index, value] : out.entries) {
        norm_sq += value * value;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [index, value] : out.entries) {
            value *= inv;
        }
    }
    return out;
}

}  // namespace modem
