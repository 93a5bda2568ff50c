#pragma once

#include <cstdint>
#include <vector>

#include "modem/types.hpp"

namespace modem::testkit {

/// Synthetic question corpus with pairwise-disjoint domain vocabularies
/// plus a shared filler pool, so classifier accuracy is tunable rather
/// than trivially 100%.
struct DeskCorpusOptions {
    std::size_t per_domain = 200;  // >= 10
    std::uint64_t seed = 0;
    /// Probability that a token comes from the shared filler pool
    /// instead of the domain's signal vocabulary.
    double shared_fraction = 0.2;
};

/// Deterministic given options; texts are unique after normalization.
std::vector<LabeledExample> make_desk_corpus(const DeskCorpusOptions& options);

inline std::vector<LabeledExample> make_desk_corpus(std::size_t per_domain,
                                                    std::uint64_t seed) {
    DeskCorpusOptions options;
    options.per_domain = per_domain;
    options.seed = seed;
    return make_desk_corpus(options);
}

}  // namespace modem::testkit
