#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/backend.hpp"
#include "modem/domain.hpp"
#include "modem/types.hpp"

namespace modem {

struct SeedSet {
    Domain domain = Domain::Other;
    std::vector<std::string> seeds;

    void validate() const;  // non-empty list, no blank seeds
};

struct SynthJob {
    SeedSet seed_set;
    std::uint32_t generations_per_seed = 100;
    double temperature = 1.0;
    BackendConfig generator;
};

/// Per-seed outcome; failed seeds do not abort the job.
struct SeedOutcome {
    std::size_t seed_index = 0;
    std::uint64_t requested = 0;
    std::uint64_t parsed = 0;
    std::optional<std::string> error;  // transport/empty-generation note

    nlohmann::json to_json() const;
};

struct SynthReport {
    std::uint64_t requested = 0;  // seeds x generations_per_seed
    std::uint64_t parsed = 0;     // questions before dedup
    std::uint64_t kept = 0;       // after dedup
    std::uint64_t attrition = 0;  // requested - kept
    std::vector<SeedOutcome> per_seed;

    nlohmann::json to_json() const;
};

struct SynthResult {
    std::vector<LabeledExample> examples;
    SynthReport report;
};

/// Deterministic generation prompt embedding the seed verbatim, the
/// domain name, and the requested count; instructs one question per
/// line.
std::string render_generation_prompt(const std::string& seed, Domain domain, std::uint32_t n);

/// Expands every seed through the generator backend, parses one question
/// per non-empty line, labels with the job domain (origin synthetic,
/// source "synth:<Domain>"), and dedupes normalized exact matches.
/// Backend failures and empty generations are recorded per seed; the job
/// always runs to completion.
SynthResult run_job(const SynthJob& job);

/// Reads seed files (JSONL {"domain", "text"}), grouping rows into one
/// SeedSet per domain present, in domain-ordinal order.
std::vector<SeedSet> read_seed_sets(const std::string& path);

}  // namespace modem
