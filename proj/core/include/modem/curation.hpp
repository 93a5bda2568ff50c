#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/domain.hpp"
#include "modem/types.hpp"

namespace modem {

/// Default per-dataset caps: 30,000 for the focused domains, 100,000 for
/// the broad ones.
std::uint64_t default_dataset_cap(Domain d);

struct DatasetSpec {
    std::string id;
    Domain domain = Domain::Other;
    std::string path;
    std::uint64_t cap = 0;  // 0 -> default_dataset_cap(domain)
    /// Optional extraction template; "{field}" placeholders are filled
    /// from the line's JSON object. When unset, the "text" field is used
    /// verbatim.
    std::optional<std::string> text_template;

    std::uint64_t effective_cap() const { return cap ? cap : default_dataset_cap(domain); }

    static DatasetSpec from_json(const nlohmann::json& j);
};

struct IngestReport {
    std::string dataset_id;
    std::uint64_t lines_total = 0;
    std::uint64_t examples = 0;
    std::uint64_t skipped_blank = 0;
    std::vector<std::uint64_t> malformed_lines;

    nlohmann::json to_json() const;
};

struct IngestResult {
    std::vector<LabeledExample> examples;
    IngestReport report;
};

/// Reads one JSONL dataset. Lines with blank text are skipped and
/// counted; malformed lines are collected and tolerated up to 10% of
/// the file, beyond which FatalIngestError is thrown. IoError when the
/// file cannot be read.
IngestResult ingest(const DatasetSpec& spec);

/// Uniform random sample of min(|examples|, cap) elements, deterministic
/// given seed, preserving the input's relative order.
std::vector<LabeledExample> apply_cap(std::vector<LabeledExample> examples, std::uint64_t cap,
                                      std::uint64_t seed);

struct CorpusStats {
    std::map<Domain, std::uint64_t> per_domain;
    std::map<std::string, std::uint64_t> per_dataset;
    std::uint64_t total = 0;

    nlohmann::json to_json() const;
};

struct BuildResult {
    std::vector<LabeledExample> corpus;
    CorpusStats stats;
    std::vector<IngestReport> ingest_reports;
    std::uint64_t duplicates_removed = 0;
};

/// Ingests every spec, applies per-dataset caps (sampling seeds derived
/// per dataset id so adding a dataset never reshuffles the others),
/// appends synthetic examples, and dedupes on normalized text keeping
/// the first occurrence.
BuildResult build_corpus(const std::vector<DatasetSpec>& specs,
                         const std::vector<LabeledExample>& synthetic, std::uint64_t seed);

/// Dedup on normalize_text, keeping first occurrences in order.
std::vector<LabeledExample> dedup_examples(std::vector<LabeledExample> examples,
                                           std::uint64_t* removed = nullptr);

struct SplitResult {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;
};

/// Stratified partition: each domain contributes round(n_d x fraction)
/// test examples. Deterministic given seed; both halves preserve corpus
/// order. Throws CorpusTooSmallError for corpora of fewer than two
/// examples and std::invalid_argument for fractions outside (0,1).
SplitResult split(const std::vector<LabeledExample>& corpus, double test_fraction,
                  std::uint64_t seed);

/// "Domain / Number of Entries" table with thousands separators,
/// ending in a Total row.
std::string render_distribution_table(const CorpusStats& stats);

/// 113611 -> "113,611".
std::string format_with_commas(std::uint64_t value);

/// Reads labeled examples from JSONL {"text", "domain", optional
/// "source", optional "origin"}; used by train-router and eval inputs.
std::vector<LabeledExample> read_labeled_jsonl(const std::string& path);

/// Writes labeled examples as JSONL, one object per line.
void write_labeled_jsonl(const std::string& path, const std::vector<LabeledExample>& examples);

}  // namespace modem
