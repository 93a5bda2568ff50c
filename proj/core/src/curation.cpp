#include "modem/curation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_set>

#include "modem/errors.hpp"
#include "modem/text.hpp"

namespace modem {

namespace {

/// Deterministic selection of k of n indices, uniform without
/// replacement: a partial Fisher-Yates over the index array.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    return indices;
}

std::string render_template(const std::string& tmpl, const nlohmann::json& object) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        auto close = tmpl.find('}', open);
        if (close == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        std::string field = tmpl.substr(open + 1, close - open - 1);
        const auto it = object.find(field);
        if (it == object.end()) {
            throw SchemaError("text_template field '" + field + "' missing from record");
        }
        out += it->is_string() ? it->get<std::string>() : it->dump();
        pos = close + 1;
    }
    return out;
}

}  // namespace

std::uint64_t default_dataset_cap(Domain d) {
    switch (d) {
        case Domain::Math:
        case Domain::Health:
        case Domain::Science:
            return 30000;
        case Domain::Coding:
        case Domain::Other:
            return 100000;
    }
    return 30000;
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
    DatasetSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.domain = parse_domain(j.at("domain").get<std::string>());
    spec.path = j.at("path").get<std::string>();
    if (j.contains("cap")) {
        auto cap = j["cap"].get<std::int64_t>();
        if (cap <= 0) throw ConfigError("dataset '" + spec.id + "' cap must be positive");
        spec.cap = static_cast<std::uint64_t>(cap);
    }
    if (j.contains("text_template")) spec.text_template = j["text_template"].get<std::string>();
    return spec;
}

nlohmann::json IngestReport::to_json() const {
    return {
        {"dataset_id", dataset_id},
        {"lines_total", lines_total},
        {"examples", examples},
        {"skipped_blank", skipped_blank},
        {"malformed_lines", malformed_lines},
    };
}

IngestResult ingest(const DatasetSpec& spec) {
    std::ifstream file(spec.path);
    if (!file) throw IoError("cannot open dataset '" + spec.id + "' at " + spec.path);

    IngestResult result;
    result.report.dataset_id = spec.id;

    std::string line;
    std::uint64_t line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        if (line.empty()) continue;
        result.report.lines_total += 1;

        std::string text;
        try {
            nlohmann::json object = nlohmann::json::parse(line);
            if (spec.text_template) {
                text = render_template(*spec.text_template, object);
            } else {
                text = object.at("text").get<std::string>();
            }
        } catch (const std::exception&) {
            result.report.malformed_lines.push_back(line_number);
            continue;
        }

        if (trim(text).empty()) {
            result.report.skipped_blank += 1;
            continue;
        }

        LabeledExample example;
        example.text = std::move(text);
        example.domain = spec.domain;
        example.source = spec.id;
        example.origin = Origin::Curated;
        result.examples.push_back(std::move(example));
    }
    result.report.examples = result.examples.size();

    // Tolerate scattered breakage; a file that is >10% malformed is a
    // pipeline bug, not noise.
    if (result.report.malformed_lines.size() * 10 > result.report.lines_total) {
        throw FatalIngestError("dataset '" + spec.id + "': " +
                               std::to_string(result.report.malformed_lines.size()) + " of " +
                               std::to_string(result.report.lines_total) +
                               " lines are malformed");
    }
    return result;
}

std::vector<LabeledExample> apply_cap(std::vector<LabeledExample> examples, std::uint64_t cap,
                                      std::uint64_t seed) {
    if (cap == 0) throw std::invalid_argument("cap must be positive");
    if (examples.size() <= cap) return examples;

    std::vector<std::size_t> keep = sample_indices(examples.size(), cap, seed);
    std::vector<LabeledExample> sampled;
    sampled.reserve(keep.size());
    for (std::size_t index : keep) sampled.push_back(std::move(examples[index]));
    return sampled;
}

std::vector<LabeledExample> dedup_examples(std::vector<LabeledExample> examples,
                                           std::uint64_t* removed) {
    std::unordered_set<std::string> seen;
    seen.reserve(examples.size());
    std::vector<LabeledExample> unique;
    unique.reserve(examples.size());
    std::uint64_t dropped = 0;
    for (LabeledExample& example : examples) {
        if (seen.insert(normalize_text(example.text)).second) {
            unique.push_back(std::move(example));
        } else {
            ++dropped;
        }
    }
    if (removed) *removed = dropped;
    return unique;
}

BuildResult build_corpus(const std::vector<DatasetSpec>& specs,
                         const std::vector<LabeledExample>& synthetic, std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("build_corpus needs at least one dataset");

    BuildResult result;
    for (const DatasetSpec& spec : specs) {
        IngestResult ingested = ingest(spec);
        result.ingest_reports.push_back(ingested.report);
        // Derive the sampling seed from the dataset id so edits to the
        // spec list never change which rows another dataset keeps.
        std::uint64_t cap_seed = seed ^ fnv1a64(spec.id);
        std::vector<LabeledExample> capped =
            apply_cap(std::move(ingested.examples), spec.effective_cap(), cap_seed);
        result.corpus.insert(result.corpus.end(), std::make_move_iterator(capped.begin()),
                             std::make_move_iterator(capped.end()));
    }
    result.corpus.insert(result.corpus.end(), synthetic.begin(), synthetic.end());

    result.corpus = dedup_examples(std::move(result.corpus), &result.duplicates_removed);

    for (const LabeledExample& example : result.corpus) {
        result.stats.per_domain[example.domain] += 1;
        result.stats.per_dataset[example.source] += 1;
        result.stats.total += 1;
    }
    return result;
}

SplitResult split(const std::vector<LabeledExample>& corpus, double test_fraction,
                  std::uint64_t seed) {
    if (corpus.size() < 2) throw CorpusTooSmallError("cannot split fewer than two examples");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test_fraction must lie in (0,1)");
    }

    // Stratified: sample round(n_d x fraction) test rows per domain.
    std::array<std::vector<std::size_t>, kDomainCount> by_domain;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        by_domain[ordinal(corpus[i].domain)].push_back(i);
    }

    std::vector<bool> in_test(corpus.size(), false);
    for (std::size_t d = 0; d < kDomainCount; ++d) {
        const std::vector<std::size_t>& rows = by_domain[d];
        if (rows.empty()) continue;
        auto want = static_cast<std::size_t>(
            std::llround(static_cast<double>(rows.size()) * test_fraction));
        want = std::min(want, rows.size());
        std::vector<std::size_t> picks = sample_indices(rows.size(), want, seed ^ (0x9E3779B9ull + d));
        for (std::size_t pick : picks) in_test[rows[pick]] = true;
    }

    SplitResult result;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        (in_test[i] ? result.test : result.train).push_back(corpus[i]);
    }
    return result;
}

std::string format_with_commas(std::uint64_t value) {
    std::string digits = std::to_string(value);
    std::string out;
    out.reserve(digits.size() + digits.size() / 3);
    std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i == lead || (i > lead && (i - lead) % 3 == 0)) out += ',';
        out += digits[i];
    }
    return out;
}

nlohmann::json CorpusStats::to_json() const {
    nlohmann::json domains = nlohmann::json::object();
    for (const auto& [domain, count] : per_domain) {
        domains[std::string(domain_name(domain))] = count;
    }
    nlohmann::json datasets = nlohmann::json::object();
    for (const auto& [id, count] : per_dataset) datasets[id] = count;
    return {{"per_domain", domains}, {"per_dataset", datasets}, {"total", total}};
}

std::string render_distribution_table(const CorpusStats& stats) {
    // Fixed report order, not ordinal: Health leads.
    static constexpr Domain kOrder[] = {Domain::Health, Domain::Math, Domain::Science,
                                        Domain::Coding, Domain::Other};
    std::size_t value_width = std::string("Number of Entries").size();
    for (const auto& [domain, count] : stats.per_domain) {
        value_width = std::max(value_width, format_with_commas(count).size());
    }

    auto row = [&](const std::string& label, const std::string& value) {
        std::string line = label;
        line.append(label.size() < 8 ? 8 - label.size() : 1, ' ');
        line.append(value_width > value.size() ? value_width - value.size() : 0, ' ');
        line += value;
        line += '\n';
        return line;
    };

    std::string out = row("Domain", "Number of Entries");
    for (Domain d : kOrder) {
        auto it = stats.per_domain.find(d);
        std::uint64_t count = it == stats.per_domain.end() ? 0 : it->second;
        out += row(std::string(domain_name(d)), format_with_commas(count));
    }
    out += row("Total", format_with_commas(stats.total));
    return out;
}

std::vector<LabeledExample> read_labeled_jsonl(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open corpus file: " + path);

    std::vector<LabeledExample> examples;
    std::string line;
    std::uint64_t line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            nlohmann::json object = nlohmann::json::parse(line);
            LabeledExample example;
            example.text = object.at("text").get<std::string>();
            example.domain = parse_domain(object.at("domain").get<std::string>());
            example.source = object.value("source", std::string("unknown"));
            example.origin =
                object.contains("origin") ? parse_origin(object["origin"].get<std::string>())
                                          : Origin::Curated;
            if (trim(example.text).empty()) {
                throw SchemaError("corpus line " + std::to_string(line_number) +
                                  ": text is blank");
            }
            examples.push_back(std::move(example));
        } catch (const SchemaError&) {
            throw;
        } catch (const std::exception& e) {
            throw SchemaError("corpus line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    return examples;
}

void write_labeled_jsonl(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw IoError("cannot open output file: " + path);
    for (const LabeledExample& example : examples) {
        nlohmann::json object = {
            {"text", example.text},
            {"domain", std::string(domain_name(example.domain))},
            {"source", example.source},
            {"origin", std::string(origin_name(example.origin))},
        };
        file << object.dump() << '\n';
    }
    file.flush();
    if (!file) throw IoError("failed writing output file: " + path);
}

}  // namespace modem
