#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/backend.hpp"
#include "modem/classifier.hpp"
#include "modem/gateway.hpp"

namespace modem {

enum class BenchmarkKind { Mcq, Open };

BenchmarkKind parse_benchmark_kind(std::string_view name);

struct Choice {
    char letter = 'A';
    std::string text;
};

struct BenchmarkItem {
    std::string id;
    std::string question;
    BenchmarkKind kind = BenchmarkKind::Mcq;
    std::vector<Choice> choices;  // mcq only; >=2, distinct letters, gold present
    std::string gold;             // letter for mcq, reference answer for open
    std::string category;
    std::optional<Domain> mapped_domain;
};

/// Loads benchmark JSONL (mcq: {id, question, choices:[{letter,text}],
/// gold, category}; open: {id, question, gold, category}) and applies an
/// optional category -> domain mapping. Throws SchemaError with the
/// offending line number.
std::vector<BenchmarkItem> load_benchmark(const std::string& path, BenchmarkKind kind,
                                          const std::map<std::string, Domain>& mapping = {});

/// Reads a {"category": "DomainName", ...} JSON mapping file.
std::map<std::string, Domain> load_domain_mapping(const std::string& path);

/// Extraction cascade over a model response: (1) the last "answer is X"
/// or "answer: X"; (2) the last standalone (X) or [X]; (3) a final line
/// that is, or ends in, a bare valid letter. nullopt means unparseable,
/// which scores as incorrect.
std::optional<char> extract_mcq_answer(std::string_view response_text,
                                       const std::vector<char>& valid_letters);

/// Verbatim grading-prompt instruction and strict output tokens.
extern const char kJudgeInstruction[];

/// Renders the judge request body for a (gold, predicted) pair.
std::string render_judge_input(const std::string& gold, const std::string& predicted);

/// Asks the judge backend to grade; temperature 0. Accepts exactly
/// ACCURATE or INACCURATE (surrounding whitespace allowed); anything
/// else raises JudgeProtocolError.
bool judge_open_answer(const ExpertClient& judge, const std::string& gold,
                       const std::string& predicted);

struct ItemRecord {
    std::string id;
    std::string predicted;  // extracted letter, judged answer text, or ""
    bool correct = false;
    bool excluded = false;  // judge protocol violation
    bool failed = false;    // dispatch failure
    Domain routed = Domain::Other;
    double confidence = 0.0;
    std::optional<std::string> error;

    nlohmann::json to_json() const;
};

struct EvalReport {
    std::uint64_t total = 0;
    std::uint64_t scored = 0;  // accuracy denominator
    std::uint64_t correct = 0;
    std::uint64_t excluded = 0;
    std::uint64_t failed = 0;
    std::array<std::uint64_t, kDomainCount> routed_by_domain{};
    /// mapped_domain d -> (items mapped to d, of those routed to d).
    std::map<Domain, std::pair<std::uint64_t, std::uint64_t>> concentration;
    std::vector<ItemRecord> records;

    double accuracy() const { return scored == 0 ? 0.0 : static_cast<double>(correct) / scored; }

    nlohmann::json to_json() const;
};

/// Runs every item through the gateway (mcq flag per item), scores via
/// extraction or the judge, and reports accuracy plus router
/// concentration. Per-item failures are recorded and the run continues.
/// judge may be null when no open items are present.
EvalReport run_eval(Gateway& gateway, const std::vector<BenchmarkItem>& items,
                    const ExpertClient* judge = nullptr);

/// Confusion matrix of the classifier over (question, mapped_domain)
/// pairs. Throws MissingDomainMappingError when any item lacks a
/// mapping.
ConfusionMatrix router_accuracy(const Classifier& classifier,
                                const std::vector<BenchmarkItem>& items);

/// Human-readable accuracy/concentration summary.
std::string render_eval_report(const EvalReport& report);

}  // namespace modem
