#include "modem/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "modem/errors.hpp"
#include "modem/text.hpp"

namespace modem {

namespace {

bool is_valid_letter(char c, const std::vector<char>& valid_letters) {
    return std::find(valid_letters.begin(), valid_letters.end(), c) != valid_letters.end();
}

char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

/// Rule 1: the rightmost "answer is X" / "answer: X" with a valid,
/// word-final letter (optionally wrapped in (), [], or **).
std::optional<char> find_stated_answer(std::string_view text,
                                       const std::vector<char>& valid_letters) {
    std::string lowered = ascii_lower(text);
    std::optional<char> found;
    std::size_t found_at = 0;
    for (std::string_view marker : {"answer is", "answer:"}) {
        std::size_t pos = 0;
        while ((pos = lowered.find(marker, pos)) != std::string::npos) {
            std::size_t i = pos + marker.size();
            while (i < text.size() &&
                   (text[i] == ' ' || text[i] == '\t' || text[i] == '*')) {
                ++i;
            }
            if (i < text.size() && (text[i] == '(' || text[i] == '[')) ++i;
            if (i < text.size()) {
                char candidate = upper(text[i]);
                bool word_final =
                    i + 1 >= text.size() ||
                    !std::isalnum(static_cast<unsigned char>(text[i + 1]));
                // Positionally last match wins, across both marker forms.
                if (word_final && is_valid_letter(candidate, valid_letters) &&
                    (!found || pos >= found_at)) {
                    found = candidate;
                    found_at = pos;
                }
            }
            pos += marker.size();
        }
    }
    return found;
}

/// Rule 2: the rightmost standalone (X) or [X].
std::optional<char> find_bracketed_answer(std::string_view text,
                                          const std::vector<char>& valid_letters) {
    std::optional<char> found;
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        bool parens = text[i] == '(' && text[i + 2] == ')';
        bool brackets = text[i] == '[' && text[i + 2] == ']';
        if (!parens && !brackets) continue;
        char candidate = upper(text[i + 1]);
        if (is_valid_letter(candidate, valid_letters)) found = candidate;
    }
    return found;
}

/// Rule 3: a final line that is a bare letter (either case), or whose
/// last punctuation-stripped token is a single uppercase valid letter
/// ("I pick C." -> C). Lowercase is accepted only for the sole-letter
/// form so prose ending in the article "a" never matches.
std::optional<char> find_final_line_answer(std::string_view text,
                                           const std::vector<char>& valid_letters) {
    std::size_t end = text.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (end == 0) return std::nullopt;
    std::size_t line_start = text.rfind('\n', end - 1);
    line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
    std::string_view line = text.substr(line_start, end - line_start);

    auto strip = [](std::string_view s) {
        while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                              std::ispunct(static_cast<unsigned char>(s.front())))) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) ||
                              std::ispunct(static_cast<unsigned char>(s.back())))) {
            s.remove_suffix(1);
        }
        return s;
    };

    std::string_view whole = strip(line);
    if (whole.size() == 1 && is_valid_letter(upper(whole[0]), valid_letters)) {
        return upper(whole[0]);
    }

    std::size_t token_start = line.find_last_of(" \t");
    std::string_view token =
        strip(token_start == std::string_view::npos ? line : line.substr(token_start + 1));
    if (token.size() == 1 && token[0] >= 'A' && token[0] <= 'Z' &&
        is_valid_letter(token[0], valid_letters)) {
        return token[0];
    }
    return std::nullopt;
}

std::string compose_question(const BenchmarkItem& item) {
    if (item.kind != BenchmarkKind::Mcq) return item.question;
    std::ostringstream out;
    out << item.question;
    out << "\n";
    for (const Choice& choice : item.choices) {
        out << "\n" << choice.letter << ") " << choice.text;
    }
    return out.str();
}

}  // namespace

const char kJudgeInstruction[] =
    "You will be given a ground truth answer and a model answer. Please output ACCURATE if "
    "the model answer matches the ground truth answer or INACCURATE otherwise. Please only "
    "return ACCURATE or INACCURATE. It is very important for my job that you do this.";

BenchmarkKind parse_benchmark_kind(std::string_view name) {
    if (name == "mcq") return BenchmarkKind::Mcq;
    if (name == "open") return BenchmarkKind::Open;
    throw std::invalid_argument("benchmark kind must be 'mcq' or 'open'");
}

std::map<std::string, Domain> load_domain_mapping(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open mapping file: " + path);
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("mapping file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw SchemaError("mapping file must be a JSON object");

    std::map<std::string, Domain> mapping;
    for (const auto& [category, domain] : j.items()) {
        if (!domain.is_string()) {
            throw SchemaError("mapping for '" + category + "' must be a domain name");
        }
        mapping[category] = parse_domain(domain.get<std::string>());
    }
    return mapping;
}

std::vector<BenchmarkItem> load_benchmark(const std::string& path, BenchmarkKind kind,
                                          const std::map<std::string, Domain>& mapping) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open benchmark file: " + path);

    std::vector<BenchmarkItem> items;
    std::string line;
    std::uint64_t line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        if (line.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw SchemaError("benchmark line " + std::to_string(line_number) + ": " + why);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            fail("not valid JSON");
        }

        BenchmarkItem item;
        item.kind = kind;
        try {
            item.id = j.at("id").get<std::string>();
            item.question = j.at("question").get<std::string>();
            item.gold = j.at("gold").get<std::string>();
            item.category = j.value("category", std::string());
        } catch (const nlohmann::json::exception& e) {
            fail(e.what());
        }
        if (trim(item.question).empty()) fail("question is blank");

        if (kind == BenchmarkKind::Mcq) {
            if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].size() < 2) {
                fail("mcq items need at least two choices");
            }
            for (const nlohmann::json& c : j["choices"]) {
                std::string letter;
                try {
                    letter = c.at("letter").get<std::string>();
                    item.choices.push_back(Choice{0, c.at("text").get<std::string>()});
                } catch (const nlohmann::json::exception& e) {
                    fail(e.what());
                }
                if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z') {
                    fail("choice letter must be a single character A-Z");
                }
                item.choices.back().letter = letter[0];
            }
            std::vector<char> letters;
            for (const Choice& c : item.choices) {
                if (std::find(letters.begin(), letters.end(), c.letter) != letters.end()) {
                    fail("duplicate choice letter");
                }
                letters.push_back(c.letter);
            }
            if (item.gold.size() != 1 ||
                std::find(letters.begin(), letters.end(), item.gold[0]) == letters.end()) {
                fail("gold letter is not among the choices");
            }
        } else if (trim(item.gold).empty()) {
            fail("open items need a non-empty gold answer");
        }

        if (!item.category.empty()) {
            auto it = mapping.find(item.category);
            if (it != mapping.end()) item.mapped_domain = it->second;
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::optional<char> extract_mcq_answer(std::string_view response_text,
                                       const std::vector<char>& valid_letters) {
    if (valid_letters.empty()) throw std::invalid_argument("valid_letters is empty");
    if (auto stated = find_stated_answer(response_text, valid_letters)) return stated;
    if (auto bracketed = find_bracketed_answer(response_text, valid_letters)) return bracketed;
    return find_final_line_answer(response_text, valid_letters);
}

std::string render_judge_input(const std::string& gold, const std::string& predicted) {
    std::string input;
    input += "<GroundTruthAnswer>\n";
    input += gold;
    input += "\n</GroundTruthAnswer>\n\n<ModelAnswer>\n";
    input += predicted;
    input += "\n</ModelAnswer>";
    return input;
}

bool judge_open_answer(const ExpertClient& judge, const std::string& gold,
                       const std::string& predicted) {
    std::string prompt = std::string(kJudgeInstruction) + "\n\n" +
                         render_judge_input(gold, predicted);
    BackendResponse response = judge.complete({ChatMessage{Role::User, prompt}},
                                              /*temperature=*/0.0, std::nullopt);
    std::string_view verdict = trim(response.content);
    if (verdict == "ACCURATE") return true;
    if (verdict == "INACCURATE") return false;
    throw JudgeProtocolError("judge returned '" + std::string(verdict) +
                             "' instead of ACCURATE/INACCURATE");
}

nlohmann::json ItemRecord::to_json() const {
    nlohmann::json j = {
        {"id", id},           {"predicted", predicted},
        {"correct", correct}, {"excluded", excluded},
        {"failed", failed},   {"routed", std::string(domain_name(routed))},
        {"confidence", confidence},
    };
    if (error) j["error"] = *error;
    return j;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json routed = nlohmann::json::object();
    for (Domain d : kAllDomains) {
        routed[std::string(domain_name(d))] = routed_by_domain[ordinal(d)];
    }
    nlohmann::json conc = nlohmann::json::object();
    for (const auto& [domain, pair] : concentration) {
        conc[std::string(domain_name(domain))] = {
            {"items", pair.first},
            {"routed_to_expert", pair.second},
            {"fraction",
             pair.first == 0 ? 0.0 : static_cast<double>(pair.second) / pair.first},
        };
    }
    nlohmann::json record_array = nlohmann::json::array();
    for (const ItemRecord& record : records) record_array.push_back(record.to_json());
    return {
        {"total", total},       {"scored", scored},
        {"correct", correct},   {"excluded", excluded},
        {"failed", failed},     {"accuracy", accuracy()},
        {"routed_by_domain", routed},
        {"concentration", conc},
        {"records", record_array},
    };
}

EvalReport run_eval(Gateway& gateway, const std::vector<BenchmarkItem>& items,
                    const ExpertClient* judge) {
    if (items.empty()) throw EmptyEvaluationSetError();
    for (const BenchmarkItem& item : items) {
        if (item.kind == BenchmarkKind::Open && judge == nullptr) {
            throw ConfigError("open-ended items require a judge backend");
        }
    }

    EvalReport report;
    for (const BenchmarkItem& item : items) {
        report.total += 1;
        ItemRecord record;
        record.id = item.id;

        ChatRequest request;
        request.messages.push_back(ChatMessage{Role::User, compose_question(item)});
        request.mcq = item.kind == BenchmarkKind::Mcq;

        ChatResponse response;
        try {
            response = gateway.handle(request);
        } catch (const DispatchError& e) {
            record.failed = true;
            record.error = e.what();
            if (e.routing) {
                record.routed = e.routing->domain;
                record.confidence = e.routing->confidence;
            }
            report.failed += 1;
            report.records.push_back(std::move(record));
            continue;
        }

        record.routed = response.routing.domain;
        record.confidence = response.routing.confidence;
        report.routed_by_domain[ordinal(response.routing.domain)] += 1;
        if (item.mapped_domain) {
            auto& [mapped, hit] = report.concentration[*item.mapped_domain];
            mapped += 1;
            if (response.routing.domain == *item.mapped_domain) hit += 1;
        }

        if (item.kind == BenchmarkKind::Mcq) {
            std::vector<char> letters;
            for (const Choice& choice : item.choices) letters.push_back(choice.letter);
            std::optional<char> extracted = extract_mcq_answer(response.content, letters);
            record.predicted = extracted ? std::string(1, *extracted) : "";
            record.correct = extracted && *extracted == item.gold[0];
            report.scored += 1;
            if (record.correct) report.correct += 1;
        } else {
            record.predicted = response.content;
            try {
                record.correct = judge_open_answer(*judge, item.gold, response.content);
                report.scored += 1;
                if (record.correct) report.correct += 1;
            } catch (const JudgeProtocolError& e) {
                record.excluded = true;
                record.error = e.what();
                report.excluded += 1;
            }
        }
        report.records.push_back(std::move(record));
    }
    return report;
}

ConfusionMatrix router_accuracy(const Classifier& classifier,
                                const std::vector<BenchmarkItem>& items) {
    std::vector<LabeledExample> examples;
    examples.reserve(items.size());
    for (const BenchmarkItem& item : items) {
        if (!item.mapped_domain) {
            throw MissingDomainMappingError("item '" + item.id +
                                            "' has no domain mapping; supply --mapping");
        }
        LabeledExample example;
        example.text = item.question;
        example.domain = *item.mapped_domain;
        example.source = item.category.empty() ? "benchmark" : item.category;
        examples.push_back(std::move(example));
    }
    return evaluate(classifier, examples);
}

std::string render_eval_report(const EvalReport& report) {
    std::ostringstream out;
    out << "Items:    " << report.total << "\n"
        << "Scored:   " << report.scored << "\n"
        << "Correct:  " << report.correct << "\n"
        << "Excluded: " << report.excluded << "\n"
        << "Failed:   " << report.failed << "\n"
        << "Accuracy: " << format_percent(report.correct, report.scored == 0 ? 1 : report.scored)
        << "\n";
    bool any = false;
    for (Domain d : kAllDomains) any = any || report.routed_by_domain[ordinal(d)] > 0;
    if (any) {
        out << "\nRouted by domain:\n";
        for (Domain d : kAllDomains) {
            out << "  " << domain_name(d) << ": " << report.routed_by_domain[ordinal(d)]
                << "\n";
        }
    }
    if (!report.concentration.empty()) {
        out << "\nRouting concentration (mapped domain -> own expert):\n";
        for (const auto& [domain, pair] : report.concentration) {
            out << "  " << domain_name(domain) << ": " << pair.second << "/" << pair.first
                << " (" << format_percent(pair.second, pair.first == 0 ? 1 : pair.first)
                << ")\n";
        }
    }
    return out.str();
}

}  // namespace modem
