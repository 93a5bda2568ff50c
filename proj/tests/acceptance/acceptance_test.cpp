// Acceptance gate for the gateway: nine runnable criteria, one printed
// line each. The binary exits nonzero when any criterion fails, so a
// single ctest entry guards the whole contract.
//
// Everything here runs against loopback mock backends and synthetic desk
// corpora — no network, no external model weights — and finishes well
// inside the ctest timeout on one core.

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/backend.hpp"
#include "modem/classifier.hpp"
#include "modem/cost.hpp"
#include "modem/curation.hpp"
#include "modem/domain.hpp"
#include "modem/errors.hpp"
#include "modem/eval.hpp"
#include "modem/gateway.hpp"
#include "modem/money.hpp"
#include "modem/synth.hpp"
#include "modem/testkit/desk_corpus.hpp"
#include "modem/testkit/mock_server.hpp"
#include "modem/types.hpp"
#include "modem/usage_log.hpp"

#include "../support.hpp"

namespace {

using namespace modem;
namespace tk = modem::testkit;
using tk::MockRule;
using tk::MockScript;
using modem::test::TempDir;
using modem::test::read_file;
using modem::test::write_file;

/// Collects requirement failures for one criterion; the first failure
/// becomes the printed detail.
class Checker {
public:
    void require(bool condition, const std::string& detail) {
        if (!condition && failure_.empty()) failure_ = detail;
        ok_ = ok_ && condition;
    }
    void note(const std::string& text) { note_ = text; }

    bool ok() const { return ok_; }
    const std::string& failure() const { return failure_; }
    const std::string& note_text() const { return note_; }

private:
    bool ok_ = true;
    std::string failure_;
    std::string note_;
};

std::string fmt(const char* format, ...) {
    char buffer[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof buffer, format, args);
    va_end(args);
    return buffer;
}

std::string lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Registry of five experts, one endpoint per domain, flat $1.00/million
/// input price and the default router surcharge.
ExpertRegistry make_registry(const std::array<std::string, kDomainCount>& endpoints) {
    std::vector<ExpertProfile> experts;
    for (Domain d : kAllDomains) {
        ExpertProfile profile;
        profile.id = lower(domain_name(d));
        profile.domain = d;
        profile.model_id = profile.id + "-model";
        profile.endpoint_url = endpoints[static_cast<std::size_t>(ordinal(d))];
        profile.prices.input_micro = 1'000'000;
        experts.push_back(std::move(profile));
    }
    return ExpertRegistry(std::move(experts), {});
}

GatewayOptions fast_options() {
    GatewayOptions options;
    options.timeout_ms = 10000;
    options.max_retries = 0;
    options.retry_backoff_ms = 1;
    return options;
}

ChatRequest user_request(std::string text) {
    ChatRequest request;
    request.messages.push_back({Role::User, std::move(text)});
    return request;
}

// --------------------------------------------------------------------
// 1. Router accuracy on a held-out desk split.
// --------------------------------------------------------------------

void criterion_router_accuracy(Checker& check) {
    const auto started = std::chrono::steady_clock::now();

    tk::DeskCorpusOptions options;
    options.per_domain = 1000;
    options.seed = 42;
    options.shared_fraction = 0.2;
    const auto corpus = tk::make_desk_corpus(options);
    check.require(corpus.size() == 5000, "desk corpus should hold 1,000 examples per domain");

    const SplitResult parts = split(corpus, 0.2, 42);
    check.require(parts.test.size() == 1000,
                  fmt("20%% split should hold out 1,000 examples, got %zu", parts.test.size()));

    TrainingConfig config;
    config.epochs = 3;
    config.seed = 7;
    const NativeClassifier classifier(train(parts.train, config));
    const ConfusionMatrix matrix = evaluate(classifier, parts.test);

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                         started)
                               .count();

    check.require(matrix.total() == parts.test.size(), "confusion total != held-out size");
    const double overall = matrix.overall_accuracy();
    check.require(overall >= 0.95, fmt("overall held-out accuracy %.4f < 0.95", overall));
    double min_per_domain = 1.0;
    for (Domain d : kAllDomains) {
        const double acc = matrix.per_category_accuracy(d);
        min_per_domain = std::min(min_per_domain, acc);
        check.require(acc >= 0.90, fmt("%s held-out accuracy %.4f < 0.90",
                                       std::string(domain_name(d)).c_str(), acc));
    }
    check.require(elapsed < 60.0, fmt("train+eval took %.1fs, budget is 60s", elapsed));
    check.note(fmt("overall %.2f%%, min per-domain %.2f%%, %.1fs", overall * 100.0,
                   min_per_domain * 100.0, elapsed));
}

// --------------------------------------------------------------------
// 2. Confusion-report fidelity on reference counts.
// --------------------------------------------------------------------

void criterion_confusion_fidelity(Checker& check) {
    // Fixed per-category counts; misses are parked in an arbitrary wrong
    // column since only row totals and diagonals feed the report.
    struct Row {
        Domain domain;
        std::uint64_t correct;
        std::uint64_t total;
        const char* rendered;
    };
    const std::array<Row, kDomainCount> rows = {{
        {Domain::Health, 1484, 1828, "81.18%"},
        {Domain::Math, 4641, 4803, "96.63%"},
        {Domain::Science, 2293, 2762, "83.02%"},
        {Domain::Coding, 2780, 3591, "77.42%"},
        {Domain::Other, 1286, 2429, "52.94%"},
    }};

    ConfusionMatrix matrix;
    for (const Row& row : rows) {
        const auto r = static_cast<std::size_t>(ordinal(row.domain));
        matrix.counts[r][r] = row.correct;
        const auto spill =
            static_cast<std::size_t>(ordinal(row.domain == Domain::Other ? Domain::Math
                                                                         : Domain::Other));
        matrix.counts[r][spill] = row.total - row.correct;
    }

    for (const Row& row : rows) {
        check.require(matrix.row_total(row.domain) == row.total, "fixture row total mismatch");
        const std::string got = format_percent(row.correct, row.total);
        check.require(got == row.rendered,
                      fmt("%s renders %s, want %s", std::string(domain_name(row.domain)).c_str(),
                          got.c_str(), row.rendered));
    }
    check.require(matrix.trace() == 12484 && matrix.total() == 15413,
                  "fixture totals drifted from 12484/15413");
    const std::string overall = format_percent(matrix.trace(), matrix.total());
    check.require(overall == "81.00%", fmt("overall renders %s, want 81.00%%", overall.c_str()));

    const std::string report = render_confusion_report(matrix);
    for (const Row& row : rows) {
        check.require(report.find(row.rendered) != std::string::npos,
                      fmt("report is missing %s", row.rendered));
    }
    check.require(report.find("81.00%") != std::string::npos, "report is missing overall 81.00%");
    check.require(report.find("Health") < report.find("Math") &&
                      report.find("Math") < report.find("Overall"),
                  "report rows are out of order");
}

// --------------------------------------------------------------------
// 3. Cost arithmetic anchors and properties.
// --------------------------------------------------------------------

void criterion_cost_arithmetic(Checker& check) {
    PriceSchedule cheap;
    cheap.input_micro = parse_micro_per_million("0.88");
    const PicoUsd one_million = price_request(cheap, 1'000'000, 0);
    check.require(format_usd(one_million) == "0.91",
                  fmt("1M tokens at 0.88+0.03 priced %s, want 0.91",
                      format_usd(one_million).c_str()));

    PriceSchedule premium;
    premium.input_micro = parse_micro_per_million("5.00");
    const PicoUsd two_million = price_request(premium, 2'000'000, 0);
    check.require(format_usd(two_million) == "10.06",
                  fmt("2M tokens at 5.00+0.03 priced %s, want 10.06",
                      format_usd(two_million).c_str()));

    // Blended price over equal prompt-token shares of a 0.90 and a 0.88
    // expert: (0.93 + 0.91) / 2 = 0.92 per million.
    PricingDirectory pricing;
    PriceSchedule ninety;
    ninety.input_micro = parse_micro_per_million("0.90");
    PriceSchedule eighty_eight;
    eighty_eight.input_micro = parse_micro_per_million("0.88");
    pricing.by_model_id["expert-90"] = ninety;
    pricing.by_model_id["expert-88"] = eighty_eight;

    std::vector<UsageRecord> records;
    UsageRecord a;
    a.request_id = "req-00000001";
    a.domain = Domain::Math;
    a.expert_model = "expert-90";
    a.prompt_tokens = 500'000;
    a.cost = price_request(ninety, a.prompt_tokens, 0);
    UsageRecord b = a;
    b.request_id = "req-00000002";
    b.domain = Domain::Coding;
    b.expert_model = "expert-88";
    b.cost = price_request(eighty_eight, b.prompt_tokens, 0);
    records.push_back(a);
    records.push_back(b);

    const CostReport report = aggregate(records, pricing);
    check.require(report.blended_input_price.has_value(), "blended price missing");
    if (report.blended_input_price) {
        const std::string blended = format_usd_per_million(*report.blended_input_price);
        check.require(blended == "0.92", fmt("blended price %s, want 0.92", blended.c_str()));
    }

    // Additivity and monotonicity over randomized schedules and loads.
    std::mt19937_64 rng(20260814);
    std::uniform_int_distribution<std::int64_t> price_dist(0, 20'000'000);
    std::uniform_int_distribution<std::uint64_t> token_dist(0, 2'000'000);
    bool additive = true;
    bool monotonic = true;
    for (int i = 0; i < 10000 && (additive || monotonic); ++i) {
        PriceSchedule prices;
        prices.input_micro = price_dist(rng);
        if (rng() % 2) prices.output_micro = price_dist(rng);
        prices.router_micro = price_dist(rng) / 100;
        const std::uint64_t p1 = token_dist(rng), p2 = token_dist(rng);
        const std::uint64_t c1 = token_dist(rng), c2 = token_dist(rng);
        if (price_request(prices, p1 + p2, c1 + c2) !=
            price_request(prices, p1, c1) + price_request(prices, p2, c2)) {
            additive = false;
        }
        if (price_request(prices, p1 + 1, c1) < price_request(prices, p1, c1) ||
            price_request(prices, p1, c1 + 1) < price_request(prices, p1, c1)) {
            monotonic = false;
        }
        PriceSchedule raised = prices;
        raised.input_micro += 1;
        if (price_request(raised, p1, c1) < price_request(prices, p1, c1)) monotonic = false;
    }
    check.require(additive, "cost additivity violated on a randomized case");
    check.require(monotonic, "cost monotonicity violated on a randomized case");
}

// --------------------------------------------------------------------
// 4. Curation caps and stratified split bound.
// --------------------------------------------------------------------

void criterion_curation_caps(Checker& check) {
    for (int round = 0; round < 20; ++round) {
        TempDir dir;
        std::mt19937_64 rng(4000 + round);
        std::uniform_int_distribution<int> count_dist(2, 5);
        std::uniform_int_distribution<std::uint64_t> size_dist(1, 240);
        std::uniform_int_distribution<std::uint64_t> cap_dist(1, 180);
        std::uniform_int_distribution<int> domain_dist(0, 4);

        std::vector<DatasetSpec> specs;
        std::map<std::string, std::uint64_t> sizes;
        const int dataset_count = count_dist(rng);
        for (int i = 0; i < dataset_count; ++i) {
            DatasetSpec spec;
            spec.id = fmt("round%d-ds%d", round, i);
            spec.domain = kAllDomains[static_cast<std::size_t>(domain_dist(rng))];
            spec.cap = (rng() % 10 == 0) ? 0 : cap_dist(rng);  // 0 -> default cap
            const std::uint64_t size = size_dist(rng);
            sizes[spec.id] = size;

            std::ostringstream lines;
            for (std::uint64_t j = 0; j < size; ++j) {
                lines << nlohmann::json{{"text", fmt("round %d set %d item %llu distinct", round,
                                                     i, static_cast<unsigned long long>(j))}}
                      << "\n";
            }
            spec.path = dir.file(spec.id + ".jsonl").string();
            write_file(spec.path, lines.str());
            specs.push_back(std::move(spec));
        }

        const BuildResult built = build_corpus(specs, {}, 100 + round);
        check.require(built.duplicates_removed == 0, "unexpected duplicates in cap rounds");
        for (const DatasetSpec& spec : specs) {
            const std::uint64_t kept = built.stats.per_dataset.at(spec.id);
            const std::uint64_t expected = std::min(sizes[spec.id], spec.effective_cap());
            check.require(kept == expected,
                          fmt("%s kept %llu, want min(%llu, %llu)", spec.id.c_str(),
                              static_cast<unsigned long long>(kept),
                              static_cast<unsigned long long>(sizes[spec.id]),
                              static_cast<unsigned long long>(spec.effective_cap())));
            check.require(kept <= spec.effective_cap(),
                          fmt("%s exceeds its cap", spec.id.c_str()));
        }

        // Stratified split: exact partition, per-domain within one
        // example of the requested fraction.
        const double fraction = std::array<double, 3>{0.15, 0.2, 0.3}[round % 3];
        const SplitResult parts = split(built.corpus, fraction, 555 + round);
        check.require(parts.train.size() + parts.test.size() == built.corpus.size(),
                      "split is not a partition");

        std::vector<std::string> merged;
        for (const auto& ex : parts.train) merged.push_back(ex.text);
        for (const auto& ex : parts.test) merged.push_back(ex.text);
        std::vector<std::string> original;
        for (const auto& ex : built.corpus) original.push_back(ex.text);
        std::sort(merged.begin(), merged.end());
        std::sort(original.begin(), original.end());
        check.require(merged == original, "split halves do not recombine to the corpus");

        std::array<std::uint64_t, kDomainCount> corpus_by{}, test_by{};
        for (const auto& ex : built.corpus) corpus_by[static_cast<std::size_t>(ordinal(ex.domain))]++;
        for (const auto& ex : parts.test) test_by[static_cast<std::size_t>(ordinal(ex.domain))]++;
        for (Domain d : kAllDomains) {
            const auto i = static_cast<std::size_t>(ordinal(d));
            const double want = static_cast<double>(corpus_by[i]) * fraction;
            const double got = static_cast<double>(test_by[i]);
            check.require(std::abs(got - want) <= 1.0 + 1e-9,
                          fmt("%s test share %.0f strays more than 1 from %.2f",
                              std::string(domain_name(d)).c_str(), got, want));
        }
        if (!check.ok()) return;  // stop at the first failing round
    }
}

// --------------------------------------------------------------------
// 5. Synthetic generation at scale with zero attrition.
// --------------------------------------------------------------------

void criterion_synthetic_scale(Checker& check) {
    constexpr int kSeeds = 100;
    constexpr std::uint32_t kPerSeed = 100;

    for (Domain d : kAllDomains) {
        const std::string name(domain_name(d));

        MockScript script;
        SeedSet seed_set;
        seed_set.domain = d;
        for (int i = 0; i < kSeeds; ++i) {
            const std::string marker = fmt("topic-%s-%03d", name.c_str(), i);
            seed_set.seeds.push_back(fmt("Write questions probing %s in depth", marker.c_str()));

            MockRule rule;
            rule.match = marker;
            std::ostringstream lines;
            for (std::uint32_t j = 0; j < kPerSeed; ++j) {
                if (j) lines << "\n";
                lines << fmt("%s question %03d-%03u about concept %u?", name.c_str(), i, j, j);
            }
            rule.response_content = lines.str();
            rule.prompt_tokens = 50;
            rule.completion_tokens = 900;
            script.rules.push_back(std::move(rule));
        }

        tk::MockServer generator(script);
        generator.start();

        SynthJob job;
        job.seed_set = seed_set;
        job.generations_per_seed = kPerSeed;
        job.generator.id = "question-writer";
        job.generator.endpoint_url = generator.endpoint_url();
        job.generator.model_id = "question-writer";
        job.generator.timeout_ms = 10000;
        job.generator.max_retries = 0;
        job.generator.retry_backoff_ms = 1;

        const SynthResult result = run_job(job);
        generator.stop();

        check.require(result.report.requested == kSeeds * kPerSeed,
                      fmt("%s requested %llu generations, want 10000", name.c_str(),
                          static_cast<unsigned long long>(result.report.requested)));
        check.require(result.report.attrition == 0,
                      fmt("%s attrition %llu, want 0", name.c_str(),
                          static_cast<unsigned long long>(result.report.attrition)));
        check.require(result.examples.size() == 10000,
                      fmt("%s kept %zu examples, want exactly 10000", name.c_str(),
                          result.examples.size()));
        bool labels_ok = true;
        for (const LabeledExample& ex : result.examples) {
            if (ex.domain != d || ex.origin != Origin::Synthetic ||
                ex.source != "synth:" + name) {
                labels_ok = false;
                break;
            }
        }
        check.require(labels_ok, fmt("%s produced a mislabeled example", name.c_str()));
        if (!check.ok()) return;
    }
}

// --------------------------------------------------------------------
// 6. End-to-end routing through five echoing mocks.
// --------------------------------------------------------------------

void criterion_end_to_end_routing(Checker& check) {
    // Desk-trained classifier; the probe questions come from a disjoint
    // vocabulary draw so each is domain-pure.
    tk::DeskCorpusOptions train_options;
    train_options.per_domain = 400;
    train_options.seed = 9;
    TrainingConfig config;
    config.epochs = 3;
    config.seed = 7;
    auto classifier =
        std::make_shared<NativeClassifier>(train(tk::make_desk_corpus(train_options), config));

    std::array<std::unique_ptr<tk::MockServer>, kDomainCount> mocks;
    std::array<std::string, kDomainCount> endpoints;
    for (Domain d : kAllDomains) {
        const auto i = static_cast<std::size_t>(ordinal(d));
        mocks[i] = std::make_unique<tk::MockServer>(
            MockScript::echo(std::string(domain_name(d)), 10, 2));
        mocks[i]->start();
        endpoints[i] = mocks[i]->endpoint_url();
    }

    TempDir dir;
    UsageLog log(dir.file("usage.jsonl"));
    Gateway gateway(make_registry(endpoints), classifier, fast_options(), &log);

    tk::DeskCorpusOptions probe_options;
    probe_options.per_domain = 100;
    probe_options.seed = 77;
    probe_options.shared_fraction = 0.0;
    const auto probes = tk::make_desk_corpus(probe_options);

    std::array<std::uint64_t, kDomainCount> asked{}, routed_home{};
    std::uint64_t responses = 0;
    bool content_matches = true;
    for (const LabeledExample& probe : probes) {
        const ChatResponse response = gateway.handle(user_request(probe.text));
        ++responses;
        const auto i = static_cast<std::size_t>(ordinal(probe.domain));
        asked[i]++;
        if (response.routing.domain == probe.domain) routed_home[i]++;
        if (response.content != domain_name(response.routing.domain)) content_matches = false;
    }
    check.require(content_matches, "a response body differs from its mock's scripted output");

    double min_concentration = 1.0;
    for (Domain d : kAllDomains) {
        const auto i = static_cast<std::size_t>(ordinal(d));
        check.require(asked[i] == 100, "probe corpus is not 100 questions per domain");
        const double concentration =
            static_cast<double>(routed_home[i]) / static_cast<double>(asked[i]);
        min_concentration = std::min(min_concentration, concentration);
        check.require(concentration >= 0.90,
                      fmt("%s concentration %.2f < 0.90",
                          std::string(domain_name(d)).c_str(), concentration));
    }

    // Forced domain must reach the forced mock every single time.
    std::uint64_t forced_hits = 0, forced_total = 0;
    for (int repeat = 0; repeat < 20; ++repeat) {
        for (Domain d : kAllDomains) {
            ChatRequest request = user_request("route this wherever the client says");
            request.forced_domain = d;
            const ChatResponse response = gateway.handle(request);
            ++responses;
            ++forced_total;
            if (response.content == domain_name(d) && response.routing.overridden) ++forced_hits;
        }
    }
    check.require(forced_hits == forced_total,
                  fmt("forced routing hit %llu/%llu",
                      static_cast<unsigned long long>(forced_hits),
                      static_cast<unsigned long long>(forced_total)));

    // One usage record per 2xx response, each under its own request id.
    const auto records = read_usage_log(dir.file("usage.jsonl"));
    check.require(records.size() == responses,
                  fmt("%zu usage records for %llu responses", records.size(),
                      static_cast<unsigned long long>(responses)));
    std::set<std::string> ids;
    for (const UsageRecord& record : records) ids.insert(record.request_id);
    check.require(ids.size() == records.size(), "duplicate request ids in the usage log");

    check.require(gateway.metrics().responses_ok == responses,
                  "metrics disagree with the response count");

    for (auto& mock : mocks) mock->stop();
    check.note(fmt("min concentration %.0f%%, %llu requests", min_concentration * 100.0,
                   static_cast<unsigned long long>(responses)));
}

// --------------------------------------------------------------------
// 7. Model persistence: bit-identical predictions, corruption rejected.
// --------------------------------------------------------------------

bool same_decision(const RoutingDecision& a, const RoutingDecision& b) {
    return a.domain == b.domain && a.overridden == b.overridden &&
           std::memcmp(&a.confidence, &b.confidence, sizeof(double)) == 0 &&
           std::memcmp(a.scores.data(), b.scores.data(), sizeof(double) * kDomainCount) == 0;
}

void criterion_model_persistence(Checker& check) {
    TrainingConfig config;
    config.epochs = 2;
    config.seed = 5;
    const ClassifierModel model = train(tk::make_desk_corpus(40, 11), config);

    std::vector<std::string> probes;
    for (const LabeledExample& ex : tk::make_desk_corpus(20, 99)) probes.push_back(ex.text);
    check.require(probes.size() == 100, "probe set should hold 100 strings");

    TempDir dir;
    const auto path = dir.file("router.bin");
    save_model(model, path);
    const ClassifierModel loaded = load_model(path);

    check.require(loaded.weights == model.weights && loaded.bias == model.bias,
                  "reloaded parameters differ from the trained model");
    bool identical = true;
    for (const std::string& probe : probes) {
        if (!same_decision(predict(model, probe), predict(loaded, probe))) {
            identical = false;
            break;
        }
    }
    check.require(identical, "a probe prediction changed across save/load");

    const std::string bytes = read_file(path);
    const auto rejects = [&](const std::string& mutated, const char* label) {
        const auto bad_path = dir.file(std::string(label) + ".bin");
        write_file(bad_path, mutated);
        try {
            load_model(bad_path);
            check.require(false, fmt("%s model file was accepted", label));
        } catch (const CorruptModelError&) {
            // expected
        }
    };

    std::string flipped = bytes;
    flipped[flipped.size() / 2] = static_cast<char>(flipped[flipped.size() / 2] ^ 0xFF);
    rejects(flipped, "bit-flipped");
    rejects(bytes.substr(0, bytes.size() / 2), "truncated");
    rejects("not a model at all", "garbage");
}

// --------------------------------------------------------------------
// 8. Eval harness: extraction fixture, judge protocol, all-gold run.
// --------------------------------------------------------------------

struct UniformClassifier final : Classifier {
    RoutingDecision classify(std::string_view) const override {
        std::array<double, kDomainCount> scores;
        scores.fill(1.0 / kDomainCount);
        return RoutingDecision::from_scores(scores);
    }
};

void criterion_eval_harness(Checker& check) {
    // 8a. The 30-case extraction golden fixture.
    const std::string fixture_path = std::string(MODEM_TEST_GOLDEN_DIR) +
                                     "/mcq_extraction_cases.json";
    std::ifstream fixture(fixture_path);
    check.require(fixture.good(), "extraction fixture is unreadable");
    nlohmann::json doc = nlohmann::json::parse(fixture);
    const auto& cases = doc.at("cases");
    check.require(cases.size() >= 30, fmt("fixture holds %zu cases, want 30", cases.size()));
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        std::vector<char> letters;
        for (char letter : c.at("letters").get<std::string>()) letters.push_back(letter);
        const auto got = extract_mcq_answer(c.at("response").get<std::string>(), letters);
        if (c.at("expected").is_null()) {
            check.require(!got.has_value(),
                          fmt("case %zu: extracted '%c' where none was expected", i,
                              got.value_or('?')));
        } else {
            const char want = c.at("expected").get<std::string>().at(0);
            check.require(got.has_value() && *got == want,
                          fmt("case %zu: extracted '%c', want '%c'", i, got.value_or('?'),
                              want));
        }
    }

    // 8b. Judge protocol: exact tokens only, violations excluded from the
    // accuracy denominator.
    MockScript judge_script;
    MockRule chatty;
    chatty.match = "unjudgeable reply";
    chatty.response_content = "That looks accurate to me overall.";
    judge_script.rules.push_back(chatty);
    MockRule inaccurate;
    inaccurate.match = "wrong reply";
    inaccurate.response_content = "INACCURATE";
    judge_script.rules.push_back(inaccurate);
    MockRule accurate;  // catch-all, whitespace-padded on purpose
    accurate.response_content = "  ACCURATE\n";
    judge_script.rules.push_back(accurate);
    tk::MockServer judge_server(judge_script);
    judge_server.start();

    BackendConfig judge_config;
    judge_config.id = "judge";
    judge_config.endpoint_url = judge_server.endpoint_url();
    judge_config.model_id = "judge-model";
    judge_config.timeout_ms = 10000;
    judge_config.max_retries = 0;
    judge_config.retry_backoff_ms = 1;
    const ExpertClient judge(judge_config);

    check.require(judge_open_answer(judge, "gold", "fine reply"), "padded ACCURATE rejected");
    check.require(!judge_open_answer(judge, "gold", "wrong reply"), "INACCURATE misread");
    try {
        judge_open_answer(judge, "gold", "unjudgeable reply");
        check.require(false, "chatty judge output was accepted");
    } catch (const JudgeProtocolError&) {
        // expected
    }

    MockScript expert_script;
    MockRule open_bad;
    open_bad.match = "open-q2";
    open_bad.response_content = "unjudgeable reply";
    expert_script.rules.push_back(open_bad);
    MockRule open_ok;
    open_ok.response_content = "fine reply";
    expert_script.rules.push_back(open_ok);
    tk::MockServer open_expert(expert_script);
    open_expert.start();

    std::array<std::string, kDomainCount> open_endpoints;
    open_endpoints.fill(open_expert.endpoint_url());
    Gateway open_gateway(make_registry(open_endpoints), std::make_shared<UniformClassifier>(),
                         fast_options(), nullptr);

    std::vector<BenchmarkItem> open_items;
    for (int i = 1; i <= 3; ++i) {
        BenchmarkItem item;
        item.id = fmt("open-%d", i);
        item.question = fmt("open-q%d: summarize the finding", i);
        item.kind = BenchmarkKind::Open;
        item.gold = "the reference answer";
        open_items.push_back(std::move(item));
    }
    const EvalReport open_report = run_eval(open_gateway, open_items, &judge);
    check.require(open_report.excluded == 1,
                  fmt("judge violations excluded %llu items, want 1",
                      static_cast<unsigned long long>(open_report.excluded)));
    check.require(open_report.scored == 2 && open_report.correct == 2,
                  "judged items scored incorrectly");
    check.require(open_report.accuracy() == 1.0,
                  "excluded item leaked into the accuracy denominator");
    open_expert.stop();
    judge_server.stop();

    // 8c. All-gold MCQ run scores 100%.
    const std::array<char, 5> golds = {'B', 'A', 'D', 'C', 'A'};
    MockScript gold_script;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        MockRule rule;
        rule.match = fmt("mcq-q%zu:", i);
        rule.response_content = fmt("Working through it, the answer is %c.", golds[i]);
        gold_script.rules.push_back(std::move(rule));
    }
    tk::MockServer gold_expert(gold_script);
    gold_expert.start();

    std::array<std::string, kDomainCount> gold_endpoints;
    gold_endpoints.fill(gold_expert.endpoint_url());
    Gateway gold_gateway(make_registry(gold_endpoints), std::make_shared<UniformClassifier>(),
                         fast_options(), nullptr);

    std::vector<BenchmarkItem> mcq_items;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        BenchmarkItem item;
        item.id = fmt("mcq-%zu", i);
        item.question = fmt("mcq-q%zu: pick the right option", i);
        item.kind = BenchmarkKind::Mcq;
        for (char letter : {'A', 'B', 'C', 'D'}) {
            item.choices.push_back({letter, fmt("option %c", letter)});
        }
        item.gold = golds[i];
        mcq_items.push_back(std::move(item));
    }
    const EvalReport gold_report = run_eval(gold_gateway, mcq_items, nullptr);
    check.require(gold_report.scored == golds.size() && gold_report.failed == 0,
                  "all-gold run did not score every item");
    check.require(gold_report.accuracy() == 1.0,
                  fmt("all-gold run scored %.2f, want 1.00", gold_report.accuracy()));
    gold_expert.stop();
}

// --------------------------------------------------------------------
// 9. Preview latency.
// --------------------------------------------------------------------

void criterion_preview_latency(Checker& check) {
    TrainingConfig config;
    config.epochs = 2;
    config.seed = 3;
    auto classifier = std::make_shared<NativeClassifier>(train(tk::make_desk_corpus(200, 21),
                                                               config));

    std::array<std::string, kDomainCount> endpoints;
    endpoints.fill("http://127.0.0.1:1");  // never contacted by preview
    Gateway gateway(make_registry(endpoints), classifier, fast_options(), nullptr);

    std::string prompt;
    for (const LabeledExample& ex : tk::make_desk_corpus(10, 8)) {
        if (prompt.size() >= 1024) break;
        if (!prompt.empty()) prompt += ' ';
        prompt += ex.text;
    }
    prompt.resize(1024, 'x');

    for (int i = 0; i < 50; ++i) gateway.preview(prompt);  // warm-up

    std::vector<double> samples;
    samples.reserve(201);
    for (int i = 0; i < 201; ++i) {
        const auto started = std::chrono::steady_clock::now();
        const RoutingDecision decision = gateway.preview(prompt);
        const auto elapsed = std::chrono::steady_clock::now() - started;
        samples.push_back(std::chrono::duration<double, std::milli>(elapsed).count());
        check.require(decision.confidence > 0.0, "preview returned an empty decision");
    }
    std::sort(samples.begin(), samples.end());
    const double p50 = samples[samples.size() / 2];
    check.require(p50 < 5.0, fmt("preview p50 %.3f ms, budget is 5 ms", p50));
    check.require(gateway.metrics().previews_total == 251, "preview counter drifted");
    check.note(fmt("p50 %.3f ms", p50));
}

struct CriterionSpec {
    int number;
    const char* description;
    void (*run)(Checker&);
};

}  // namespace

int main() {
    const std::array<CriterionSpec, 9> criteria = {{
        {1, "desk-corpus router accuracy (overall >= 95%, per-domain >= 90%, < 60 s)",
         criterion_router_accuracy},
        {2, "confusion report renders the reference percentages exactly",
         criterion_confusion_fidelity},
        {3, "cost anchors 0.91/10.06/0.92 exact; additivity and monotonicity over 10,000 cases",
         criterion_cost_arithmetic},
        {4, "dataset caps bound every dataset; stratified split within the 1-example bound",
         criterion_curation_caps},
        {5, "synthetic pipeline keeps exactly 10,000 labeled examples per domain",
         criterion_synthetic_scale},
        {6, "routing concentration >= 90%, forced override 100%, one usage record per response",
         criterion_end_to_end_routing},
        {7, "save/load preserves predictions bit-for-bit and rejects corrupt model files",
         criterion_model_persistence},
        {8, "extraction golden fixture, strict judge tokens, all-gold run scores 100%",
         criterion_eval_harness},
        {9, "classify-only preview p50 < 5 ms on 1 KB prompts", criterion_preview_latency},
    }};

    bool all_passed = true;
    for (const CriterionSpec& criterion : criteria) {
        Checker check;
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("unhandled exception: ") + e.what());
        }
        all_passed = all_passed && check.ok();
        std::cout << "criterion " << criterion.number << ": "
                  << (check.ok() ? "PASS" : "FAIL") << " - " << criterion.description;
        if (check.ok() && !check.note_text().empty()) {
            std::cout << " [" << check.note_text() << "]";
        }
        if (!check.ok()) std::cout << ": " << check.failure();
        std::cout << std::endl;
    }
    return all_passed ? 0 : 1;
}
