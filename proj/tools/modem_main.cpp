// modem: single entry point for the domain-routing gateway and its
// tooling. Subcommands are thin shells over the core library:
//
//   serve         run the HTTP gateway from a config file
//   train-router  fit the native domain classifier on labeled JSONL
//   curate        ingest/cap/dedup datasets into a training corpus
//   synth         expand seed questions through a generator backend
//   eval          run a benchmark through the gateway and score it
//   report-cost   aggregate a usage log into cost tables
//   preview       classify one text and print the routing decision
//
// Conventions: machine-readable output (JSON) goes to stdout, progress
// and human-readable tables go to stderr. Exit 0 on success, 1 on usage
// errors, 2 on runtime failures.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modem/backend.hpp"
#include "modem/classifier.hpp"
#include "modem/config.hpp"
#include "modem/cost.hpp"
#include "modem/curation.hpp"
#include "modem/domain.hpp"
#include "modem/errors.hpp"
#include "modem/eval.hpp"
#include "modem/gateway.hpp"
#include "modem/server.hpp"
#include "modem/synth.hpp"
#include "modem/text.hpp"
#include "modem/usage_log.hpp"

namespace {

using nlohmann::json;

std::atomic<bool> g_shutdown{false};

void on_signal(int) { g_shutdown.store(true); }

void log_line(const std::string& message) {
    std::fprintf(stderr, "modem: %s\n", message.c_str());
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw modem::IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw modem::ConfigError(path + ": " + e.what());
    }
    return j;
}

// ---------------------------------------------------------------- serve

struct ServeOptions {
    std::string config_path;
};

int run_serve(const ServeOptions& opts) {
    auto config = modem::GatewayConfig::load(opts.config_path);
    auto registry = config.make_registry();
    auto classifier = config.make_classifier();
    if (!classifier) {
        log_line("no classifier configured; only forced-domain requests will be served");
    }
    modem::UsageLog usage_log(config.usage_log_path);
    modem::Gateway gateway(std::move(registry), std::move(classifier), config.options,
                           &usage_log);
    modem::GatewayServer server(gateway, config.bind_address, config.port);
    server.start();
    log_line("listening on " + config.bind_address + ":" + std::to_string(server.port()));
    log_line("usage log: " + config.usage_log_path);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_shutdown.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    log_line("shutting down");
    server.stop();
    return 0;
}

// --------------------------------------------------------- train-router

struct TrainOptions {
    std::string corpus_path;
    std::string out_path;
    modem::TrainingConfig training;
};

int run_train_router(const TrainOptions& opts) {
    auto corpus = modem::read_labeled_jsonl(opts.corpus_path);
    log_line("read " + std::to_string(corpus.size()) + " examples from " + opts.corpus_path);

    auto started = std::chrono::steady_clock::now();
    auto model = modem::train(corpus, opts.training);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    log_line("trained in " + std::to_string(elapsed.count()) + " ms, final loss " +
             std::to_string(model.meta.final_loss));

    modem::save_model(model, opts.out_path);
    log_line("wrote model to " + opts.out_path);

    json summary = {{"model_path", opts.out_path},
                    {"examples", corpus.size()},
                    {"training", model.meta.to_json()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------- curate

struct CurateOptions {
    std::string specs_path;
    std::string synthetic_path;
    std::string out_path;
    std::string train_out;
    std::string test_out;
    double test_fraction = 0.0;
    std::uint64_t seed = 0;
};

int run_curate(const CurateOptions& opts) {
    json doc = read_json_file(opts.specs_path);
    const json* list = nullptr;
    if (doc.is_array()) {
        list = &doc;
    } else if (doc.is_object() && doc.contains("datasets") && doc["datasets"].is_array()) {
        list = &doc["datasets"];
    } else {
        throw modem::ConfigError(opts.specs_path +
                                 ": expected a JSON array of dataset specs or {\"datasets\": [...]}");
    }
    std::vector<modem::DatasetSpec> specs;
    specs.reserve(list->size());
    for (const auto& entry : *list) specs.push_back(modem::DatasetSpec::from_json(entry));

    std::vector<modem::LabeledExample> synthetic;
    if (!opts.synthetic_path.empty()) {
        synthetic = modem::read_labeled_jsonl(opts.synthetic_path);
        log_line("read " + std::to_string(synthetic.size()) + " synthetic examples");
    }

    auto result = modem::build_corpus(specs, synthetic, opts.seed);
    modem::write_labeled_jsonl(opts.out_path, result.corpus);
    log_line("wrote " + std::to_string(result.corpus.size()) + " examples to " + opts.out_path);
    std::fputs(modem::render_distribution_table(result.stats).c_str(), stderr);

    json summary = {{"corpus_path", opts.out_path},
                    {"stats", result.stats.to_json()},
                    {"duplicates_removed", result.duplicates_removed}};
    json reports = json::array();
    for (const auto& report : result.ingest_reports) reports.push_back(report.to_json());
    summary["ingest"] = reports;

    if (opts.test_fraction > 0.0) {
        if (opts.train_out.empty() || opts.test_out.empty()) {
            throw CLI::ValidationError("--test-fraction requires --train-out and --test-out");
        }
        auto halves = modem::split(result.corpus, opts.test_fraction, opts.seed);
        modem::write_labeled_jsonl(opts.train_out, halves.train);
        modem::write_labeled_jsonl(opts.test_out, halves.test);
        log_line("split " + std::to_string(halves.train.size()) + " train / " +
                 std::to_string(halves.test.size()) + " test");
        summary["split"] = {{"train_path", opts.train_out},
                            {"test_path", opts.test_out},
                            {"train", halves.train.size()},
                            {"test", halves.test.size()},
                            {"test_fraction", opts.test_fraction}};
    }

    std::cout << summary.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
    std::string seeds_path;
    std::string out_path;
    std::string domain_filter;
    std::string endpoint;
    std::string model_id;
    std::string backend_id = "generator";
    std::uint32_t generations = 100;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    std::uint32_t timeout_ms = 120000;
    std::uint32_t max_retries = 2;
};

int run_synth(const SynthOptions& opts) {
    auto seed_sets = modem::read_seed_sets(opts.seeds_path);
    if (!opts.domain_filter.empty()) {
        auto wanted = modem::parse_domain(opts.domain_filter);
        std::erase_if(seed_sets, [&](const modem::SeedSet& s) { return s.domain != wanted; });
    }
    if (seed_sets.empty()) throw modem::ConfigError("no seed sets selected from " + opts.seeds_path);

    modem::BackendConfig generator;
    generator.id = opts.backend_id;
    generator.endpoint_url = opts.endpoint;
    generator.model_id = opts.model_id;
    generator.timeout_ms = opts.timeout_ms;
    generator.max_retries = opts.max_retries;
    generator.validate();

    std::vector<modem::LabeledExample> all_examples;
    json jobs = json::array();
    for (const auto& seed_set : seed_sets) {
        modem::SynthJob job;
        job.seed_set = seed_set;
        job.generations_per_seed = opts.generations;
        job.temperature = opts.temperature;
        job.generator = generator;

        log_line("generating for " + std::string(modem::domain_name(seed_set.domain)) + " (" +
                 std::to_string(seed_set.seeds.size()) + " seeds x " +
                 std::to_string(opts.generations) + ")");
        auto result = modem::run_job(job);
        log_line("  kept " + std::to_string(result.report.kept) + " of " +
                 std::to_string(result.report.requested) + " requested");

        jobs.push_back({{"domain", std::string(modem::domain_name(seed_set.domain))},
                        {"report", result.report.to_json()}});
        all_examples.insert(all_examples.end(),
                            std::make_move_iterator(result.examples.begin()),
                            std::make_move_iterator(result.examples.end()));
    }

    modem::write_labeled_jsonl(opts.out_path, all_examples);
    log_line("wrote " + std::to_string(all_examples.size()) + " examples to " + opts.out_path);

    json summary = {{"out_path", opts.out_path},
                    {"examples_written", all_examples.size()},
                    {"jobs", jobs}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// ----------------------------------------------------------------- eval

struct EvalOptions {
    std::string benchmark_path;
    std::string kind = "mcq";
    std::string config_path;
    std::string judge_path;
    std::string mapping_path;
    std::string router_model;
    bool with_records = false;
};

modem::BackendConfig backend_config_from_json(const json& j, const std::string& origin) {
    if (!j.is_object()) throw modem::ConfigError(origin + ": expected a JSON object");
    modem::BackendConfig config;
    config.id = j.value("id", std::string("judge"));
    config.endpoint_url = j.value("endpoint", std::string());
    config.model_id = j.value("model_id", std::string());
    config.timeout_ms = j.value("timeout_ms", config.timeout_ms);
    config.max_retries = j.value("max_retries", config.max_retries);
    config.retry_backoff_ms = j.value("retry_backoff_ms", config.retry_backoff_ms);
    config.validate();
    return config;
}

int run_eval(const EvalOptions& opts) {
    auto kind = modem::parse_benchmark_kind(opts.kind);
    std::map<std::string, modem::Domain> mapping;
    if (!opts.mapping_path.empty()) mapping = modem::load_domain_mapping(opts.mapping_path);
    auto items = modem::load_benchmark(opts.benchmark_path, kind, mapping);
    log_line("loaded " + std::to_string(items.size()) + " items from " + opts.benchmark_path);

    // Router-only mode: score the classifier against the mapped domains
    // without dispatching anything.
    if (!opts.router_model.empty()) {
        modem::NativeClassifier classifier(modem::load_model(opts.router_model));
        auto matrix = modem::router_accuracy(classifier, items);
        std::fputs(modem::render_confusion_report(matrix).c_str(), stderr);
        std::cout << matrix.to_json().dump(2) << "\n";
        return 0;
    }

    auto config = modem::GatewayConfig::load(opts.config_path);
    auto registry = config.make_registry();
    auto classifier = config.make_classifier();
    modem::Gateway gateway(std::move(registry), std::move(classifier), config.options, nullptr);

    std::unique_ptr<modem::ExpertClient> judge;
    if (!opts.judge_path.empty()) {
        judge = std::make_unique<modem::ExpertClient>(
            backend_config_from_json(read_json_file(opts.judge_path), opts.judge_path));
    }

    auto report = modem::run_eval(gateway, items, judge.get());
    std::fputs(modem::render_eval_report(report).c_str(), stderr);

    json out = report.to_json();
    if (!opts.with_records) out.erase("records");
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------- report-cost

struct ReportCostOptions {
    std::string log_path;
    std::string config_path;
    std::string competitors_path;
    std::string own_name = "modem";
    std::string own_accuracy = "-";
    std::string own_parameters = "-";
};

int run_report_cost(const ReportCostOptions& opts) {
    auto records = modem::read_usage_log(opts.log_path);
    log_line("read " + std::to_string(records.size()) + " usage records");

    auto config = modem::GatewayConfig::load(opts.config_path);
    auto report = modem::aggregate(records, config.make_registry().pricing());
    std::fputs(modem::render_cost_report(report).c_str(), stderr);

    json out = {{"cost", report.to_json()}};

    if (!opts.competitors_path.empty()) {
        json doc = read_json_file(opts.competitors_path);
        if (!doc.is_array()) {
            throw modem::ConfigError(opts.competitors_path + ": expected a JSON array of rows");
        }
        std::vector<modem::ComparisonRow> rows;
        rows.reserve(doc.size() + 1);
        for (const auto& entry : doc) rows.push_back(modem::ComparisonRow::from_json(entry));

        // Our own row uses the blended input price measured from the log.
        modem::ComparisonRow own;
        own.name = opts.own_name;
        own.accuracy = opts.own_accuracy;
        own.parameters = opts.own_parameters;
        own.input_price = report.blended_input_price.value_or(0);
        rows.push_back(own);
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.input_price > b.input_price;
        });

        std::fputs(modem::render_comparison_table(rows).c_str(), stderr);
        json comparison = json::array();
        for (const auto& row : rows) comparison.push_back(row.to_json());
        out["comparison"] = comparison;
    }

    std::cout << out.dump(2) << "\n";
    return 0;
}

// -------------------------------------------------------------- preview

struct PreviewOptions {
    std::string text;
    std::string model_path;
    std::string config_path;
};

int run_preview(const PreviewOptions& opts) {
    std::shared_ptr<const modem::Classifier> classifier;
    std::size_t max_chars = 4096;
    if (!opts.model_path.empty()) {
        classifier = std::make_shared<modem::NativeClassifier>(modem::load_model(opts.model_path));
    } else {
        auto config = modem::GatewayConfig::load(opts.config_path);
        max_chars = config.options.classify_max_chars;
        classifier = config.make_classifier();
        if (!classifier) {
            throw modem::ConfigError(opts.config_path + ": no classifier configured");
        }
    }
    auto decision = classifier->classify(modem::truncate_chars(opts.text, max_chars));
    std::cout << decision.to_json().dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-routed LLM gateway: classify prompts, dispatch to per-domain experts, "
                 "account for cost."};
    app.name("modem");
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    ServeOptions serve_opts;
    auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
    serve->add_option("--config", serve_opts.config_path, "Gateway configuration file (JSON)")
        ->envname("MODEM_CONFIG")
        ->required();

    TrainOptions train_opts;
    auto* train = app.add_subcommand("train-router", "Train the native domain classifier");
    train->add_option("--corpus", train_opts.corpus_path, "Labeled JSONL training corpus")
        ->required();
    train->add_option("--out", train_opts.out_path, "Output model file")->required();
    train->add_option("--seed", train_opts.training.seed, "Random seed for shuffling");
    train->add_option("--epochs", train_opts.training.epochs, "Training epochs")
        ->check(CLI::PositiveNumber);
    train->add_option("--batch-size", train_opts.training.batch_size, "Mini-batch size")
        ->check(CLI::PositiveNumber);
    train->add_option("--learning-rate", train_opts.training.learning_rate, "Gradient step size");
    train->add_flag("--no-shuffle", [&](std::int64_t) { train_opts.training.shuffle = false; },
                    "Keep corpus order instead of shuffling each epoch");

    CurateOptions curate_opts;
    auto* curate = app.add_subcommand("curate", "Build a training corpus from dataset specs");
    curate->add_option("--specs", curate_opts.specs_path, "Dataset spec file (JSON array)")
        ->required();
    curate->add_option("--synthetic", curate_opts.synthetic_path,
                       "Labeled JSONL of synthetic examples to merge");
    curate->add_option("--out", curate_opts.out_path, "Output corpus JSONL")->required();
    curate->add_option("--seed", curate_opts.seed, "Random seed for cap sampling and splits");
    curate->add_option("--test-fraction", curate_opts.test_fraction,
                       "Also emit a stratified train/test split")
        ->check(CLI::Range(0.0, 1.0));
    curate->add_option("--train-out", curate_opts.train_out, "Train split output JSONL");
    curate->add_option("--test-out", curate_opts.test_out, "Test split output JSONL");

    SynthOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "Generate synthetic questions from seeds");
    synth->add_option("--seeds", synth_opts.seeds_path, "Seed JSONL ({\"domain\", \"text\"})")
        ->required();
    synth->add_option("--out", synth_opts.out_path, "Output labeled JSONL")->required();
    synth->add_option("--endpoint", synth_opts.endpoint, "Generator backend endpoint URL")
        ->required();
    synth->add_option("--model", synth_opts.model_id, "Generator model id");
    synth->add_option("--backend-id", synth_opts.backend_id,
                      "Backend id (selects MODEM_BACKEND_<ID>_TOKEN)");
    synth->add_option("--domain", synth_opts.domain_filter, "Only expand seeds for this domain");
    synth->add_option("--generations", synth_opts.generations, "Generations requested per seed")
        ->check(CLI::PositiveNumber);
    synth->add_option("--temperature", synth_opts.temperature, "Sampling temperature");
    synth->add_option("--seed", synth_opts.seed,
                      "Accepted for pipeline uniformity; sampling is seeded by the generator "
                      "backend and this command adds no randomness of its own");
    synth->add_option("--timeout-ms", synth_opts.timeout_ms, "Per-request timeout");
    synth->add_option("--max-retries", synth_opts.max_retries, "Retries per generation call");

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "Run a benchmark through the gateway");
    eval->add_option("--benchmark", eval_opts.benchmark_path, "Benchmark JSONL file")->required();
    eval->add_option("--kind", eval_opts.kind, "Benchmark kind: mcq or open")
        ->check(CLI::IsMember({"mcq", "open"}));
    eval->add_option("--config", eval_opts.config_path, "Gateway configuration file")
        ->envname("MODEM_CONFIG");
    eval->add_option("--judge", eval_opts.judge_path,
                     "Judge backend config (JSON; required to score open answers)");
    eval->add_option("--mapping", eval_opts.mapping_path, "Category-to-domain mapping JSON");
    eval->add_option("--router-model", eval_opts.router_model,
                     "Score only the classifier against mapped domains (no dispatch)");
    eval->add_flag("--records", eval_opts.with_records, "Include per-item records in the JSON");

    ReportCostOptions cost_opts;
    auto* report_cost = app.add_subcommand("report-cost", "Aggregate a usage log into cost tables");
    report_cost->add_option("--log", cost_opts.log_path, "Usage log JSONL")->required();
    report_cost->add_option("--config", cost_opts.config_path, "Gateway configuration file")
        ->envname("MODEM_CONFIG")
        ->required();
    report_cost->add_option("--competitors", cost_opts.competitors_path,
                            "Competitor rows JSON for the comparison table");
    report_cost->add_option("--name", cost_opts.own_name, "Display name for our comparison row");
    report_cost->add_option("--accuracy", cost_opts.own_accuracy,
                            "Accuracy display string for our row");
    report_cost->add_option("--parameters", cost_opts.own_parameters,
                            "Parameter-count display string for our row");

    PreviewOptions preview_opts;
    auto* preview = app.add_subcommand("preview", "Classify one text and print the decision");
    preview->add_option("--text", preview_opts.text, "Text to classify")->required();
    auto* preview_model = preview->add_option("--model", preview_opts.model_path,
                                              "Native classifier model file");
    preview->add_option("--config", preview_opts.config_path, "Gateway configuration file")
        ->envname("MODEM_CONFIG")
        ->excludes(preview_model);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(serve)) return run_serve(serve_opts);
        if (app.got_subcommand(train)) return run_train_router(train_opts);
        if (app.got_subcommand(curate)) return run_curate(curate_opts);
        if (app.got_subcommand(synth)) return run_synth(synth_opts);
        if (app.got_subcommand(eval)) {
            if (eval_opts.config_path.empty() && eval_opts.router_model.empty()) {
                std::fprintf(stderr, "modem eval: --config (or MODEM_CONFIG) is required unless "
                                     "--router-model is given\n");
                return 1;
            }
            return run_eval(eval_opts);
        }
        if (app.got_subcommand(report_cost)) return run_report_cost(cost_opts);
        if (app.got_subcommand(preview)) {
            if (preview_opts.model_path.empty() && preview_opts.config_path.empty()) {
                std::fprintf(stderr, "modem preview: one of --model or --config is required\n");
                return 1;
            }
            return run_preview(preview_opts);
        }
    } catch (const CLI::ParseError& e) {
        // Option interdependencies checked inside subcommands are still
        // usage errors, not runtime failures.
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "modem: error: %s\n", e.what());
        return 2;
    }
    return 0;
}
