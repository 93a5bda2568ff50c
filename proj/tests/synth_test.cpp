#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "modem/errors.hpp"
#include "modem/synth.hpp"
#include "modem/testkit/mock_server.hpp"

#include "support.hpp"

namespace modem {
namespace {

using test::TempDir;
using test::write_file;
using testkit::MockRule;
using testkit::MockScript;
using testkit::MockServer;

BackendConfig generator_for(const MockServer& server) {
    BackendConfig config;
    config.id = "generator";
    config.endpoint_url = server.endpoint_url();
    config.model_id = "question-writer";
    config.timeout_ms = 5000;
    config.max_retries = 0;
    config.retry_backoff_ms = 1;
    return config;
}

TEST(SeedSet, ValidateRejectsEmptyAndBlankSeeds) {
    SeedSet empty;
    EXPECT_THROW(empty.validate(), std::invalid_argument);

    SeedSet blank;
    blank.seeds = {"fine seed", "   "};
    EXPECT_THROW(blank.validate(), std::invalid_argument);

    SeedSet ok;
    ok.seeds = {"fine seed"};
    EXPECT_NO_THROW(ok.validate());
}

TEST(GenerationPrompt, EmbedsSeedDomainAndCount) {
    std::string prompt =
        render_generation_prompt("Why is the sky blue at noon?", Domain::Science, 42);
    EXPECT_NE(prompt.find("Why is the sky blue at noon?"), std::string::npos);
    EXPECT_NE(prompt.find("Science"), std::string::npos);
    EXPECT_NE(prompt.find("42"), std::string::npos);
    EXPECT_NE(prompt.find("one question per line"), std::string::npos);
}

TEST(RunJob, LabelsEveryParsedLineWithTheJobDomain) {
    MockServer server(MockScript::echo("What is 2+2?\nWhat is 3*3?\nWhat is 10-4?"));
    server.start();

    SynthJob job;
    job.seed_set.domain = Domain::Math;
    job.seed_set.seeds = {"What is 1+1?"};
    job.generations_per_seed = 3;
    job.generator = generator_for(server);

    SynthResult result = run_job(job);
    server.stop();

    ASSERT_EQ(result.examples.size(), 3u);
    for (const auto& example : result.examples) {
        EXPECT_EQ(example.domain, Domain::Math);
        EXPECT_EQ(example.origin, Origin::Synthetic);
        EXPECT_EQ(example.source, "synth:Math");
    }
    EXPECT_EQ(result.examples[0].text, "What is 2+2?");
    EXPECT_EQ(result.report.requested, 3u);
    EXPECT_EQ(result.report.parsed, 3u);
    EXPECT_EQ(result.report.kept, 3u);
    EXPECT_EQ(result.report.attrition, 0u);
    ASSERT_EQ(result.report.per_seed.size(), 1u);
    EXPECT_FALSE(result.report.per_seed[0].error.has_value());
}

TEST(RunJob, SendsTheRenderedPromptToTheGenerator) {
    MockServer server(MockScript::echo("Q?"));
    server.start();

    SynthJob job;
    job.seed_set.domain = Domain::Health;
    job.seed_set.seeds = {"How do I treat a sore throat?"};
    job.generations_per_seed = 7;
    job.generator = generator_for(server);
    run_job(job);

    auto requests = server.requests();
    server.stop();
    ASSERT_EQ(requests.size(), 1u);
    EXPECT_NE(requests[0].joined_content.find("How do I treat a sore throat?"),
              std::string::npos);
    EXPECT_NE(requests[0].joined_content.find("Health"), std::string::npos);
    EXPECT_EQ(requests[0].json.at("model").get<std::string>(), "question-writer");
}

TEST(RunJob, BlankLinesInTheGenerationAreSkipped) {
    MockServer server(MockScript::echo("  first?  \n\n   \nsecond?\n"));
    server.start();

    SynthJob job;
    job.seed_set.domain = Domain::Other;
    job.seed_set.seeds = {"seed"};
    job.generations_per_seed = 2;
    job.generator = generator_for(server);
    SynthResult result = run_job(job);
    server.stop();

    ASSERT_EQ(result.examples.size(), 2u);
    EXPECT_EQ(result.examples[0].text, "first?");
    EXPECT_EQ(result.examples[1].text, "second?");
}

TEST(RunJob, FailedSeedIsRecordedAndTheJobContinues) {
    MockScript script;
    MockRule broken;
    broken.match = "alpha seed";
    broken.status = 500;
    broken.response_content = "overloaded";
    script.rules.push_back(broken);
    MockRule working;
    working.match = "beta seed";
    working.response_content = "one question?\ntwo question?";
    script.rules.push_back(working);

    MockServer server(std::move(script));
    server.start();

    SynthJob job;
    job.seed_set.domain = Domain::Coding;
    job.seed_set.seeds = {"alpha seed", "beta seed"};
    job.generations_per_seed = 2;
    job.generator = generator_for(server);
    SynthResult result = run_job(job);
    server.stop();

    ASSERT_EQ(result.report.per_seed.size(), 2u);
    EXPECT_TRUE(result.report.per_seed[0].error.has_value());
    EXPECT_EQ(result.report.per_seed[0].parsed, 0u);
    EXPECT_FALSE(result.report.per_seed[1].error.has_value());
    EXPECT_EQ(result.report.per_seed[1].parsed, 2u);
    EXPECT_EQ(result.report.requested, 4u);
    EXPECT_EQ(result.report.kept, 2u);
    EXPECT_EQ(result.examples.size(), 2u);
}

TEST(RunJob, EmptyGenerationIsNotedPerSeed) {
    MockServer server(MockScript::echo("   \n  \n"));
    server.start();

    SynthJob job;
    job.seed_set.domain = Domain::Math;
    job.seed_set.seeds = {"seed"};
    job.generations_per_seed = 5;
    job.generator = generator_for(server);
    SynthResult result = run_job(job);
    server.stop();

    ASSERT_EQ(result.report.per_seed.size(), 1u);
    ASSERT_TRUE(result.report.per_seed[0].error.has_value());
    EXPECT_NE(result.report.per_seed[0].error->find("empty generation"), std::string::npos);
    EXPECT_TRUE(result.examples.empty());
}

TEST(RunJob, DuplicateQuestionsAcrossSeedsAreDropped) {
    MockScript script;
    MockRule first;
    first.match = "alpha seed";
    first.response_content = "Same question?\nUnique A?";
    script.rules.push_back(first);
    MockRule second;
    second.match = "beta seed";
    second.response_content = "same   QUESTION?\nUnique B?";
    script.rules.push_back(second);

    MockServer server(std::move(script));
    server.start();

    SynthJob job;
    job.seed_set.domain = Domain::Science;
    job.seed_set.seeds = {"alpha seed", "beta seed"};
    job.generations_per_seed = 2;
    job.generator = generator_for(server);
    SynthResult result = run_job(job);
    server.stop();

    EXPECT_EQ(result.report.parsed, 4u);
    EXPECT_EQ(result.report.kept, 3u);
    EXPECT_EQ(result.report.attrition, 4u - 3u);
    ASSERT_EQ(result.examples.size(), 3u);
    EXPECT_EQ(result.examples[0].text, "Same question?");  // first occurrence wins
}

TEST(RunJob, RejectsZeroGenerationsPerSeed) {
    SynthJob job;
    job.seed_set.domain = Domain::Math;
    job.seed_set.seeds = {"seed"};
    job.generations_per_seed = 0;
    job.generator.id = "generator";
    job.generator.endpoint_url = "http://127.0.0.1:1";
    job.generator.model_id = "m";
    EXPECT_THROW(run_job(job), std::invalid_argument);
}

TEST(ReportJson, CarriesCountsAndPerSeedOutcomes) {
    SynthReport report;
    report.requested = 200;
    report.parsed = 180;
    report.kept = 170;
    report.attrition = 30;
    SeedOutcome outcome;
    outcome.seed_index = 1;
    outcome.requested = 100;
    outcome.parsed = 0;
    outcome.error = "empty generation: no parseable questions";
    report.per_seed.push_back(outcome);

    nlohmann::json j = report.to_json();
    EXPECT_EQ(j.at("requested"), 200);
    EXPECT_EQ(j.at("kept"), 170);
    EXPECT_EQ(j.at("attrition"), 30);
    ASSERT_EQ(j.at("per_seed").size(), 1u);
    EXPECT_EQ(j.at("per_seed")[0].at("error"),
              "empty generation: no parseable questions");
}

TEST(ReadSeedSets, GroupsByDomainInOrdinalOrder) {
    TempDir dir;
    std::string content;
    content += nlohmann::json{{"domain", "Other"}, {"text", "other seed"}}.dump() + "\n";
    content += nlohmann::json{{"domain", "math"}, {"text", "math seed one"}}.dump() + "\n";
    content += "\n";  // blank lines are fine
    content += nlohmann::json{{"domain", "Math"}, {"text", "math seed two"}}.dump() + "\n";
    content += nlohmann::json{{"domain", "Coding"}, {"text", "coding seed"}}.dump() + "\n";
    write_file(dir.file("seeds.jsonl"), content);

    auto sets = read_seed_sets(dir.file("seeds.jsonl").string());
    ASSERT_EQ(sets.size(), 3u);
    EXPECT_EQ(sets[0].domain, Domain::Math);
    ASSERT_EQ(sets[0].seeds.size(), 2u);
    EXPECT_EQ(sets[0].seeds[0], "math seed one");
    EXPECT_EQ(sets[1].domain, Domain::Coding);
    EXPECT_EQ(sets[2].domain, Domain::Other);
}

TEST(ReadSeedSets, MissingFileThrowsIoError) {
    EXPECT_THROW(read_seed_sets("/no/such/seeds.jsonl"), IoError);
}

TEST(ReadSeedSets, MalformedLineReportsTheLineNumber) {
    TempDir dir;
    write_file(dir.file("seeds.jsonl"),
               nlohmann::json{{"domain", "Math"}, {"text", "ok"}}.dump() + "\n{oops\n");
    try {
        read_seed_sets(dir.file("seeds.jsonl").string());
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ReadSeedSets, BlankSeedTextIsRejected) {
    TempDir dir;
    write_file(dir.file("seeds.jsonl"),
               nlohmann::json{{"domain", "Math"}, {"text", "  "}}.dump() + "\n");
    EXPECT_THROW(read_seed_sets(dir.file("seeds.jsonl").string()), SchemaError);
}

}  // namespace
}  // namespace modem
