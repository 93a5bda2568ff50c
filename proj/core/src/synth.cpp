#include "modem/synth.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "modem/errors.hpp"
#include "modem/text.hpp"

namespace modem {

void SeedSet::validate() const {
    if (seeds.empty()) throw std::invalid_argument("seed set has no seeds");
    for (const std::string& seed : seeds) {
        if (trim(seed).empty()) throw std::invalid_argument("seed set contains a blank seed");
    }
}

std::string render_generation_prompt(const std::string& seed, Domain domain, std::uint32_t n) {
    std::ostringstream prompt;
    prompt << "You write practice questions in the " << domain_name(domain) << " domain.\n"
           << "Here is an example question showing the style and depth expected:\n\n"
           << seed << "\n\n"
           << "Generate " << n << " new conversational " << domain_name(domain)
           << " questions of similar style and varied content. Output exactly one question "
              "per line with no numbering, no blank lines, and no commentary.";
    return prompt.str();
}

nlohmann::json SeedOutcome::to_json() const {
    nlohmann::json j = {
        {"seed_index", seed_index},
        {"requested", requested},
        {"parsed", parsed},
    };
    if (error) j["error"] = *error;
    return j;
}

nlohmann::json SynthReport::to_json() const {
    nlohmann::json seeds = nlohmann::json::array();
    for (const SeedOutcome& outcome : per_seed) seeds.push_back(outcome.to_json());
    return {
        {"requested", requested}, {"parsed", parsed},     {"kept", kept},
        {"attrition", attrition}, {"per_seed", seeds},
    };
}

SynthResult run_job(const SynthJob& job) {
    job.seed_set.validate();
    if (job.generations_per_seed == 0) {
        throw std::invalid_argument("generations_per_seed must be positive");
    }

    ExpertClient client(job.generator);
    SynthResult result;
    std::string source = "synth:" + std::string(domain_name(job.seed_set.domain));

    for (std::size_t seed_index = 0; seed_index < job.seed_set.seeds.size(); ++seed_index) {
        const std::string& seed = job.seed_set.seeds[seed_index];
        SeedOutcome outcome;
        outcome.seed_index = seed_index;
        outcome.requested = job.generations_per_seed;
        result.report.requested += job.generations_per_seed;

        std::string content;
        try {
            ChatMessage message{Role::User, render_generation_prompt(
                                                seed, job.seed_set.domain,
                                                job.generations_per_seed)};
            BackendResponse response =
                client.complete({message}, job.temperature, std::nullopt);
            content = response.content;
        } catch (const BackendError& e) {
            // The client already exhausted its retries; keep the job
            // moving and carry the failure in the report.
            outcome.error = e.what();
            result.report.per_seed.push_back(std::move(outcome));
            continue;
        }

        std::istringstream lines(content);
        std::string line;
        while (std::getline(lines, line)) {
            std::string question(trim(line));
            if (question.empty()) continue;
            outcome.parsed += 1;
            result.report.parsed += 1;

            LabeledExample example;
            example.text = std::move(question);
            example.domain = job.seed_set.domain;
            example.source = source;
            example.origin = Origin::Synthetic;
            result.examples.push_back(std::move(example));
        }
        if (outcome.parsed == 0) {
            outcome.error = "empty generation: no parseable questions";
        }
        result.report.per_seed.push_back(std::move(outcome));
    }

    // Exact-duplicate questions add nothing to training; drop repeats,
    // keeping the earliest (lowest seed index, lowest line number).
    std::unordered_set<std::string> seen;
    std::vector<LabeledExample> unique;
    unique.reserve(result.examples.size());
    for (LabeledExample& example : result.examples) {
        if (seen.insert(normalize_text(example.text)).second) {
            unique.push_back(std::move(example));
        }
    }
    result.examples = std::move(unique);

    result.report.kept = result.examples.size();
    result.report.attrition = result.report.requested - result.report.kept;
    return result;
}

std::vector<SeedSet> read_seed_sets(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open seed file: " + path);

    std::array<SeedSet, kDomainCount> by_domain;
    for (Domain d : kAllDomains) by_domain[ordinal(d)].domain = d;

    std::string line;
    std::uint64_t line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            nlohmann::json object = nlohmann::json::parse(line);
            Domain domain = parse_domain(object.at("domain").get<std::string>());
            std::string text = object.at("text").get<std::string>();
            if (trim(text).empty()) throw SchemaError("seed text is blank");
            by_domain[ordinal(domain)].seeds.push_back(std::move(text));
        } catch (const SchemaError&) {
            throw;
        } catch (const std::exception& e) {
            throw SchemaError("seed file line " + std::to_string(line_number) + ": " + e.what());
        }
    }

    std::vector<SeedSet> sets;
    for (SeedSet& set : by_domain) {
        if (!set.seeds.empty()) sets.push_back(std::move(set));
    }
    return sets;
}

}  // namespace modem
