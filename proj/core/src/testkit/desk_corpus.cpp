#include "modem/testkit/desk_corpus.hpp"

#include <array>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "modem/text.hpp"

namespace modem::testkit {

namespace {

// Signal vocabularies are pairwise disjoint by construction; the filler
// pool is shared by every domain.
const std::vector<std::string> kMathWords = {
    "equation",    "integral",  "derivative", "polynomial", "algebra",   "theorem",
    "matrix",      "vector",    "calculus",   "fraction",   "geometry",  "prime",
    "probability", "quadratic", "logarithm",  "exponent",   "summation", "inequality",
    "triangle",    "decimal",   "numerator",  "cosine",     "tangent",   "factorial",
    "sequence",    "integer",   "rational",   "modulus",    "axiom",     "conjecture",
};

const std::vector<std::string> kHealthWords = {
    "symptom",     "diagnosis",    "therapy",    "vaccine",      "dosage",     "infection",
    "allergy",     "cardiology",   "nutrition",  "insulin",      "antibiotic", "inflammation",
    "migraine",    "asthma",       "metabolism", "immunity",     "pediatrics", "surgery",
    "anesthesia",  "prescription", "fever",      "fatigue",      "arthritis",  "dermatology",
    "oncology",    "neurology",    "kidney",     "cholesterol",  "ligament",   "vitamin",
};

const std::vector<std::string> kScienceWords = {
    "photosynthesis", "electron",  "molecule",   "gravity",      "quantum",    "isotope",
    "enzyme",         "galaxy",    "tectonics",  "osmosis",      "catalyst",   "neutron",
    "chromosome",     "evolution", "ecosystem",  "magnetism",    "velocity",   "entropy",
    "spectroscopy",   "nebula",    "photon",     "plasma",       "geology",    "orbital",
    "acidity",        "membrane",  "combustion", "conductivity", "sediment",   "wavelength",
};

const std::vector<std::string> kCodingWords = {
    "compiler",  "debugger",     "recursion",  "algorithm",    "pointer",  "runtime",
    "framework", "repository",   "refactor",   "inheritance",  "database", "queue",
    "hashmap",   "iterator",     "lambda",     "concurrency",  "mutex",    "deadlock",
    "backend",   "deployment",   "container",  "kernel",       "bytecode", "linker",
    "regex",     "stacktrace",   "middleware", "serializer",   "compile",  "segfault",
};

const std::vector<std::string> kOtherWords = {
    "recipe",    "travel",   "poetry",    "gardening", "fashion",     "history",
    "movie",     "music",    "painting",  "economy",   "election",    "football",
    "holiday",   "wedding",  "furniture", "novel",     "hiking",      "museum",
    "festival",  "career",   "budget",    "insurance", "photography", "etiquette",
    "biography", "folklore", "cuisine",   "antiques",  "journalism",  "calligraphy",
};

const std::vector<std::string> kFillerWords = {
    "the",   "a",      "about", "best",    "way",     "how",        "what",   "why",
    "when",  "can",    "you",   "explain", "describe", "help",      "me",     "my",
    "please", "understand", "difference", "between", "should",     "use",    "for",
    "with",  "and",    "or",    "does",    "work",    "make",       "good",   "simple",
    "common", "basic", "important", "example", "tips", "guide",     "learn",  "start",
};

const std::vector<std::string>& signal_pool(modem::Domain d) {
    switch (d) {
        case modem::Domain::Math: return kMathWords;
        case modem::Domain::Health: return kHealthWords;
        case modem::Domain::Science: return kScienceWords;
        case modem::Domain::Coding: return kCodingWords;
        case modem::Domain::Other: return kOtherWords;
    }
    return kOtherWords;
}

}  // namespace

std::vector<LabeledExample> make_desk_corpus(const DeskCorpusOptions& options) {
    if (options.per_domain < 10) {
        throw std::invalid_argument("desk corpus needs at least 10 examples per domain");
    }
    if (!(options.shared_fraction >= 0.0 && options.shared_fraction < 1.0)) {
        throw std::invalid_argument("shared_fraction must lie in [0,1)");
    }

    // One RNG drives everything, consumed in a fixed order, so the whole
    // corpus is a pure function of the options.
    std::mt19937_64 rng(options.seed);
    auto filler_threshold = static_cast<std::uint64_t>(options.shared_fraction * 1000.0);

    std::vector<LabeledExample> corpus;
    corpus.reserve(options.per_domain * kDomainCount);
    std::unordered_set<std::string> seen;

    for (modem::Domain domain : modem::kAllDomains) {
        const std::vector<std::string>& signal = signal_pool(domain);
        std::string source = "desk:" + std::string(domain_name(domain));

        for (std::size_t n = 0; n < options.per_domain; ++n) {
            std::string text;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                std::size_t length = 8 + static_cast<std::size_t>(rng() % 5);
                std::string question;
                for (std::size_t w = 0; w < length; ++w) {
                    bool filler = rng() % 1000 < filler_threshold;
                    const std::vector<std::string>& pool = filler ? kFillerWords : signal;
                    if (!question.empty()) question += ' ';
                    question += pool[rng() % pool.size()];
                }
                question += '?';
                if (seen.insert(normalize_text(question)).second) {
                    text = std::move(question);
                    break;
                }
            }
            if (text.empty()) {
                // Practically unreachable with these pool sizes; keep
                // determinism rather than loop forever.
                text = std::string(domain_name(domain)) + " question " + std::to_string(n) + "?";
                seen.insert(normalize_text(text));
            }

            LabeledExample example;
            example.text = std::move(text);
            example.domain = domain;
            example.source = source;
            example.origin = Origin::Handcrafted;
            corpus.push_back(std::move(example));
        }
    }
    return corpus;
}

}  // namespace modem::testkit
