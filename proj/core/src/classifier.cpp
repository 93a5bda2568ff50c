#include "modem/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "modem/errors.hpp"
#include "modem/text.hpp"

namespace modem {

namespace {

std::array<double, kDomainCount> softmax(const std::array<double, kDomainCount>& scores) {
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);
    std::array<double, kDomainCount> out{};
    double sum = 0.0;
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        out[i] = std::exp(scores[i] - max_score);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
    return out;
}

// Deterministic Fisher-Yates; mt19937_64 output is specified by the
// standard, so permutations are identical across platforms.
void shuffle_indices(std::vector<std::size_t>& order, std::mt19937_64& rng);

std::string corpus_digest(std::span<const LabeledExample> corpus) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& ex : corpus) {
        mix(ex.text);
        mix("\x1f");
        mix(domain_name(ex.domain));
        mix("\x1e");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

void TrainingConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
}

nlohmann::json TrainingMeta::to_json() const {
    return nlohmann::json{
        {"epochs", epochs},
        {"batch_size", batch_size},
        {"learning_rate", learning_rate},
        {"seed", seed},
        {"corpus_digest", corpus_digest},
        {"corpus_size", corpus_size},
        {"final_loss", final_loss},
    };
}

TrainingMeta TrainingMeta::from_json(const nlohmann::json& j) {
    TrainingMeta m;
    m.epochs = j.value("epochs", 0u);
    m.batch_size = j.value("batch_size", 0u);
    m.learning_rate = j.value("learning_rate", 0.0);
    m.seed = j.value("seed", std::uint64_t{0});
    m.corpus_digest = j.value("corpus_digest", "");
    m.corpus_size = j.value("corpus_size", std::uint64_t{0});
    m.final_loss = j.value("final_loss", 0.0);
    return m;
}

ClassifierModel ClassifierModel::zeros() {
    ClassifierModel m;
    m.weights.assign(static_cast<std::size_t>(kDomainCount) * kHashDimensions, 0.0);
    return m;
}

std::array<double, kDomainCount> ClassifierModel::raw_scores(const FeatureVector& features) const {
    std::array<double, kDomainCount> scores = bias;
    for (std::size_t c = 0; c < kDomainCount; ++c) {
        const double* row = weights.data() + c * hash_dimensions;
        double dot = 0.0;
        for (const auto& [index, value] : features.entries) {
            dot += row[index] * value;
        }
        scores[c] += dot;
    }
    return scores;
}

RoutingDecision predict(const ClassifierModel& model, std::string_view text) {
    const FeatureVector features = featurize(text);
    return RoutingDecision::from_scores(softmax(model.raw_scores(features)));
}

namespace {

void shuffle_indices(std::vector<std::size_t>& order, std::mt19937_64& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
}

}  // namespace

ClassifierModel train(std::span<const LabeledExample> corpus, const TrainingConfig& config) {
    config.validate();
    if (corpus.empty()) {
        throw EmptyCorpusError();
    }
    std::array<std::uint64_t, kDomainCount> domain_counts{};
    for (const auto& ex : corpus) {
        ++domain_counts[static_cast<std::size_t>(ordinal(ex.domain))];
    }
    for (Domain d : kAllDomains) {
        if (domain_counts[static_cast<std::size_t>(ordinal(d))] == 0) {
            throw MissingDomainError(std::string(domain_name(d)));
        }
    }

    std::vector<FeatureVector> features;
    features.reserve(corpus.size());
    for (const auto& ex : corpus) {
        features.push_back(featurize(ex.text));
    }

    ClassifierModel model = ClassifierModel::zeros();
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<std::array<double, kDomainCount>> batch_grads(config.batch_size);

    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            shuffle_indices(order, rng);
        }
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::size_t batch = end - start;
            // Forward pass at the batch-start weights.
            for (std::size_t k = 0; k < batch; ++k) {
                const std::size_t idx = order[start + k];
                auto probs = softmax(model.raw_scores(features[idx]));
                probs[static_cast<std::size_t>(ordinal(corpus[idx].domain))] -= 1.0;
                batch_grads[k] = probs;
            }
            const double step = config.learning_rate / static_cast<double>(batch);
            for (std::size_t k = 0; k < batch; ++k) {
                const std::size_t idx = order[start + k];
                for (std::size_t c = 0; c < kDomainCount; ++c) {
                    const double delta = step * batch_grads[k][c];
                    if (delta == 0.0) continue;
                    model.bias[c] -= delta;
                    double* row = model.weights.data() + c * model.hash_dimensions;
                    for (const auto& [findex, fvalue] : features[idx].entries) {
                        row[findex] -= delta * fvalue;
                    }
                }
            }
        }
    }

    double loss = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto probs = softmax(model.raw_scores(features[i]));
        const double p = probs[static_cast<std::size_t>(ordinal(corpus[i].domain))];
        loss -= std::log(std::max(p, 1e-300));
    }
    loss /= static_cast<double>(corpus.size());
    if (!std::isfinite(loss)) {
        throw Error("training diverged: non-finite loss");
    }

    model.meta.epochs = config.epochs;
    model.meta.batch_size = config.batch_size;
    model.meta.learning_rate = config.learning_rate;
    model.meta.seed = config.seed;
    model.meta.corpus_digest = corpus_digest(corpus);
    model.meta.corpus_size = corpus.size();
    model.meta.final_loss = loss;
    return model;
}

std::uint64_t ConfusionMatrix::row_total(Domain d) const {
    std::uint64_t sum = 0;
    for (std::uint64_t c : counts[static_cast<std::size_t>(ordinal(d))]) sum += c;
    return sum;
}

std::uint64_t ConfusionMatrix::diagonal(Domain d) const {
    const auto i = static_cast<std::size_t>(ordinal(d));
    return counts[i][i];
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kDomainCount; ++i) sum += counts[i][i];
    return sum;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (Domain d : kAllDomains) sum += row_total(d);
    return sum;
}

double ConfusionMatrix::per_category_accuracy(Domain d) const {
    const std::uint64_t row = row_total(d);
    return row == 0 ? 0.0 : static_cast<double>(diagonal(d)) / static_cast<double>(row);
}

double ConfusionMatrix::overall_accuracy() const {
    const std::uint64_t all = total();
    return all == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(all);
}

nlohmann::json ConfusionMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::object();
    nlohmann::json accuracy = nlohmann::json::object();
    for (Domain t : kAllDomains) {
        nlohmann::json row = nlohmann::json::object();
        for (Domain p : kAllDomains) {
            row[std::string(domain_name(p))] =
                counts[static_cast<std::size_t>(ordinal(t))][static_cast<std::size_t>(ordinal(p))];
        }
        rows[std::string(domain_name(t))] = std::move(row);
        if (row_total(t) > 0) {
            accuracy[std::string(domain_name(t))] = format_percent(diagonal(t), row_total(t));
        }
    }
    nlohmann::json j{
        {"counts", std::move(rows)},
        {"per_category_accuracy", std::move(accuracy)},
        {"total", total()},
    };
    if (total() > 0) {
        j["overall_accuracy"] = format_percent(trace(), total());
    }
    return j;
}

ConfusionMatrix evaluate(const Classifier& classifier,
                         std::span<const LabeledExample> examples) {
    if (examples.empty()) {
        throw EmptyEvaluationSetError();
    }
    ConfusionMatrix matrix;
    for (const auto& ex : examples) {
        const RoutingDecision decision = classifier.classify(ex.text);
        ++matrix.counts[static_cast<std::size_t>(ordinal(ex.domain))]
                       [static_cast<std::size_t>(ordinal(decision.domain))];
    }
    return matrix;
}

std::string format_percent(std::uint64_t numer, std::uint64_t denom) {
    // Half-up rounding in integer arithmetic keeps renderings exact.
    const std::uint64_t basis = denom == 0 ? 0 : (numer * 10000 + denom / 2) / denom;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu.%02llu%%",
                  static_cast<unsigned long long>(basis / 100),
                  static_cast<unsigned long long>(basis % 100));
    return buf;
}

std::string render_confusion_report(const ConfusionMatrix& matrix) {
    // Category rows in the report order Health, Math, Science, Coding,
    // Other, then Overall.
    static constexpr std::array<Domain, kDomainCount> kReportOrder = {
        Domain::Health, Domain::Math, Domain::Science, Domain::Coding, Domain::Other,
    };
    std::string out = "Category   Accuracy\n";
    for (Domain d : kReportOrder) {
        const std::uint64_t row = matrix.row_total(d);
        if (row == 0) continue;
        char line[64];
        std::snprintf(line, sizeof(line), "%-10s %8s\n", std::string(domain_name(d)).c_str(),
                      format_percent(matrix.diagonal(d), row).c_str());
        out += line;
    }
    char line[64];
    std::snprintf(line, sizeof(line), "%-10s %8s\n", "Overall",
                  format_percent(matrix.trace(), matrix.total()).c_str());
    out += line;
    return out;
}

}  // namespace modem
