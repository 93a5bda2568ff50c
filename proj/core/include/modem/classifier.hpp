#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modem/domain.hpp"
#include "modem/featurizer.hpp"
#include "modem/types.hpp"

namespace modem {

struct TrainingConfig {
    std::uint32_t epochs = 1;
    std::uint32_t batch_size = 32;
    // The remote-encoder fine-tune default is 1e-5; for the native linear
    // model that barely moves the weights, so 0.1 is the default here and
    // the value used is recorded in training_meta.
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;
};

struct TrainingMeta {
    std::uint32_t epochs = 0;
    std::uint32_t batch_size = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    std::string corpus_digest;
    std::uint64_t corpus_size = 0;
    double final_loss = 0.0;

    nlohmann::json to_json() const;
    static TrainingMeta from_json(const nlohmann::json& j);
};

/// Multinomial logistic model over the hashed feature space. Weights are
/// dense in memory (5 x 2^20) and stored sparse on disk. predict is a
/// pure function of (model, text).
struct ClassifierModel {
    std::uint32_t hash_dimensions = kHashDimensions;
    std::vector<double> weights;  // kDomainCount * hash_dimensions, row-major
    std::array<double, kDomainCount> bias{};
    TrainingMeta meta;

    static ClassifierModel zeros();

    double& weight(std::size_t domain_ordinal, std::uint32_t feature) {
        return weights[domain_ordinal * hash_dimensions + feature];
    }
    double weight(std::size_t domain_ordinal, std::uint32_t feature) const {
        return weights[domain_ordinal * hash_dimensions + feature];
    }

    std::array<double, kDomainCount> raw_scores(const FeatureVector& features) const;
};

/// Softmax over the five linear scores; argmax with lowest-ordinal ties.
RoutingDecision predict(const ClassifierModel& model, std::string_view text);

/// Deterministic mini-batch gradient descent on multinomial cross-entropy.
/// Throws EmptyCorpusError / MissingDomainError on bad corpora.
ClassifierModel train(std::span<const LabeledExample> corpus, const TrainingConfig& config);

/// Five-way prediction interface shared by the native model and the
/// remote-encoder adapter. Implementations must be safe for concurrent
/// calls.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual RoutingDecision classify(std::string_view text) const = 0;
};

class NativeClassifier final : public Classifier {
public:
    explicit NativeClassifier(ClassifierModel model) : model_(std::move(model)) {}

    RoutingDecision classify(std::string_view text) const override {
        return predict(model_, text);
    }
    const ClassifierModel& model() const { return model_; }

private:
    ClassifierModel model_;
};

/// True-domain rows, predicted-domain columns.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kDomainCount>, kDomainCount> counts{};

    std::uint64_t row_total(Domain d) const;
    std::uint64_t diagonal(Domain d) const;
    std::uint64_t trace() const;
    std::uint64_t total() const;
    double per_category_accuracy(Domain d) const;
    double overall_accuracy() const;

    nlohmann::json to_json() const;
};

ConfusionMatrix evaluate(const Classifier& classifier,
                         std::span<const LabeledExample> examples);

/// Plain-text accuracy table (Category/Accuracy rows ending in Overall).
/// Rows without examples are omitted; percentages are exact half-up
/// two-decimal renderings of the integer counts.
std::string render_confusion_report(const ConfusionMatrix& matrix);

/// Exact half-up two-decimal percentage of numer/denom, e.g. "81.18%".
std::string format_percent(std::uint64_t numer, std::uint64_t denom);

/// Binary model file: magic "MODEMCLS", version byte, length-prefixed
/// sections (feature config, sparse weights, bias, training meta), and a
/// trailing CRC-32 of all preceding bytes.
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace modem
