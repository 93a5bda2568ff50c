#pragma once

#include <cstdint>
#include <string>

#include "modem/classifier.hpp"

namespace modem {

/// Adapter for an externally served encoder classifier. Speaks
/// POST {"text": ...} -> {"scores": {"Math": p, ..., "Other": p}}.
class RemoteClassifier final : public Classifier {
public:
    RemoteClassifier(std::string endpoint_url, std::uint32_t timeout_ms = 5000);

    /// Validates the closed five-domain score set: missing or extra
    /// domains, negative/non-finite scores, or a sum off by more than
    /// 1e-6 raise ProtocolError. Scores are renormalized exactly before
    /// the argmax. Transport failures and timeouts raise
    /// ClassifierUnavailableError.
    RoutingDecision classify(std::string_view text) const override;

    const std::string& endpoint_url() const { return endpoint_url_; }

private:
    std::string endpoint_url_;
    std::uint32_t timeout_ms_;
};

}  // namespace modem
