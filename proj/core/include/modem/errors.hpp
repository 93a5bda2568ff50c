#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace modem {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

struct UnknownDomainError : Error {
    explicit UnknownDomainError(const std::string& name)
        : Error("unknown domain: '" + name + "'") {}
};

struct EmptyCorpusError : Error {
    EmptyCorpusError() : Error("training corpus is empty") {}
};

struct MissingDomainError : Error {
    explicit MissingDomainError(const std::string& domain_name)
        : Error("corpus has no examples for domain " + domain_name), domain_name(domain_name) {}
    std::string domain_name;
};

struct EmptyEvaluationSetError : Error {
    EmptyEvaluationSetError() : Error("evaluation set is empty") {}
};

struct CorruptModelError : Error {
    using Error::Error;
};

struct CorpusTooSmallError : Error {
    using Error::Error;
};

struct FatalIngestError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct BindError : Error {
    using Error::Error;
};

/// Remote classifier responses that violate the wire contract
/// (missing/extra domains, non-normalizable scores, bad JSON).
struct ProtocolError : Error {
    using Error::Error;
};

struct ClassifierUnavailableError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& what) : Error(what), line(0) {}
    SchemaError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;  // 0 when the location is carried in the message
};

struct MissingDomainMappingError : Error {
    using Error::Error;
};

struct JudgeProtocolError : Error {
    using Error::Error;
};

struct UnknownExpertError : Error {
    explicit UnknownExpertError(const std::string& model_id)
        : Error("usage record references unknown expert model: " + model_id) {}
};

/// Failure classes for HTTP backend calls. Timeout, Transport and 5xx
/// upstream statuses are retryable; everything else is not.
enum class BackendErrorKind {
    Timeout,
    Transport,
    Upstream,
    MalformedUpstream,
};

struct BackendError : Error {
    BackendError(BackendErrorKind kind, const std::string& what, int status = 0,
                 std::string body = {})
        : Error(what), kind(kind), status(status), body(std::move(body)) {}

    bool retryable() const {
        return kind == BackendErrorKind::Timeout || kind == BackendErrorKind::Transport ||
               (kind == BackendErrorKind::Upstream && status >= 500);
    }

    BackendErrorKind kind;
    int status = 0;
    std::string body;
};

}  // namespace modem
