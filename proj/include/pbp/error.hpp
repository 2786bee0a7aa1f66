#pragma once

#include <stdexcept>
#include <string>

namespace pbp {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed dataset files, invalid labels, failed sampling preconditions.
class DataError : public Error {
public:
    using Error::Error;
};

/// Unknown template family/kind, unbound slots, malformed template bodies.
class TemplateError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A later pipeline stage was asked to run before the artifact it consumes exists.
class MissingArtifactError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

/// Raised before any network traffic when the prompt estimate exceeds the agent limit.
class TooLongError : public ProviderError {
public:
    TooLongError(const std::string& agent_id, std::size_t estimate, std::size_t limit)
        : ProviderError("prompt too long for agent '" + agent_id + "': ~" + std::to_string(estimate) +
                        " tokens > limit " + std::to_string(limit)),
          estimate_(estimate),
          limit_(limit) {}

    std::size_t estimate() const { return estimate_; }
    std::size_t limit() const { return limit_; }

private:
    std::size_t estimate_;
    std::size_t limit_;
};

/// Connection failures, 429 and 5xx. `retryable()` tells the retry loop whether to try again.
class TransportError : public ProviderError {
public:
    TransportError(const std::string& what, bool retryable = true)
        : ProviderError(what), retryable_(retryable) {}

    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

/// Non-retryable semantic rejection from the backend (4xx other than 429, malformed body).
class BackendRefusalError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// A pipeline stage failed; the message names the cell / variant / example involved.
class StageError : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

}  // namespace pbp
