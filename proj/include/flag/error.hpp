#pragma once

#include <stdexcept>
#include <string>

namespace flag {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable source, unknown language, bad start line, no checkable lines.
class SourceError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters, criteria or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed manifest or run record, or a run that does not match its case.
class DataError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    enum class Kind { transport, auth, rate_limit, capability, cache_miss, protocol };

    BackendError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

    /// Transport hiccups and rate limits may succeed on a later attempt.
    bool retryable() const noexcept { return kind_ == Kind::transport || kind_ == Kind::rate_limit; }

private:
    Kind kind_;
};

const char* to_string(BackendError::Kind kind) noexcept;

}  // namespace flag
