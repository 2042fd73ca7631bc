#pragma once

#include <stdexcept>
#include <string>

namespace srfot {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad CLI usage or an inconsistent run configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    enum class Code {
        MissingGold,
        BadLabel,
        EmptyQuestion,
        EmptyId,
        DuplicateOption,
        DuplicateId,
        EmptyOptions,
        UnsortedLabels,
        UnknownInstanceId,
        InvalidAnnotation,
    };

    ValidationError(Code code, const std::string& msg) : Error(msg), code(code) {}

    Code code;
};

// Dataset, template and exemplar file problems.
class DataError : public Error {
public:
    enum class Code { FileMissing, SchemaMismatch, CountMismatch };

    DataError(Code code, const std::string& msg) : Error(msg), code(code) {}

    Code code;
};

class ProviderError : public Error {
public:
    enum class Code {
        RateLimited,
        Timeout,
        MalformedResponse,
        AuthError,
        MissingScriptEntry,
        Transport,
    };

    ProviderError(Code code, const std::string& msg) : Error(msg), code(code) {}

    Code code;
};

class EmptyBallotError : public Error {
public:
    EmptyBallotError() : Error("empty ballot: no answers to vote over") {}
};

}  // namespace srfot
