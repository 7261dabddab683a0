#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace allgood {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// A threshold spec, algorithm option or instance violates a precondition.
class InvalidSpec : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid-spec"; }
};

/// A numeric routine was called outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain-error"; }
};

class ReplayExhausted : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "replay-exhausted"; }
};

/// An algorithm reached a state its analysis excludes and refused to continue.
class AlgorithmAbort : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "algorithm-abort"; }
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    const char* kind() const noexcept override { return "parse-error"; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config-error"; }
};

}  // namespace allgood
