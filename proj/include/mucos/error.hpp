#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mucos {

// Base for every error raised by the toolkit. Commands translate these into
// structured error records and a nonzero exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(std::string path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what),
          path_(std::move(path)),
          line_(line) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

// Unknown entity/relation label or id, or a token id outside the vocabulary.
class VocabularyError : public Error {
public:
    using Error::Error;
};

// Invalid settings: zero k, bad encoder shapes, empty training split, ...
class ConfigError : public Error {
public:
    using Error::Error;
};

// A caller broke an operation's precondition (e.g. ranking an excluded truth).
class ContractError : public Error {
public:
    using Error::Error;
};

// Dataset-level problems: overlapping splits, undefined statistics.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace mucos
