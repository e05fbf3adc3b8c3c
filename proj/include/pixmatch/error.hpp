#pragma once

#include <stdexcept>
#include <string>

namespace pixmatch {

/// Base for every error the toolkit raises. `kind()` is a stable
/// machine-readable tag used in CLI error objects and failure counts.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Malformed input row; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error("parse_error", file + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DanglingReference : public Error {
public:
    explicit DanglingReference(const std::string& id, const std::string& context = {})
        : Error("dangling_reference",
                "unknown node \"" + id + "\"" + (context.empty() ? "" : " (" + context + ")")),
          id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& message) : Error("invalid_input", message) {}
    InvalidInput(std::string kind, const std::string& message)
        : Error(std::move(kind), message) {}
};

}  // namespace pixmatch
