#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace valelim {

/// Base class for every error the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed network text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string & message, std::size_t line = 0, std::size_t column = 0);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Enumeration would visit more complete states than the oracle budget allows.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// A search run hit its wall-clock timeout or node limit.
class SearchAborted : public Error {
public:
    enum class Reason { timeout, node_limit };

    SearchAborted(Reason reason, const std::string & message) : Error(message), reason_(reason) {}

    Reason reason() const noexcept { return reason_; }

private:
    Reason reason_;
};

/// A cross-check inside the engine or cache failed; always a bug.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace valelim
