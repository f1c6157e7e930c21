// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coalg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An enumeration or construction would exceed a configured size limit.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// A value does not have the shape demanded by its functor. `path()` names the
/// offending position, e.g. "pi2/set[1]".
class ShapeError : public Error {
public:
    ShapeError(const std::string& what, std::string path)
        : Error(what + (path.empty() ? "" : " at " + path)), message_(what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }
    /// The description without the position.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::string path_;
};

/// A formula does not fit the sort of the functor it is evaluated against.
class SortError : public ShapeError {
public:
    using ShapeError::ShapeError;
};

/// Malformed textual input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Raised when a caller-supplied cancellation check fires.
class Cancelled : public Error {
public:
    Cancelled() : Error("operation cancelled") {}
};

}  // namespace coalg
