#pragma once

#include <stdexcept>
#include <string>

namespace dauval {

/// Broad failure categories; the CLI maps these onto process exit codes.
enum class ErrorKind {
    usage,       // bad argument, malformed or invalid input
    fit_failure, // numerical fit did not converge or no decay
    data,        // degenerate or insufficient data
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorKind::usage, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class CoverageError : public Error {
public:
    explicit CoverageError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NoDecayError : public Error {
public:
    NoDecayError(const std::string& what, double slope)
        : Error(ErrorKind::fit_failure, what), slope_(slope) {}
    double slope() const noexcept { return slope_; }

private:
    double slope_;
};

class ConfidenceError : public Error {
public:
    ConfidenceError(const std::string& what, std::size_t failed, std::size_t total)
        : Error(ErrorKind::fit_failure, what), failed_(failed), total_(total) {}
    std::size_t failed() const noexcept { return failed_; }
    std::size_t total() const noexcept { return total_; }

private:
    std::size_t failed_;
    std::size_t total_;
};

} // namespace dauval
