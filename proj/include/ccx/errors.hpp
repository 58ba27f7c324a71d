#pragma once

#include <stdexcept>
#include <string>

namespace ccx {

// Base class for every error raised by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad JSON line, unknown speaker, duplicate id, bad CSV).
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error(msg) {}
    parse_error(const std::string& file, std::size_t line, const std::string& msg)
        : error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}

    // 0 when no line information is available.
    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

// Numeric input outside an operation's domain (non-finite value, off-simplex
// distribution, undefined divergence).
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

// Fit/train preconditions violated (empty corpus, missing classes, n < 2).
class fit_error : public error {
public:
    explicit fit_error(const std::string& msg) : error(msg) {}
};

// Model file problems: version mismatch, checksum failure, missing fields.
class model_io_error : public error {
public:
    explicit model_io_error(const std::string& msg) : error(msg) {}
};

// Configuration invariant violations.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

}  // namespace ccx
