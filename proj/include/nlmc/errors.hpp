#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nlmc {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Caller violated a documented precondition (e.g. truncating a signed kernel).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Adaptive quadrature exhausted its refinement depth before meeting tolerance.
class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(const std::string& what, double last_estimate)
        : Error(what), last_estimate_(last_estimate) {}

    double last_estimate() const noexcept { return last_estimate_; }

private:
    double last_estimate_;
};

// Time integration produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::int64_t step)
        : Error(what), step_(step) {}

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key, int line = 0)
        : Error(what), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path)
        : Error(what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace nlmc
