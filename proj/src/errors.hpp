#pragma once

#include <stdexcept>
#include <string>

namespace gridfdd {

/// Bad value in a user-supplied configuration or parameter set.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller violated a documented precondition (shape mismatch, stale cache, ...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Non-finite values or a numerically impossible solve.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed fault schedule (overlap, bad interval, missing resistance).
class ScheduleError : public std::runtime_error {
public:
    explicit ScheduleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// State became non-finite during integration; message names the timestep.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite loss during training; message names epoch and batch.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gridfdd
