#pragma once

#include <stdexcept>
#include <string>

namespace arz {

/// Malformed or inconsistent run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: blow-up, CFL violation, degenerate state (CLI exit code 3).
struct BlowupError : std::runtime_error {
    BlowupError(const std::string& msg, long step_index, double time_s)
        : std::runtime_error(msg + " (step " + std::to_string(step_index) + ", t=" +
                             std::to_string(time_s) + " s)"),
          step(step_index),
          time(time_s) {}
    long step;
    double time;  // [s]
};

/// Bad or insufficient input data: gaps, empty datasets, schema mismatches (CLI exit code 4).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Calibration failed to produce an admissible diagram; carries the best fit seen.
struct CalibrationError : std::runtime_error {
    CalibrationError(const std::string& msg, double best_residual)
        : std::runtime_error(msg + " (best residual " + std::to_string(best_residual) + ")"),
          residual(best_residual) {}
    double residual;
};

/// Observer machinery asked to operate outside the congested regime.
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace arz
