#pragma once

#include <stdexcept>
#include <string>

namespace lsfusion {

// File, format, parse, and calibration problems. CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Solver or evaluation produced non-finite values. CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lsfusion
