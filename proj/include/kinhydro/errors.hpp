#pragma once

#include <stdexcept>
#include <string>

namespace kinhydro {

/// Bad input: wrong sizes, mismatched grids, parameters out of range.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation that started fine but produced unusable numbers.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, double last_valid_time = 0.0)
        : std::runtime_error(what), last_valid_time(last_valid_time) {}
    double last_valid_time;
};

}  // namespace kinhydro
