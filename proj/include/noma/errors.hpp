#pragma once

#include <stdexcept>
#include <string>

namespace noma {

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Least-squares design matrix numerically rank deficient.
struct ill_conditioned_error : std::runtime_error {
    double gram_condition;
    explicit ill_conditioned_error(const std::string& msg, double cond)
        : std::runtime_error(msg), gram_condition(cond) {}
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad magic or unsupported version in a binary file.
struct format_error : io_error {
    using io_error::io_error;
};

// File shorter than its header promises.
struct truncation_error : io_error {
    using io_error::io_error;
};

} // namespace noma
