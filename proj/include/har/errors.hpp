#pragma once

#include <stdexcept>
#include <string>

namespace har {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or mismatched shapes. CLI exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

// Unreadable or malformed input data. CLI exit code 2.
struct DataError : Error {
    using Error::Error;
};

// Non-finite values or a failed numeric check. CLI exit code 3.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace har
