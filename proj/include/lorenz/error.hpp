#pragma once

#include <stdexcept>
#include <string>

namespace lorenz {

// Invalid input: bad configuration, violated precondition, malformed file.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numeric computation has no meaningful answer (zero total income, ...).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A rejection sampler hit its attempt cap.
class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

} // namespace lorenz
