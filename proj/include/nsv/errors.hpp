#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace nsv {

/// Caller violated an operation precondition (bad parameter, mismatched lattice, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A trajectory produced a non-finite coefficient or exceeded the enstrophy cap.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double time, std::array<int, 3> mode)
        : std::runtime_error(what), time_(time), mode_(mode) {}

    double time() const { return time_; }
    /// Wavevector (or {shell, 0, 0} for the shell model) of the first bad coefficient;
    /// {0, 0, 0} when the cause was the enstrophy cap.
    std::array<int, 3> mode() const { return mode_; }

private:
    double time_;
    std::array<int, 3> mode_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nsv
