#pragma once

#include <stdexcept>
#include <string>

namespace hlphase {

/// Raised when an input violates a documented invariant. `invariant()` names
/// the check that failed (e.g. "hermitian", "trace", "positivity").
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string invariant, const std::string& message)
        : std::invalid_argument(message), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

}  // namespace hlphase
