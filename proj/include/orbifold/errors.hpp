#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace orbifold {

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a computation would exceed a hard resource guard.
class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on filesystem failures while reading or emitting artifacts.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Outcome of a check that reports instead of throwing. `witness` holds the
/// indices of the first violation when one exists (meaning depends on the check).
struct ValidationReport {
    bool ok = true;
    std::string message;
    std::vector<int> witness;
};

}  // namespace orbifold
