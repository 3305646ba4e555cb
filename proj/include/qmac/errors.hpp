#pragma once

#include <stdexcept>
#include <string>

namespace qmac {

// Error categories map to CLI exit codes: validation -> 2, resource_cap -> 3,
// internal -> 4.
enum class ErrorKind { validation, resource_cap, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    static Error validation(const std::string& msg) { return Error(ErrorKind::validation, msg); }
    static Error cap(const std::string& msg) { return Error(ErrorKind::resource_cap, msg); }
    static Error internal(const std::string& msg) { return Error(ErrorKind::internal, msg); }

private:
    ErrorKind kind_;
};

// Global cap on any constructed operator dimension. Overridable via the
// QMAC_DIM_CAP environment variable.
std::size_t dim_cap();

} // namespace qmac
