#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectral_forge {

enum class ErrorKind {
    Shape,
    Dimension,
    Unimodularity,
    Cardinality,
    Precondition,
    Parameter,
    Overflow,
    Consistency,
    RadiusExhausted,
    SearchExhausted,
    Ordering,
    Mapping,
    Construction,
    Budget,
    Parse,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so that callers (the
/// CLI in particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace spectral_forge
