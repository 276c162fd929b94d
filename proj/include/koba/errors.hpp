#ifndef KOBA_ERRORS_HPP
#define KOBA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace koba
{

enum class ErrorKind {
    domain,
    range,
    argument,
    invalid_modulus,
    sampling,
    tolerance_not_met,
    ill_conditioned_boundary,
    degenerate_defining_function,
    certificate_failure,
    embedding_violation,
    conditioning,
    ray_escape,
    map_error,
    sequence_spec,
    config,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so that callers
// (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised when an iterative refinement stops before reaching its tolerance.
// The best available bracket is attached.
class ToleranceNotMet : public Error
{
public:
    ToleranceNotMet(const std::string &what, double best_lo, double best_hi)
        : Error(ErrorKind::tolerance_not_met, what), lo(best_lo), hi(best_hi)
    {
    }

    double lo;
    double hi;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) { throw Error(kind, what); }

} // namespace koba

#endif
