#include <koba/errors.hpp>

namespace koba
{

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::domain:
            return "domain";
        case ErrorKind::range:
            return "range";
        case ErrorKind::argument:
            return "argument";
        case ErrorKind::invalid_modulus:
            return "invalid-modulus";
        case ErrorKind::sampling:
            return "sampling";
        case ErrorKind::tolerance_not_met:
            return "tolerance-not-met";
        case ErrorKind::ill_conditioned_boundary:
            return "ill-conditioned-boundary";
        case ErrorKind::degenerate_defining_function:
            return "degenerate-defining-function";
        case ErrorKind::certificate_failure:
            return "certificate-failure";
        case ErrorKind::embedding_violation:
            return "embedding-violation";
        case ErrorKind::conditioning:
            return "conditioning";
        case ErrorKind::ray_escape:
            return "ray-escape";
        case ErrorKind::map_error:
            return "map-error";
        case ErrorKind::sequence_spec:
            return "sequence-spec";
        case ErrorKind::config:
            return "config";
    }
    return "unknown";
}

} // namespace koba
