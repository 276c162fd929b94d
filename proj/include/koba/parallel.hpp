#ifndef KOBA_PARALLEL_HPP
#define KOBA_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <vector>

namespace koba
{

// Batch kernels take an execution policy. The serial path is the reference
// implementation; the OpenMP path must produce identical results (each
// iteration writes its own slot, reductions happen afterwards in index order).
enum class Exec { serial, parallel };

// Number of threads the OpenMP path will use (1 when built without OpenMP).
int max_threads();

// Caps the OpenMP thread count at KOBA_THREADS when set; throws config on a
// value that is not a positive integer.
void apply_thread_env();

// Runs body(i) for i in [0, n). Exceptions are captured per index and the one
// with the smallest index is rethrown after the loop.
template <typename F>
void for_each_index(std::size_t n, Exec exec, const F &body)
{
    std::vector<std::exception_ptr> errors(n);
    const auto guarded = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (exec == Exec::parallel) {
        const auto m = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            guarded(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            guarded(i);
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace koba

#endif
