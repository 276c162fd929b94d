#include <koba/parallel.hpp>

#include <algorithm>
#include <cstdlib>
#include <string>

#include <koba/errors.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace koba
{

int max_threads()
{
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void apply_thread_env()
{
    const char *env = std::getenv("KOBA_THREADS");
    if (env == nullptr || *env == '\0') {
        return;
    }
    const std::string text(env);
    std::size_t used = 0;
    long n = 0;
    try {
        n = std::stol(text, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != text.size() || n < 1) {
        fail(ErrorKind::config, "KOBA_THREADS must be a positive integer, got '" + text + "'");
    }
#if defined(_OPENMP)
    omp_set_num_threads(static_cast<int>(std::min<long>(n, omp_get_num_procs())));
#endif
}

} // namespace koba
