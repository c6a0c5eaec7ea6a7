#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zappa {

/// Worker count for a request; 0 means the runtime default.
inline int resolve_threads(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

/// Static-schedule loop over [0, n). The body must not throw.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const int nt = resolve_threads(threads);
    const auto count = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for num_threads(nt) schedule(static) if (nt > 1)
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    (void)nt;
}

}  // namespace zappa
