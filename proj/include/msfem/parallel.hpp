#pragma once

#include <exception>

#include <omp.h>

namespace msfem {

/// Kernels that loop over independent items (edges, blocks, cells) take an
/// Execution tag. The serial path is the reference the tests compare against.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, count). Work items must not share mutable
/// state. The first exception thrown by any item is rethrown on the caller.
template <class Body>
void parallel_for(Execution exec, int count, Body&& body)
{
    if (exec == Execution::serial || count < 2) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(msfem_parallel_for_failure)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

inline void set_thread_count(int threads)
{
    if (threads > 0)
        omp_set_num_threads(threads);
}

inline int available_threads() { return omp_get_max_threads(); }

} // namespace msfem
