#include "midorf/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace midorf {

int worker_count() {
    const char* env = std::getenv("MIDORF_THREADS");
    int hw = omp_get_max_threads();
    if (env == nullptr || *env == '\0') return hw;
    int requested = std::atoi(env);
    if (requested <= 0) return hw;
    return requested < hw ? requested : hw;
}

void parallel_for(int n, Exec exec, const std::function<void(int)>& fn) {
    if (exec == Exec::Serial || worker_count() == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace midorf
