#include "affina/threads.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace affina {

void set_thread_count(int n) {
#ifdef _OPENMP
    if (n <= 0) {
        if (const char* env = std::getenv("AFFINA_THREADS")) {
            const int e = std::atoi(env);
            if (e > 0) n = e;
        }
    }
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace affina
