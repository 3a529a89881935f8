#include "gldeg/parallel.hpp"

#include <cstdlib>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gldeg {

namespace {
std::once_flag g_init_once;
int g_threads = 1;
}

void init_threads() {
    std::call_once(g_init_once, [] {
#ifdef _OPENMP
        g_threads = omp_get_max_threads();
        if (const char* env = std::getenv("GLDEG_THREADS")) {
            int n = std::atoi(env);
            if (n >= 1 && n < g_threads) g_threads = n;
        }
        omp_set_num_threads(g_threads);
#else
        g_threads = 1;
#endif
    });
}

int thread_count() {
    init_threads();
    return g_threads;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    init_threads();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        body(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

double pairwise_sum(const std::vector<double>& v) {
    // recursion bottom at 32 keeps the call overhead negligible
    struct Rec {
        static double sum(const double* p, std::size_t n) {
            if (n <= 32) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += p[i];
                return s;
            }
            std::size_t half = n / 2;
            return sum(p, half) + sum(p + half, n - half);
        }
    };
    return Rec::sum(v.data(), v.size());
}

} // namespace gldeg
