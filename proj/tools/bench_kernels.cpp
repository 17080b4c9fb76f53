// Times every kernel against its serial reference and prints one CSV-style
// row per kernel: name, size, serial ms, parallel ms, speedup.
//
//   bench_kernels [n] [d] [reps]

#include "sepclust/kernels.hpp"
#include "sepclust/matrix.hpp"
#include "sepclust/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

using namespace sepclust;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    std::vector<double> times;
    times.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) {
        auto start = std::chrono::steady_clock::now();
        fn();
        auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2]; // median
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000;
    const std::size_t d = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 64;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 5;
    const std::size_t k = 8;

    Rng rng(42);
    Matrix a(n, d), centers(k, d), basis(8, d);
    for (double& v : a.data()) v = rng.normal();
    for (std::size_t r = 0; r < k; ++r) centers.set_row(r, a.row(r * (n / k)));
    for (double& v : basis.data()) v = rng.normal();

    std::vector<double> x(d), y(n), out_d(d), out_n(n);
    for (double& v : x) v = rng.normal();
    for (double& v : y) v = rng.normal();

    std::vector<int> labels;
    std::vector<double> d1, d2;
    kernels::serial::assign_nearest(a, centers, labels, d1);
    Matrix means, projected, gram;

    std::printf("# kernels benchmark: n=%zu d=%zu k=%zu reps=%d threads=%d\n", n, d, k, reps,
                kernels::max_threads());
    std::printf("kernel,n,d,serial_ms,parallel_ms,speedup\n");

    struct Case {
        const char* name;
        std::function<void()> serial, parallel;
    };
    const Case cases[] = {
        {"matvec", [&] { kernels::serial::matvec(a, x, out_n); },
         [&] { kernels::matvec(a, x, out_n); }},
        {"matvec_t", [&] { kernels::serial::matvec_t(a, y, out_d); },
         [&] { kernels::matvec_t(a, y, out_d); }},
        {"matmul_tn", [&] { kernels::serial::matmul_tn(a, a, gram); },
         [&] { kernels::matmul_tn(a, a, gram); }},
        {"frobenius_sq", [&] { (void)kernels::serial::frobenius_sq(a); },
         [&] { (void)kernels::frobenius_sq(a); }},
        {"assign_nearest", [&] { kernels::serial::assign_nearest(a, centers, labels, d1); },
         [&] { kernels::assign_nearest(a, centers, labels, d1); }},
        {"assign_nearest_two",
         [&] { kernels::serial::assign_nearest_two(a, centers, labels, d1, d2); },
         [&] { kernels::assign_nearest_two(a, centers, labels, d1, d2); }},
        {"cluster_means", [&] { kernels::serial::cluster_means(a, labels, k, nullptr, means); },
         [&] { kernels::cluster_means(a, labels, k, nullptr, means); }},
        {"kmeans_cost", [&] { (void)kernels::serial::kmeans_cost(a, labels, centers); },
         [&] { (void)kernels::kmeans_cost(a, labels, centers); }},
        {"project_rows", [&] { kernels::serial::project_rows_onto(a, basis, projected); },
         [&] { kernels::project_rows_onto(a, basis, projected); }},
    };

    for (const Case& c : cases) {
        double serial_ms = time_ms(c.serial, reps);
        double parallel_ms = time_ms(c.parallel, reps);
        std::printf("%s,%zu,%zu,%.3f,%.3f,%.2f\n", c.name, n, d, serial_ms, parallel_ms,
                    parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0);
    }
    return 0;
}
