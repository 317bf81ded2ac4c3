#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssotr/parallel.hpp"

using namespace ssotr;

TEST_SUITE("parallel") {

TEST_CASE("every index runs exactly once") {
    const int count = 1000;
    std::vector<int> hits(count, 0);
    parallel_for(count, 7, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    bool all_once = true;
    for (int h : hits) all_once = all_once && h == 1;
    CHECK(all_once);
}

TEST_CASE("slot-written results are identical for every thread count") {
    const int count = 513;
    auto run = [&](int threads) {
        std::vector<double> out(count);
        parallel_for(count, threads, [&](int i) {
            double v = 0.0;
            for (int k = 1; k <= 50; ++k) v += std::sin(i * 0.01 + k) / k;
            out[static_cast<std::size_t>(i)] = v;
        });
        return out;
    };
    const std::vector<double> serial = run(1);
    CHECK(run(4) == serial);
    CHECK(run(16) == serial);
}

TEST_CASE("a work-item exception is rethrown on the caller") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [&](int i) {
                                     if (i == 17) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("degenerate counts") {
    int calls = 0;
    parallel_for(0, 4, [&](int) { ++calls; });
    CHECK(calls == 0);
    parallel_for(3, 64, [&](int) {}); // more threads than work is fine
    std::vector<int> order;
    parallel_for(5, 1, [&](int i) { order.push_back(i); });
    CHECK(order == std::vector<int>{0, 1, 2, 3, 4}); // single thread runs in order
}

TEST_CASE("default_thread_count honors SSOTR_THREADS") {
    const char* saved = std::getenv("SSOTR_THREADS");
    const std::string restore = saved ? saved : "";

    setenv("SSOTR_THREADS", "3", 1);
    CHECK(default_thread_count() == 3);
    setenv("SSOTR_THREADS", "not-a-number", 1);
    CHECK(default_thread_count() >= 1);
    unsetenv("SSOTR_THREADS");
    CHECK(default_thread_count() >= 1);

    if (saved) setenv("SSOTR_THREADS", restore.c_str(), 1);
}

} // TEST_SUITE("parallel")
