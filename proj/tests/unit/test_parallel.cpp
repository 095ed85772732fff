#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include "test_support.hpp"

using namespace csvd;

TEST_CASE("every chunk runs exactly once") {
  for (unsigned threads : {1u, 2u, 5u}) {
    set_thread_count(threads);
    CHECK(thread_count() == threads);
    for (std::size_t chunks : {std::size_t(0), std::size_t(1), std::size_t(7), std::size_t(1000)}) {
      std::vector<std::atomic<int>> hits(chunks);
      parallel_for_chunks(chunks, [&](std::size_t c) { hits[c].fetch_add(1); });
      for (const auto& h : hits) CHECK(h.load() == 1);
    }
  }
  set_thread_count(0);
}

TEST_CASE("thread cap comes from the environment when automatic") {
  setenv("CSVD_THREADS", "3", 1);
  set_thread_count(0);
  CHECK(thread_count() == 3);
  setenv("CSVD_THREADS", "0", 1);
  set_thread_count(0);
  CHECK(thread_count() >= 1);
  unsetenv("CSVD_THREADS");
  set_thread_count(0);
  CHECK(thread_count() == std::max(1u, std::thread::hardware_concurrency()));
}

TEST_CASE("exceptions from a chunk reach the caller") {
  set_thread_count(3);
  CHECK_THROWS_AS(parallel_for_chunks(20,
                                      [](std::size_t c) {
                                        if (c == 13) throw ParameterError("chunk 13");
                                      }),
                  ParameterError);
  set_thread_count(0);
}
