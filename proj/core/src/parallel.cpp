#include "csvd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace csvd {
namespace {

std::atomic<unsigned> g_thread_override{0};

unsigned env_threads() {
  const char* env = std::getenv("CSVD_THREADS");
  if (env == nullptr) return 0;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<unsigned>(v) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

void set_thread_count(unsigned threads) { g_thread_override = threads; }

unsigned thread_count() {
  if (unsigned t = g_thread_override.load(); t > 0) return t;
  if (unsigned t = env_threads(); t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for_chunks(std::size_t chunk_count,
                         const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(thread_count(), chunk_count);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunk_count; ++c) body(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t c = next++; c < chunk_count; c = next++) {
      try {
        body(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace csvd
