#pragma once

#include <cstddef>
#include <functional>

namespace csvd {

// Worker-thread cap. 0 means "auto": CSVD_THREADS if set and positive,
// otherwise std::thread::hardware_concurrency().
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs body(chunk) for chunk in [0, chunk_count). Chunks are distributed over
// worker threads; callers must only write to chunk-private storage so that
// results do not depend on the number of threads.
void parallel_for_chunks(std::size_t chunk_count,
                         const std::function<void(std::size_t)>& body);

}  // namespace csvd
