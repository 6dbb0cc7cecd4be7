#include "naesat/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace naesat {

unsigned thread_count() {
    if (const char* env = std::getenv("NAESAT_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace {
// set on pool threads; nested calls run inline
thread_local bool in_worker = false;
}  // namespace

void parallel_chunks(size_t chunks, const std::function<void(size_t)>& fn) {
    unsigned workers = static_cast<unsigned>(std::min<size_t>(thread_count(), chunks));
    if (workers <= 1 || in_worker) {
        for (size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            in_worker = true;
            for (;;) {
                size_t c = next.fetch_add(1);
                if (c >= chunks) return;
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace naesat
