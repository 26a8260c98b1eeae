#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace oblv {

// Run independent tasks on up to `jobs` threads. Each task is deterministic
// on its own, so scheduling order never changes results; with jobs <= 1 the
// tasks run inline.
inline void run_tasks(int jobs, const std::vector<std::function<void()>>& tasks) {
    if (jobs <= 1 || tasks.size() <= 1) {
        for (const auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || failed.load()) return;
            try {
                tasks[i]();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace oblv
