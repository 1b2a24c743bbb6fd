#include "lpm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lpm {

namespace {
std::atomic<int> g_threads{1};
thread_local bool t_inside = false;
}

void set_thread_count(int n) { g_threads = n < 0 ? 1 : n; }

int thread_count() {
    const int n = g_threads.load();
    if (n > 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(long begin, long end, const std::function<void(long)>& body) {
    const long count = end - begin;
    if (count <= 0) return;
    const int workers = static_cast<int>(std::min<long>(thread_count(), count));
    if (workers <= 1 || t_inside) {
        for (long i = begin; i < end; ++i) body(i);
        return;
    }
    std::atomic<long> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        const bool outer = t_inside;
        t_inside = true;
        for (long i; (i = next.fetch_add(1)) < end;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = end;
            }
        }
        t_inside = outer;
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lpm
