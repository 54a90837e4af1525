#include "spiral/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spiral {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (n <= 0) return;
    int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    t = std::clamp(t, 1, n);
    if (t == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto worker = [&] {
        for (int i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (int k = 0; k < t; ++k) pool.emplace_back(worker);
    pool.clear();
    if (first) std::rethrow_exception(first);
}

}  // namespace spiral
