#ifndef WAVEGUIDE_PARALLEL_HPP
#define WAVEGUIDE_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace waveguide {

inline unsigned hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

namespace detail {
inline bool& in_parallel_worker() {
    thread_local bool flag = false;
    return flag;
}
} // namespace detail

// Runs fn(i) for i in [0, count). Work items must write only to their own
// slots; results are then deterministic regardless of scheduling. Nested
// calls degrade to serial execution.
template <class F>
void parallel_for(int count, F&& fn, unsigned max_threads = 0) {
    if (count <= 0) return;
    unsigned want = max_threads == 0 ? hardware_threads() : max_threads;
    want = std::min<unsigned>(want, static_cast<unsigned>(count));
    if (want <= 1 || detail::in_parallel_worker()) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> workers;
    workers.reserve(want);
    auto body = [&]() {
        detail::in_parallel_worker() = true;
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count || failed.load(std::memory_order_relaxed)) break;
            try {
                fn(i);
            } catch (...) {
                bool expected = false;
                if (failed.compare_exchange_strong(expected, true))
                    error = std::current_exception();
                break;
            }
        }
        detail::in_parallel_worker() = false;
    };
    for (unsigned t = 0; t + 1 < want; ++t) workers.emplace_back(body);
    body();
    for (auto& w : workers) w.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace waveguide

#endif
