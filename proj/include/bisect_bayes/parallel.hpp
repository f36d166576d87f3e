#ifndef BISECT_BAYES_PARALLEL_HPP
#define BISECT_BAYES_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bisect_bayes {

inline constexpr const char* kThreadsEnvVar = "BISECT_BAYES_THREADS";

/// Worker count: explicit request, else the BISECT_BAYES_THREADS environment
/// variable, else 1.
inline unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt) {
    if (requested) {
        if (*requested == 0) {
            throw std::invalid_argument("thread count must be positive");
        }
        return *requested;
    }
    if (const char* env = std::getenv(kThreadsEnvVar); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096) {
            throw std::invalid_argument(std::string(kThreadsEnvVar) + " must be a positive integer, got '" + env + "'");
        }
        return static_cast<unsigned>(v);
    }
    return 1;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items
/// are claimed dynamically, so body must write only to slot i of its output
/// for results to be independent of scheduling. The first exception thrown
/// by any body is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_PARALLEL_HPP
