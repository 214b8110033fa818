#ifndef TUPLESIEVE_PARALLEL_HPP
#define TUPLESIEVE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "budget.hpp"

namespace tuplesieve {

// Worker count used by every parallel loop in the library. Work is always
// split into chunks whose boundaries depend only on the problem size, and
// per-chunk results are merged in chunk order, so results never depend on
// this value.
class Threads {
public:
    static unsigned count()
    {
        unsigned v = value().load();
        if (v == 0) {
            v = std::max(1u, std::thread::hardware_concurrency());
        }
        return v;
    }
    static void set(unsigned n) { value().store(n); }

private:
    static std::atomic<unsigned>& value()
    {
        static std::atomic<unsigned> v{0};
        return v;
    }
};

// Runs fn(i) for i in [0, n_tasks) on up to Threads::count() workers.
// Exceptions from workers are rethrown (the first one wins).
template <typename Fn>
void parallel_for(std::size_t n_tasks, Fn&& fn)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(Threads::count(), n_tasks));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) {
            Budget::check_deadline();
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) {
                return;
            }
            try {
                Budget::check_deadline();
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n_tasks);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(body);
    }
    body();
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

// Half-open chunking of (start, end] into pieces of at most `len` integers.
struct Chunk {
    std::int64_t lo; // exclusive
    std::int64_t hi; // inclusive
};

inline std::vector<Chunk> make_chunks(std::int64_t start, std::int64_t end, std::int64_t len)
{
    std::vector<Chunk> out;
    for (std::int64_t lo = start; lo < end; lo += len) {
        out.push_back({lo, std::min(end, lo + len)});
    }
    return out;
}

inline constexpr std::int64_t kDefaultChunk = std::int64_t{1} << 16;

} // namespace tuplesieve

#endif // TUPLESIEVE_PARALLEL_HPP
