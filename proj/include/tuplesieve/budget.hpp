#ifndef TUPLESIEVE_BUDGET_HPP
#define TUPLESIEVE_BUDGET_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

#include "error.hpp"

namespace tuplesieve {

// Process-wide resource limits. The memory cap is read once from
// TUPLESIEVE_MEM_CAP (bytes, optional K/M/G suffix) unless overridden.
class Budget {
public:
    static constexpr std::uint64_t kDefaultMemCap = std::uint64_t{8} << 30;

    static std::optional<std::uint64_t> parse_bytes(std::string text)
    {
        if (text.empty()) {
            return std::nullopt;
        }
        std::uint64_t scale = 1;
        switch (text.back()) {
        case 'k': case 'K': scale = std::uint64_t{1} << 10; break;
        case 'm': case 'M': scale = std::uint64_t{1} << 20; break;
        case 'g': case 'G': scale = std::uint64_t{1} << 30; break;
        default: break;
        }
        if (scale != 1) {
            text.pop_back();
        }
        char* endp = nullptr;
        const unsigned long long v = std::strtoull(text.c_str(), &endp, 10);
        if (endp == text.c_str() || *endp != '\0') {
            return std::nullopt;
        }
        return static_cast<std::uint64_t>(v) * scale;
    }

    static std::uint64_t mem_cap()
    {
        std::uint64_t v = state().mem_cap.load();
        if (v == 0) {
            v = kDefaultMemCap;
            if (const char* env = std::getenv("TUPLESIEVE_MEM_CAP")) {
                if (auto parsed = parse_bytes(env)) {
                    v = *parsed;
                }
            }
            state().mem_cap.store(v);
        }
        return v;
    }

    static void set_mem_cap(std::uint64_t bytes) { state().mem_cap.store(bytes); }

    // Throws ResourceError when an allocation of `bytes` would break the cap.
    static void require_memory(long double bytes, const std::string& what)
    {
        if (bytes > static_cast<long double>(mem_cap())) {
            throw ResourceError(what + ": needs ~" + std::to_string(static_cast<unsigned long long>(bytes)) +
                                " bytes, cap is " + std::to_string(mem_cap()));
        }
    }

    // Wall-clock deadline; zero seconds clears it.
    static void set_time_cap(double seconds)
    {
        if (seconds <= 0) {
            state().deadline_ns.store(0);
            return;
        }
        const auto now = std::chrono::steady_clock::now().time_since_epoch();
        const auto cap = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(seconds));
        state().deadline_ns.store((now + cap).count());
    }

    static void check_deadline()
    {
        const std::int64_t d = state().deadline_ns.load(std::memory_order_relaxed);
        if (d != 0 && std::chrono::steady_clock::now().time_since_epoch().count() > d) {
            throw ResourceError("time cap exceeded");
        }
    }

private:
    struct State {
        std::atomic<std::uint64_t> mem_cap{0};
        std::atomic<std::int64_t> deadline_ns{0};
    };
    static State& state()
    {
        static State s;
        return s;
    }
};

} // namespace tuplesieve

#endif // TUPLESIEVE_BUDGET_HPP
