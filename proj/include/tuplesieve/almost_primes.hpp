#ifndef TUPLESIEVE_ALMOST_PRIMES_HPP
#define TUPLESIEVE_ALMOST_PRIMES_HPP

#include <algorithm>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "core_arith.hpp"
#include "correlations.hpp"
#include "error.hpp"

namespace tuplesieve {

// E2 numbers: products of two distinct primes.
struct E2Table {
    u64 limit = 0;
    std::vector<u64> values;
};

inline E2Table e2_sieve(u64 limit)
{
    if (limit < 6) {
        throw InputError("e2_sieve: limit must be >= 6");
    }
    const auto mob = sieve_mobius(limit);
    E2Table t;
    t.limit = limit;
    for (u64 n = 6; n <= limit; ++n) {
        const u64 p = mob.smallest_factor(n);
        const u64 m = n / p;
        if (m > p && mob.smallest_factor(m) == m) {
            t.values.push_back(n);
        }
    }
    return t;
}

struct E2GapStats {
    u64 limit = 0;
    int r = 1;
    std::map<u64, u64> histogram; // q_{n+r} - q_n -> count
    u64 min_gap = 0;
    u64 small_gap_count = 0; // indices with q_{n+1} - q_n <= 6
    u64 members = 0;
};

inline void to_json(nlohmann::json& j, const E2GapStats& s)
{
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [gap, count] : s.histogram) {
        hist.push_back({gap, count});
    }
    j = {{"schema_version", kSchemaVersion},
         {"report", "e2_gaps"},
         {"limit", s.limit},
         {"r", s.r},
         {"members", s.members},
         {"min_gap", s.min_gap},
         {"gaps_at_most_6", s.small_gap_count},
         {"histogram", hist}};
}

inline E2GapStats e2_gap_stats(const E2Table& t, int r)
{
    if (r < 1) {
        throw InputError("e2_gap_stats: r must be >= 1");
    }
    E2GapStats s;
    s.limit = t.limit;
    s.r = r;
    s.members = t.values.size();
    const auto ru = static_cast<std::size_t>(r);
    s.min_gap = 0;
    for (std::size_t i = 0; i + ru < t.values.size(); ++i) {
        const u64 g = t.values[i + ru] - t.values[i];
        ++s.histogram[g];
        s.min_gap = (s.min_gap == 0) ? g : std::min(s.min_gap, g);
    }
    for (std::size_t i = 0; i + 1 < t.values.size(); ++i) {
        s.small_gap_count += (t.values[i + 1] - t.values[i] <= 6) ? 1 : 0;
    }
    return s;
}

inline E2GapStats e2_gap_stats(u64 limit, int r)
{
    if (limit < 100) {
        throw InputError("e2_gap_stats: limit must be >= 100");
    }
    return e2_gap_stats(e2_sieve(limit), r);
}

} // namespace tuplesieve

#endif // TUPLESIEVE_ALMOST_PRIMES_HPP
