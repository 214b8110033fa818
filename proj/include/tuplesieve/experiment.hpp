#ifndef TUPLESIEVE_EXPERIMENT_HPP
#define TUPLESIEVE_EXPERIMENT_HPP

// Experiment configuration, the command registry and report serialization
// behind the command-line tool. Every command takes a flat parameter object;
// numeric parameters marked sweepable also accept comma-separated lists.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "almost_primes.hpp"
#include "budget.hpp"
#include "correlations.hpp"
#include "detector.hpp"
#include "distribution.hpp"
#include "divisor_sums.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "tuples.hpp"

namespace tuplesieve {

inline constexpr const char* kVersion = "0.1.0";

enum class ExitCode : int { ok = 0, internal = 1, usage = 2, resource = 3, verification = 4 };

enum class ParamType { integer, real, tuple, pairs, reals, boolean, text };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::integer;
    nlohmann::json fallback; // null: required (unless optional)
    std::string help;
    bool sweep = false;
    bool optional = false; // may stay null
};

// One run's output: the JSON report and CSV rows under a fixed header.
struct Artifact {
    nlohmann::json report;
    std::vector<std::string> csv_rows;
};

struct CommandSpec {
    std::string group;
    std::string name;
    std::string formula;
    std::string summary;
    std::string csv_header;
    std::vector<ParamSpec> params;
    std::function<Artifact(const nlohmann::json&, u64 witness_cap)> run;

    std::string full_name() const { return group + " " + name; }
};

struct ExperimentConfig {
    std::string command; // "group name"
    nlohmann::json params = nlohmann::json::object();
    std::string format = "json";
    unsigned threads = 0; // 0: available parallelism
    std::optional<u64> mem_cap_bytes;
    double time_cap_seconds = 0.0;
    u64 witness_cap = kDefaultWitnessCap;

    bool operator==(const ExperimentConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c)
{
    j = {{"command", c.command},
         {"params", c.params},
         {"format", c.format},
         {"threads", c.threads},
         {"mem_cap_bytes", c.mem_cap_bytes ? nlohmann::json(*c.mem_cap_bytes) : nlohmann::json()},
         {"time_cap_seconds", c.time_cap_seconds},
         {"witness_cap", c.witness_cap}};
}

// Strict: unknown keys and wrong types are usage errors naming the field.
inline void from_json(const nlohmann::json& j, ExperimentConfig& c)
{
    static const std::vector<std::string> known = {"command",          "params",     "format",       "threads",
                                                   "mem_cap_bytes",    "time_cap_seconds", "witness_cap"};
    if (!j.is_object()) {
        throw InputError("config: expected a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw InputError("config: unknown key '" + key + "'");
        }
    }
    auto field = [&](const char* key, auto& out, auto check) {
        if (!j.contains(key) || j.at(key).is_null()) {
            return;
        }
        if (!check(j.at(key))) {
            throw InputError(std::string("config: field '") + key + "' has the wrong type");
        }
        out = j.at(key).get<std::remove_reference_t<decltype(out)>>();
    };
    ExperimentConfig out;
    field("command", out.command, [](const auto& v) { return v.is_string(); });
    if (j.contains("params")) {
        if (!j.at("params").is_object()) {
            throw InputError("config: field 'params' must be an object");
        }
        out.params = j.at("params");
    }
    field("format", out.format, [](const auto& v) { return v.is_string(); });
    field("threads", out.threads, [](const auto& v) { return v.is_number_unsigned(); });
    if (j.contains("mem_cap_bytes") && !j.at("mem_cap_bytes").is_null()) {
        if (!j.at("mem_cap_bytes").is_number_unsigned()) {
            throw InputError("config: field 'mem_cap_bytes' has the wrong type");
        }
        out.mem_cap_bytes = j.at("mem_cap_bytes").get<u64>();
    }
    field("time_cap_seconds", out.time_cap_seconds, [](const auto& v) { return v.is_number(); });
    field("witness_cap", out.witness_cap, [](const auto& v) { return v.is_number_unsigned(); });
    c = std::move(out);
}

// ---------------------------------------------------------------------------
// Parameter parsing

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline i64 parse_integer(const std::string& field, const std::string& text)
{
    const std::string t = trim(text);
    // Accept scientific notation such as 1e6 when it denotes an integer.
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw InputError("parameter '" + field + "': not a number: '" + text + "'");
    }
    if (pos != t.size() || !std::isfinite(v) || v != std::floor(v) || std::fabs(v) > 9.0e18) {
        throw InputError("parameter '" + field + "': not an integer: '" + text + "'");
    }
    return static_cast<i64>(v);
}

inline double parse_real(const std::string& field, const std::string& text)
{
    const std::string t = trim(text);
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw InputError("parameter '" + field + "': not a number: '" + text + "'");
    }
    if (pos != t.size() || !std::isfinite(v)) {
        throw InputError("parameter '" + field + "': not a finite number: '" + text + "'");
    }
    // Rational shorthand like 1/14 is handled by the caller.
    return v;
}

inline double parse_real_or_ratio(const std::string& field, const std::string& text)
{
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        return parse_real(field, text);
    }
    const double num = parse_real(field, text.substr(0, slash));
    const double den = parse_real(field, text.substr(slash + 1));
    if (den == 0) {
        throw InputError("parameter '" + field + "': zero denominator");
    }
    return num / den;
}

// "a,b:c,d" -> [[a,b],[c,d]]
inline nlohmann::json parse_pairs(const std::string& field, const std::string& text)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& item : split(text, ':')) {
        const auto ab = split(item, ',');
        if (ab.size() != 2) {
            throw InputError("parameter '" + field + "': expected a,b pairs separated by ':'");
        }
        out.push_back({parse_integer(field, ab[0]), parse_integer(field, ab[1])});
    }
    return out;
}

inline nlohmann::json parse_scalar(const ParamSpec& p, const std::string& text)
{
    switch (p.type) {
    case ParamType::integer: return parse_integer(p.name, text);
    case ParamType::real: return parse_real_or_ratio(p.name, text);
    case ParamType::tuple:
        try {
            return Tuple::parse(text);
        } catch (const InputError& e) {
            throw InputError("parameter '" + p.name + "': " + e.what());
        }
    case ParamType::pairs: return parse_pairs(p.name, text);
    case ParamType::reals: {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& s : split(text, ',')) {
            out.push_back(parse_real_or_ratio(p.name, s));
        }
        return out;
    }
    case ParamType::boolean: {
        const std::string t = trim(text);
        if (t == "true" || t == "1" || t == "yes") {
            return true;
        }
        if (t == "false" || t == "0" || t == "no") {
            return false;
        }
        throw InputError("parameter '" + p.name + "': expected true/false");
    }
    case ParamType::text: return text;
    }
    return nullptr;
}

// Parses a command-line string. Sweepable numbers become arrays when a
// comma list is given.
inline nlohmann::json parse_param(const ParamSpec& p, const std::string& text)
{
    if (p.sweep && text.find(',') != std::string::npos) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& s : split(text, ',')) {
            out.push_back(parse_scalar(p, s));
        }
        return out;
    }
    return parse_scalar(p, text);
}

inline bool matches_type(const ParamSpec& p, const nlohmann::json& v)
{
    switch (p.type) {
    case ParamType::integer: return v.is_number_integer();
    case ParamType::real: return v.is_number();
    case ParamType::tuple: return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const auto& x) {
                                      return x.is_number_integer();
                                  });
    case ParamType::pairs:
        return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const auto& x) {
                   return x.is_array() && x.size() == 2 && x[0].is_number_integer() && x[1].is_number_integer();
               });
    case ParamType::reals: return v.is_array() && std::all_of(v.begin(), v.end(), [](const auto& x) {
                                      return x.is_number();
                                  });
    case ParamType::boolean: return v.is_boolean();
    case ParamType::text: return v.is_string();
    }
    return false;
}

// Normalizes a JSON parameter value coming from a config file: strings are
// parsed as on the command line, everything else is type-checked.
inline nlohmann::json normalize_param(const ParamSpec& p, const nlohmann::json& v)
{
    if (v.is_string() && p.type != ParamType::text) {
        return parse_param(p, v.get<std::string>());
    }
    if (p.sweep && v.is_array()) {
        if (v.empty() || !std::all_of(v.begin(), v.end(), [&](const auto& x) { return matches_type(p, x); })) {
            throw InputError("parameter '" + p.name + "': sweep list has the wrong type");
        }
        return v;
    }
    if (!matches_type(p, v)) {
        throw InputError("parameter '" + p.name + "': wrong type");
    }
    if (p.type == ParamType::tuple) {
        return Tuple(v.get<std::vector<i64>>()); // validates distinctness
    }
    return v;
}

inline std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v)
{
    return v ? fmt(*v) : std::string();
}

inline std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

inline i64 get_int(const nlohmann::json& p, const char* key)
{
    return p.at(key).get<i64>();
}

inline double get_real(const nlohmann::json& p, const char* key)
{
    return p.at(key).get<double>();
}

inline Tuple get_tuple(const nlohmann::json& p, const char* key)
{
    return Tuple(p.at(key).get<std::vector<i64>>());
}

// R from an explicit "R" parameter, otherwise base^theta.
inline double resolve_R(const nlohmann::json& p, double base)
{
    if (p.contains("R") && !p.at("R").is_null()) {
        return get_real(p, "R");
    }
    const double theta = get_real(p, "theta");
    if (!(theta > 0 && theta < 1)) {
        throw InputError("parameter 'theta': must be in (0, 1)");
    }
    return std::pow(base, theta);
}

inline int get_small(const nlohmann::json& p, const char* key)
{
    const i64 v = get_int(p, key);
    if (v < -1000000 || v > 1000000) {
        throw InputError(std::string("parameter '") + key + "': out of range");
    }
    return static_cast<int>(v);
}

inline u64 get_positive(const nlohmann::json& p, const char* key)
{
    const i64 v = get_int(p, key);
    if (v < 1) {
        throw InputError(std::string("parameter '") + key + "': must be >= 1");
    }
    return static_cast<u64>(v);
}

inline Artifact correlation_artifact(const CorrelationReport& r)
{
    Artifact a{r, {}};
    for (const auto& m : r.measurements) {
        a.csv_rows.push_back(std::to_string(r.N) + "," + fmt(r.R) + "," + m.name + "," + fmt(m.empirical) + "," +
                             fmt(m.predicted_main) + "," + fmt(m.ratio));
    }
    return a;
}

inline Artifact detector_artifact(const DetectorReport& r)
{
    Artifact a{r, {}};
    for (const auto& w : r.witnesses) {
        a.csv_rows.push_back(std::to_string(w.n) + "," + csv_quote(w.event) + "," + (w.verified ? "true" : "false"));
    }
    return a;
}

inline nlohmann::json weight_table_json(const WeightTable& t)
{
    nlohmann::json j = {{"schema_version", kSchemaVersion},
                        {"report", "weights"},
                        {"kind", kind_name(t.kind)},
                        {"start", t.start},
                        {"end", t.end},
                        {"R", t.R},
                        {"values", t.values},
                        {"warnings", t.warnings}};
    if (t.tuple) {
        j["tuple"] = *t.tuple;
        j["ell"] = t.ell;
    }
    if (t.restriction) {
        j["restriction"] = *t.restriction;
    }
    if (t.kind == WeightKind::moment) {
        j["moment_k"] = t.moment_k;
        j["window"] = t.window;
    }
    return j;
}

inline Artifact weight_artifact(const WeightTable& t, const nlohmann::json& p)
{
    if (p.contains("binary") && !p.at("binary").is_null()) {
        const auto path = p.at("binary").get<std::string>();
        std::ofstream os(path, std::ios::binary);
        if (!os) {
            throw InputError("parameter 'binary': cannot open '" + path + "'");
        }
        write_binary(os, t);
    }
    Artifact a{weight_table_json(t), {}};
    a.csv_rows.reserve(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        a.csv_rows.push_back(std::to_string(t.start + 1 + static_cast<i64>(i)) + "," + fmt(t.values[i]));
    }
    return a;
}

inline std::pair<i64, i64> interval_of(const nlohmann::json& p)
{
    return {get_int(p, "start"), get_int(p, "end")};
}

inline ParamSpec P(std::string name, ParamType t, nlohmann::json fallback, std::string help, bool sweep = false,
                   bool optional = false)
{
    return ParamSpec{std::move(name), t, std::move(fallback), std::move(help), sweep, optional};
}

inline std::vector<ParamSpec> interval_params()
{
    return {P("start", ParamType::integer, 0, "interval start (exclusive)"),
            P("end", ParamType::integer, nullptr, "interval end (inclusive)"),
            P("R", ParamType::real, nullptr, "truncation level; overrides theta", false, true),
            P("theta", ParamType::real, 0.25, "R = end^theta when R is not given"),
            P("binary", ParamType::text, nullptr, "also write the compact binary dump to this path", false, true)};
}

inline std::vector<ParamSpec> with(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Command registry

inline const std::vector<CommandSpec>& commands()
{
    using detail::P;
    using T = ParamType;
    static const std::vector<CommandSpec> registry = [] {
        std::vector<CommandSpec> c;
        const std::string corr_csv = "N,R,name,empirical,predicted_main,ratio";
        const std::string wit_csv = "n,event,verified";
        const std::string w_csv = "n,value";

        // tuples
        c.push_back({"tuples", "narrowest", "min diameter h_k - h_1 over admissible H with |H| = k",
                     "Narrowest admissible k-tuple by exhaustive search (k <= 10).", "k,diameter,offsets",
                     {P("k", T::integer, nullptr, "tuple size, 1..10"),
                      P("cap", T::integer, 1000, "largest diameter searched")},
                     [](const nlohmann::json& p, u64) {
                         const auto t = narrowest_admissible(detail::get_small(p, "k"), detail::get_int(p, "cap"));
                         nlohmann::json j = {{"schema_version", kSchemaVersion}, {"report", "narrowest"},
                                             {"k", p.at("k")}, {"found", t.has_value()}};
                         Artifact a;
                         if (t) {
                             j["tuple"] = *t;
                             j["diameter"] = t->diameter();
                             a.csv_rows.push_back(std::to_string(t->k()) + "," + std::to_string(t->diameter()) +
                                                  "," + detail::csv_quote(t->to_string()));
                         } else {
                             j["tuple"] = nullptr;
                         }
                         a.report = j;
                         return a;
                     }});
        c.push_back({"tuples", "admissible", "ν_p(H) < p for every prime p <= k",
                     "Admissibility test with the residue count ν_p(H) for each prime p <= k.", "p,nu_p",
                     {P("tuple", T::tuple, nullptr, "comma-separated offsets")},
                     [](const nlohmann::json& p, u64) {
                         const auto H = detail::get_tuple(p, "tuple");
                         nlohmann::json nu = nlohmann::json::array();
                         Artifact a;
                         for (u32 q : small_primes(static_cast<u64>(std::max(H.k(), 2)))) {
                             const int v = residue_count(H, q);
                             nu.push_back({q, v});
                             a.csv_rows.push_back(std::to_string(q) + "," + std::to_string(v));
                         }
                         a.report = {{"schema_version", kSchemaVersion}, {"report", "admissible"}, {"tuple", H},
                                     {"admissible", is_admissible(H)}, {"nu_p", nu}};
                         return a;
                     }});
        c.push_back({"tuples", "series", "𝔖(H) = Π_p (1 - ν_p(H)/p)(1 - 1/p)^{-k}",
                     "Singular series with a certified truncation bound.",
                     "tuple,value,truncation_bound,cutoff_prime",
                     {P("tuple", T::tuple, nullptr, "comma-separated offsets"),
                      P("tol", T::real, 1e-8, "bound on the neglected tail")},
                     [](const nlohmann::json& p, u64) {
                         const auto H = detail::get_tuple(p, "tuple");
                         const auto v = singular_series(H, detail::get_real(p, "tol"));
                         Artifact a;
                         a.report = {{"schema_version", kSchemaVersion}, {"report", "singular_series"},
                                     {"tuple", H}, {"admissible", is_admissible(H)}, {"value", v.value},
                                     {"truncation_bound", v.truncation_bound}, {"cutoff_prime", v.cutoff_prime}};
                         a.csv_rows.push_back(detail::csv_quote(H.to_string()) + "," + detail::fmt(v.value) + "," +
                                              detail::fmt(v.truncation_bound) + "," + std::to_string(v.cutoff_prime));
                         return a;
                     }});
        c.push_back({"tuples", "gallagher", "Σ_{H ⊂ [1,h], |H|=k} 𝔖(H) ~ h^k (ordered) and h^k/k! (sets)",
                     "Gallagher's average of the singular series over k-tuples in [1, h].",
                     "k,h,ordered_sum,set_sum,ordered_ratio,set_ratio",
                     {P("k", T::integer, nullptr, "tuple size"), P("h", T::integer, nullptr, "range [1, h]"),
                      P("tol", T::real, 1e-7, "per-tuple singular-series tolerance")},
                     [](const nlohmann::json& p, u64) {
                         const auto g = gallagher_average(detail::get_small(p, "k"), detail::get_int(p, "h"),
                                                          detail::get_real(p, "tol"));
                         Artifact a;
                         a.report = {{"schema_version", kSchemaVersion}, {"report", "gallagher"},
                                     {"k", p.at("k")}, {"h", p.at("h")}, {"ordered_sum", g.ordered_sum},
                                     {"set_sum", g.set_sum}, {"ordered_ratio", g.ordered_ratio},
                                     {"set_ratio", g.set_ratio}, {"tuples", g.tuples}};
                         a.csv_rows.push_back(p.at("k").dump() + "," + p.at("h").dump() + "," +
                                              detail::fmt(g.ordered_sum) + "," + detail::fmt(g.set_sum) + "," +
                                              detail::fmt(g.ordered_ratio) + "," + detail::fmt(g.set_ratio));
                         return a;
                     }});

        // sums
        c.push_back({"sums", "lambda", "Λ_R(n) = Σ_{d|n, d<=R} μ(d) log(R/d)",
                     "Truncated von Mangoldt weights over (start, end].", w_csv, detail::interval_params(),
                     [](const nlohmann::json& p, u64) {
                         const auto [s, e] = detail::interval_of(p);
                         return detail::weight_artifact(
                             lambda_R_interval(s, e, detail::resolve_R(p, static_cast<double>(e))), p);
                     }});
        c.push_back({"sums", "lower", "λ_R(n) = Σ_{r<=R} μ²(r)/φ(r) Σ_{d|(r,n)} d μ(d)",
                     "The lower-order smoothed weights over (start, end].", w_csv, detail::interval_params(),
                     [](const nlohmann::json& p, u64) {
                         const auto [s, e] = detail::interval_of(p);
                         return detail::weight_artifact(
                             lambda_lower_R_interval(s, e, detail::resolve_R(p, static_cast<double>(e))), p);
                     }});
        c.push_back({"sums", "gpy",
                     "Λ_R(n;H,ℓ) = 1/(k+ℓ)! Σ_{d|P_H(n), d<=R} μ(d) (log(R/d))^{k+ℓ}",
                     "Tuple weights, optionally restricted to P_H(n) coprime to primes <= w.", w_csv,
                     detail::with(detail::interval_params(),
                                  {P("tuple", T::tuple, nullptr, "comma-separated offsets"),
                                   P("ell", T::integer, 1, "extra log power ℓ, 0..k"),
                                   P("w", T::integer, nullptr, "coprimality cutoff", false, true)}),
                     [](const nlohmann::json& p, u64) {
                         const auto [s, e] = detail::interval_of(p);
                         std::optional<i64> w;
                         if (!p.at("w").is_null()) {
                             w = detail::get_int(p, "w");
                         }
                         return detail::weight_artifact(
                             gpy_weight_interval(detail::get_tuple(p, "tuple"), detail::get_small(p, "ell"), s, e,
                                                 detail::resolve_R(p, static_cast<double>(e)), w),
                             p);
                     }});
        c.push_back({"sums", "selberg", "Σ_{d|P_H(n), d<=R} μ(d) (log(R/d)/log R)^{k+1}",
                     "Selberg-type weights summed over divisors of the tuple polynomial.", w_csv,
                     detail::with(detail::interval_params(), {P("tuple", T::tuple, nullptr, "comma-separated offsets")}),
                     [](const nlohmann::json& p, u64) {
                         const auto [s, e] = detail::interval_of(p);
                         return detail::weight_artifact(
                             selberg_weight_interval(detail::get_tuple(p, "tuple"), s, e,
                                                     detail::resolve_R(p, static_cast<double>(e))),
                             p);
                     }});
        c.push_back({"sums", "moment", "ψ_R^{(k)}(n,h) = Σ_{H in [1,h]^k} (log R)^{k-|H|} Π_{h∈H} Λ_R(n+h)",
                     "k-th moment weights of the truncated window sum (k <= 3).", w_csv,
                     detail::with(detail::interval_params(),
                                  {P("k", T::integer, 2, "moment order, 1..3"),
                                   P("h", T::integer, nullptr, "window length")}),
                     [](const nlohmann::json& p, u64) {
                         const auto [s, e] = detail::interval_of(p);
                         return detail::weight_artifact(
                             moment_weight_interval(detail::get_small(p, "k"), detail::get_int(p, "h"), s, e,
                                                    detail::resolve_R(p, static_cast<double>(e))),
                             p);
                     }});

        // corr
        const auto NP = [](i64 def = -1) {
            return def < 0 ? P("N", T::integer, nullptr, "sum range n <= N (comma list sweeps)", true)
                           : P("N", T::integer, def, "sum range n <= N (comma list sweeps)", true);
        };
        const auto thetaP = P("theta", T::real, 0.25, "R = N^theta (comma list sweeps)", true);
        const auto RP = P("R", T::real, nullptr, "truncation level; overrides theta", false, true);
        c.push_back({"corr", "pair", "Σ_{n<=N} Λ_R(n)Λ_R(n+j) and Σ Λ(n)Λ_R(n+j) against 𝔖({0,j}) N",
                     "Shifted pair correlations of the truncated weights.", corr_csv,
                     {NP(), thetaP, RP, P("shift", T::integer, 2, "shift j != 0", true)},
                     [](const nlohmann::json& p, u64) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::correlation_artifact(
                             corr_pair(N, detail::resolve_R(p, static_cast<double>(N)), detail::get_int(p, "shift")));
                     }});
        c.push_back({"corr", "self", "Σ_{n<=N} Λ_R(n)² and Σ Λ(n)Λ_R(n) against N log R",
                     "Diagonal correlations of the truncated weights.", corr_csv, {NP(), thetaP, RP},
                     [](const nlohmann::json& p, u64) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::correlation_artifact(
                             corr_self(N, detail::resolve_R(p, static_cast<double>(N))));
                     }});
        const std::vector<ParamSpec> gpy_pair_params = {
            P("tuple1", T::tuple, nullptr, "first tuple H1"), P("ell1", T::integer, 1, "ℓ1"),
            P("tuple2", T::tuple, nullptr, "second tuple H2"), P("ell2", T::integer, 1, "ℓ2")};
        c.push_back({"corr", "gpy-pair", "Σ_{n<=N} Λ_R(n;H1,ℓ1) Λ_R(n;H2,ℓ2)",
                     "Correlation of two tuple weights (R <= N^(1/2)).", corr_csv,
                     detail::with(gpy_pair_params, {NP(), thetaP, RP}),
                     [](const nlohmann::json& p, u64) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::correlation_artifact(corr_gpy_pair(
                             detail::get_tuple(p, "tuple1"), detail::get_small(p, "ell1"),
                             detail::get_tuple(p, "tuple2"), detail::get_small(p, "ell2"), N,
                             detail::resolve_R(p, static_cast<double>(N))));
                     }});
        c.push_back({"corr", "gpy-theta", "Σ_{n<=N} Λ_R(n;H1,ℓ1) Λ_R(n;H2,ℓ2) θ(n+h0)",
                     "Tuple-weight correlation against a prime at n+h0; the report names the h0 case.", corr_csv,
                     detail::with(gpy_pair_params, {P("h0", T::integer, 0, "prime offset h0"), NP(), thetaP, RP}),
                     [](const nlohmann::json& p, u64) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::correlation_artifact(corr_gpy_theta(
                             detail::get_tuple(p, "tuple1"), detail::get_small(p, "ell1"),
                             detail::get_tuple(p, "tuple2"), detail::get_small(p, "ell2"), detail::get_int(p, "h0"),
                             N, detail::resolve_R(p, static_cast<double>(N))));
                     }});
        c.push_back({"corr", "hl", "Σ_{n<=N} Π Λ(n+h_i) ~ 𝔖(H) N; #{n<=N: all n+h_i prime} ~ 𝔖(H) Σ (log n)^{-k}",
                     "Hardy-Littlewood prime-tuple counts against their predictions.", corr_csv,
                     {P("tuple", T::tuple, nullptr, "comma-separated offsets"), NP()},
                     [](const nlohmann::json& p, u64) {
                         return detail::correlation_artifact(
                             hardy_littlewood_count(detail::get_tuple(p, "tuple"), detail::get_int(p, "N")));
                     }});
        c.push_back({"corr", "moment", "Σ_{N<n<=2N} (ψ(n+h) - ψ(n))² against (λ̂ + λ̂²) N (log N)²",
                     "Second moment of primes in short windows, h = round(λ log N).", corr_csv,
                     {NP(), P("lambda", T::real, 1.0, "window scale λ", true)},
                     [](const nlohmann::json& p, u64) {
                         return detail::correlation_artifact(
                             second_moment(detail::get_int(p, "N"), detail::get_real(p, "lambda")));
                     }});

        // detect
        c.push_back({"detect", "first-moment",
                     "Σ_{N<n<=2N} (ψ(n,h) - ψ_R(n,h))² >= 0 against the single-prime ceiling λ̂ N (log N)²",
                     "First-moment positivity argument with all components.", wit_csv,
                     {NP(), P("lambda", T::real, 1.0, "window scale λ", true), thetaP, RP},
                     [](const nlohmann::json& p, u64) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::detector_artifact(first_moment_gap(
                             N, detail::get_real(p, "lambda"), detail::resolve_R(p, static_cast<double>(N))));
                     }});
        c.push_back({"detect", "mollified", "Σ_{N<n<=2N} (ψ(n,h) - ρ log N)(ψ_R(n,h) - C)²",
                     "Mollified moment; witnesses are windows with ψ(n,h) >= 2 log N.", wit_csv,
                     {NP(), P("lambda", T::real, 1.0, "window scale λ", true), thetaP, RP,
                      P("rho", T::real, 1.0, "ρ"), P("C", T::real, 0.0, "shift C")},
                     [](const nlohmann::json& p, u64 cap) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::detector_artifact(mollified_moment(
                             N, detail::get_real(p, "lambda"), detail::resolve_R(p, static_cast<double>(N)),
                             detail::get_real(p, "rho"), detail::get_real(p, "C"), cap));
                     }});
        c.push_back({"detect", "gpy",
                     "Σ_{N<n<=2N} (Σ_{h0<=h} θ(n+h0) - r log 3N)(Σ_{|H|=k, H ⊂ [1,h]} Λ_R(n;H,ℓ))²",
                     "Tuple-sum positivity form; witnesses are windows with at least r+1 primes.", wit_csv,
                     {NP(), P("h", T::integer, nullptr, "window length"), P("k", T::integer, nullptr, "tuple size"),
                      P("ell", T::integer, 1, "ℓ"), P("r", T::integer, 1, "target r (r+1 primes)"), thetaP, RP},
                     [](const nlohmann::json& p, u64 cap) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::detector_artifact(gpy_form(
                             N, detail::get_int(p, "h"), detail::get_small(p, "k"), detail::get_small(p, "ell"),
                             detail::get_small(p, "r"), detail::resolve_R(p, static_cast<double>(N)), cap));
                     }});
        c.push_back({"detect", "gs", "Σ_{N<n<=2N} (Σ_i Λ(n+h_i) - r log 3N)(Λ_R(n;H,ℓ))²",
                     "Single-tuple positivity form; witnesses have at least r+1 primes among n+h_i.", wit_csv,
                     {P("tuple", T::tuple, nullptr, "comma-separated offsets"), P("ell", T::integer, 1, "ℓ"),
                      P("r", T::integer, 1, "target r"), NP(), thetaP, RP},
                     [](const nlohmann::json& p, u64 cap) {
                         const i64 N = detail::get_int(p, "N");
                         return detail::detector_artifact(gs_single_tuple(
                             detail::get_tuple(p, "tuple"), detail::get_small(p, "ell"), detail::get_small(p, "r"), N,
                             detail::resolve_R(p, static_cast<double>(N)), cap));
                     }});
        c.push_back({"detect", "heathbrown",
                     "Q = Σ_{n<=x} (1 - ρ Σ_i τ(a_i n + b_i)) (Σ_{d|Π, d<=R} μ(d)(log(R/d)/log R)^{k+1})²",
                     "Divisor-weighted quadratic form; witnesses have Σ τ(a_i n + b_i) < 1/ρ.", wit_csv,
                     {P("pairs", T::pairs, nullptr, "forms a,b:a,b:..."), P("rho", T::real, nullptr, "ρ (e.g. 1/14)"),
                      P("x", T::integer, nullptr, "sum range n <= x", true), thetaP, RP},
                     [](const nlohmann::json& p, u64 cap) {
                         std::vector<LinearForm> forms;
                         for (const auto& ab : p.at("pairs")) {
                             forms.push_back({ab[0].get<i64>(), ab[1].get<i64>()});
                         }
                         const i64 x = detail::get_int(p, "x");
                         return detail::detector_artifact(heathbrown_Q(
                             forms, detail::get_real(p, "rho"), x, detail::resolve_R(p, static_cast<double>(x)), cap));
                     }});
        c.push_back({"detect", "gaps", "(p_{n+r} - p_n) / log p_n",
                     "Normalized r-step prime gaps up to a limit.", "p,q,normalized",
                     {P("limit", T::integer, nullptr, "largest prime considered", true),
                      P("r", T::integer, 1, "step r"), P("threshold", T::real, 0.25, "report proportion below this"),
                      P("include_gaps", T::boolean, false, "list every gap in the JSON report")},
                     [](const nlohmann::json& p, u64) {
                         const auto g = gap_scan(detail::get_positive(p, "limit"), detail::get_small(p, "r"),
                                                 detail::get_real(p, "threshold"));
                         Artifact a;
                         to_json(a.report, g, p.at("include_gaps").get<bool>());
                         a.csv_rows.reserve(g.gaps.size());
                         for (const auto& e : g.gaps) {
                             a.csv_rows.push_back(std::to_string(e.p) + "," + std::to_string(e.q) + "," +
                                                  detail::fmt(e.normalized));
                         }
                         return a;
                     }});

        // dist
        c.push_back({"dist", "probe", "Σ_{q<=Q} max_{(a,q)=1} |Θ(N;q,a) - N/φ(q)| with Q = floor(N^α)",
                     "Empirical level-of-distribution probe over a list of α.", "alpha,Q,total,normalized",
                     {P("N", T::integer, nullptr, "range N"), P("alphas", T::reals, nullptr, "comma list of α in (0,1)"),
                      P("A", T::real, 1.0, "normalization exponent: total (log N)^A / N")},
                     [](const nlohmann::json& p, u64) {
                         const auto alphas = p.at("alphas").get<std::vector<double>>();
                         const auto reps = level_probe(detail::get_positive(p, "N"), alphas, detail::get_real(p, "A"));
                         Artifact a;
                         nlohmann::json runs = nlohmann::json::array();
                         for (std::size_t i = 0; i < reps.size(); ++i) {
                             nlohmann::json r = reps[i];
                             r["alpha"] = alphas[i];
                             runs.push_back(r);
                             a.csv_rows.push_back(detail::fmt(alphas[i]) + "," + std::to_string(reps[i].Q) + "," +
                                                  detail::fmt(reps[i].total) + "," + detail::fmt(reps[i].normalized));
                         }
                         a.report = {{"schema_version", kSchemaVersion}, {"report", "level_probe"}, {"runs", runs}};
                         return a;
                     }});
        c.push_back({"dist", "theta", "Θ(N;q,a) = Σ_{p<=N, p≡a (q)} log p",
                     "Prime sum in one arithmetic progression.", "N,q,a,theta",
                     {P("N", T::integer, nullptr, "range N", true), P("q", T::integer, nullptr, "modulus q"),
                      P("a", T::integer, nullptr, "residue a")},
                     [](const nlohmann::json& p, u64) {
                         const u64 N = detail::get_positive(p, "N");
                         const u64 q = detail::get_positive(p, "q");
                         const i64 a_raw = detail::get_int(p, "a");
                         const u64 a = static_cast<u64>(mod_floor(a_raw, static_cast<i64>(q)));
                         const double v = theta_progression(N, q, a);
                         Artifact a_out;
                         a_out.report = {{"schema_version", kSchemaVersion}, {"report", "theta_progression"},
                                         {"N", N}, {"q", q}, {"a", a}, {"theta", v}};
                         a_out.csv_rows.push_back(std::to_string(N) + "," + std::to_string(q) + "," +
                                                  std::to_string(a) + "," + detail::fmt(v));
                         return a_out;
                     }});

        // e2
        c.push_back({"e2", "gaps", "q_{n+r} - q_n for consecutive products of two distinct primes",
                     "Gap histogram of E2 numbers up to a limit.", "gap,count",
                     {P("limit", T::integer, nullptr, "upper limit", true), P("r", T::integer, 1, "step r")},
                     [](const nlohmann::json& p, u64) {
                         const auto s = e2_gap_stats(detail::get_positive(p, "limit"), detail::get_small(p, "r"));
                         Artifact a;
                         a.report = s;
                         for (const auto& [gap, count] : s.histogram) {
                             a.csv_rows.push_back(std::to_string(gap) + "," + std::to_string(count));
                         }
                         return a;
                     }});
        return c;
    }();
    return registry;
}

inline const CommandSpec& find_command(const std::string& full_name)
{
    for (const auto& c : commands()) {
        if (c.full_name() == full_name) {
            return c;
        }
    }
    throw InputError("unknown command '" + full_name + "'");
}

// Fills defaults, type-checks every value and rejects unknown parameters.
inline nlohmann::json resolve_params(const CommandSpec& cmd, const nlohmann::json& given)
{
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : given.items()) {
        (void)value;
        const bool known = std::any_of(cmd.params.begin(), cmd.params.end(), [&](const auto& p) { return p.name == key; });
        if (!known) {
            throw InputError("command '" + cmd.full_name() + "': unknown parameter '" + key + "'");
        }
    }
    for (const auto& p : cmd.params) {
        if (given.contains(p.name) && !given.at(p.name).is_null()) {
            out[p.name] = detail::normalize_param(p, given.at(p.name));
        } else if (!p.fallback.is_null()) {
            out[p.name] = p.fallback;
        } else if (p.optional) {
            out[p.name] = nullptr;
        } else {
            throw InputError("command '" + cmd.full_name() + "': missing required parameter '" + p.name + "'");
        }
    }
    return out;
}

// Expands sweep lists into the cartesian product, in parameter order.
inline std::vector<nlohmann::json> expand_sweeps(const CommandSpec& cmd, const nlohmann::json& params)
{
    std::vector<nlohmann::json> runs{params};
    for (const auto& p : cmd.params) {
        const auto& v = params.at(p.name);
        if (!p.sweep || !v.is_array() || p.type == ParamType::tuple || p.type == ParamType::pairs) {
            continue;
        }
        std::vector<nlohmann::json> next;
        for (const auto& r : runs) {
            for (const auto& x : v) {
                auto copy = r;
                copy[p.name] = x;
                next.push_back(std::move(copy));
            }
        }
        runs = std::move(next);
    }
    return runs;
}

inline std::string utc_timestamp()
{
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunOutput {
    nlohmann::json document; // {schema_version, manifest, result}
    std::string csv;
    nlohmann::json manifest;
};

// Runs the configured command. Budgets and threads are applied globally.
// Everything except manifest.timestamp is a deterministic function of the
// config.
inline RunOutput execute(const ExperimentConfig& config)
{
    if (config.format != "json" && config.format != "csv") {
        throw InputError("config: field 'format' must be json or csv");
    }
    const auto& cmd = find_command(config.command);
    const auto params = resolve_params(cmd, config.params);
    Threads::set(config.threads);
    if (config.mem_cap_bytes) {
        Budget::set_mem_cap(*config.mem_cap_bytes);
    }
    Budget::set_time_cap(config.time_cap_seconds);
    const auto t0 = std::chrono::steady_clock::now();

    const auto runs = expand_sweeps(cmd, params);
    RunOutput out;
    nlohmann::json results = nlohmann::json::array();
    std::string csv = cmd.csv_header + "\n";
    for (const auto& r : runs) {
        Artifact a = cmd.run(r, config.witness_cap);
        if (a.report.is_object()) {
            a.report["parameters_resolved"] = r;
        }
        results.push_back(std::move(a.report));
        for (const auto& row : a.csv_rows) {
            csv += row;
            csv += '\n';
        }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Budget::set_time_cap(0);

    ExperimentConfig echoed = config;
    echoed.params = params;
    out.manifest = {{"schema_version", kSchemaVersion},
                    {"tool", "tuplesieve"},
                    {"version", kVersion},
                    {"command", cmd.full_name()},
                    {"formula", cmd.formula},
                    {"config", echoed},
                    {"runs", runs.size()},
                    // The only nondeterministic field.
                    {"timestamp", {{"utc", utc_timestamp()}, {"wall_seconds", wall}}}};
    out.document = {{"schema_version", kSchemaVersion},
                    {"manifest", out.manifest},
                    {"result", runs.size() == 1 ? results[0] : nlohmann::json{{"runs", results}}}};
    out.csv = std::move(csv);
    return out;
}

} // namespace tuplesieve

#endif // TUPLESIEVE_EXPERIMENT_HPP
