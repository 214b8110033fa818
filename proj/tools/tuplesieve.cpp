#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <new>
#include <string>

#include <CLI11.hpp>

#include "tuplesieve/experiment.hpp"

namespace ts = tuplesieve;

namespace {

std::string cli_flag(const std::string& name)
{
    std::string f = "--";
    for (char c : name) {
        f += c == '_' ? '-' : c;
    }
    return f;
}

std::string type_hint(ts::ParamType t)
{
    switch (t) {
    case ts::ParamType::integer: return "INT";
    case ts::ParamType::real: return "REAL";
    case ts::ParamType::tuple: return "OFFSETS";
    case ts::ParamType::pairs: return "A,B:A,B";
    case ts::ParamType::reals: return "REALS";
    case ts::ParamType::boolean: return "BOOL";
    case ts::ParamType::text: return "PATH";
    }
    return "";
}

ts::ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ts::InputError("--config: cannot open '" + path + "'");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ts::InputError("--config: " + std::string(e.what()));
    }
    // A manifest written by a previous run carries its config.
    if (j.is_object() && j.contains("manifest")) {
        j = j.at("manifest");
    }
    if (j.is_object() && j.contains("config") && j.contains("tool")) {
        j = j.at("config");
    }
    return j.get<ts::ExperimentConfig>();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ts::InputError("cannot open '" + path + "' for writing");
    }
    os << text;
}

int report(ts::ExitCode code, const std::string& kind, const std::string& msg)
{
    std::cerr << "tuplesieve: " << kind << ": " << msg << "\n";
    return static_cast<int>(code);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"tuplesieve: prime-tuple, divisor-sum and small-gap experiments"};
    app.require_subcommand(0, 1);

    unsigned threads = 0;
    std::string format;
    std::string out_path;
    std::string config_path;
    std::string manifest_path;
    std::string mem_cap;
    double time_cap = 0;
    long long witness_cap = -1;
    app.add_option("--threads", threads, "worker threads (0: available parallelism)");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", out_path, "write the report here instead of stdout");
    app.add_option("--config", config_path, "JSON config or manifest; flags override its values");
    app.add_option("--manifest", manifest_path, "write the run manifest here");
    app.add_option("--mem-cap", mem_cap, "memory cap, bytes with optional K/M/G (default: $TUPLESIEVE_MEM_CAP or 8G)");
    app.add_option("--time-cap", time_cap, "wall-clock cap in seconds (0: none)");
    app.add_option("--witnesses", witness_cap, "maximum witnesses listed per detector report");

    // params[command][name] = raw text
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, CLI::App*> leaves;
    std::map<std::string, CLI::App*> groups;
    for (const auto& cmd : ts::commands()) {
        auto*& g = groups[cmd.group];
        if (g == nullptr) {
            g = app.add_subcommand(cmd.group, cmd.group + " commands");
            g->require_subcommand(1);
            g->fallthrough();
        }
        std::string desc = cmd.summary + "\n  computes: " + cmd.formula + "\n  CSV columns: " + cmd.csv_header;
        auto* leaf = g->add_subcommand(cmd.name, desc);
        leaf->fallthrough();
        // Parameters such as --h and --k would collide with the short help flag.
        leaf->set_help_flag("--help", "print this help and exit");
        leaves[cmd.full_name()] = leaf;
        auto& slot = raw[cmd.full_name()];
        for (const auto& p : cmd.params) {
            std::string help = p.help;
            if (!p.fallback.is_null()) {
                help += " [default: " + (p.fallback.is_string() ? p.fallback.get<std::string>() : p.fallback.dump()) + "]";
            } else if (!p.optional) {
                help += " [required unless set by --config]";
            }
            leaf->add_option(cli_flag(p.name), slot[p.name], help)->type_name(type_hint(p.type));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ts::ExitCode::usage);
    }

    try {
        ts::ExperimentConfig config;
        if (!config_path.empty()) {
            config = load_config(config_path);
        }
        std::string chosen;
        for (const auto& [name, leaf] : leaves) {
            if (leaf->parsed()) {
                chosen = name;
            }
        }
        if (!chosen.empty()) {
            if (!config.command.empty() && config.command != chosen) {
                config.params = nlohmann::json::object(); // file params belong to another command
            }
            config.command = chosen;
            const auto& cmd = ts::find_command(chosen);
            for (const auto& p : cmd.params) {
                if (leaves[chosen]->count(cli_flag(p.name)) > 0) {
                    config.params[p.name] = ts::detail::parse_param(p, raw[chosen][p.name]);
                }
            }
        }
        if (config.command.empty()) {
            std::cout << app.help();
            return static_cast<int>(ts::ExitCode::usage);
        }
        if (app.count("--format") > 0) {
            config.format = format;
        }
        if (app.count("--threads") > 0) {
            config.threads = threads;
        }
        if (app.count("--mem-cap") > 0) {
            const auto b = ts::Budget::parse_bytes(mem_cap);
            if (!b || *b == 0) {
                throw ts::InputError("--mem-cap: expected bytes with optional K/M/G suffix");
            }
            config.mem_cap_bytes = *b;
        }
        if (app.count("--time-cap") > 0) {
            config.time_cap_seconds = time_cap;
        }
        if (app.count("--witnesses") > 0) {
            if (witness_cap < 0) {
                throw ts::InputError("--witnesses: must be >= 0");
            }
            config.witness_cap = static_cast<ts::u64>(witness_cap);
        }

        const auto result = ts::execute(config);
        const std::string body = config.format == "csv" ? result.csv : result.document.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << body;
        } else {
            write_text(out_path, body);
        }
        const std::string manifest = result.manifest.dump(2) + "\n";
        if (!manifest_path.empty()) {
            write_text(manifest_path, manifest);
        } else if (config.format == "csv") {
            // JSON documents embed the manifest; CSV gets it next to the data.
            if (!out_path.empty()) {
                write_text(out_path + ".manifest.json", manifest);
            } else {
                std::cerr << result.manifest.dump() << "\n";
            }
        }
        return 0;
    } catch (const ts::InputError& e) {
        return report(ts::ExitCode::usage, "usage error", e.what());
    } catch (const ts::ResourceError& e) {
        return report(ts::ExitCode::resource, "resource limit", e.what());
    } catch (const std::bad_alloc&) {
        return report(ts::ExitCode::resource, "resource limit", "out of memory");
    } catch (const ts::VerificationError& e) {
        return report(ts::ExitCode::verification, "verification failure", e.what());
    } catch (const nlohmann::json::exception& e) {
        return report(ts::ExitCode::usage, "usage error", e.what());
    } catch (const std::exception& e) {
        return report(ts::ExitCode::internal, "internal error", e.what());
    }
}
