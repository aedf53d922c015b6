#include "heliosim/cli.hpp"

#include "heliosim/errors.hpp"
#include "heliosim/properties.hpp"
#include "heliosim/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>

namespace heliosim::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

void print_verdicts(std::ostream& out, const std::vector<properties::Verdict>& verdicts) {
    for (const auto& v : verdicts) {
        out << v.property << ": " << (v.holds ? "holds" : "VIOLATED");
        if (!v.holds) {
            out << " (" << v.detail << "; witness steps:";
            for (const auto& ev : v.witness) out << ' ' << ev.step;
            out << ')';
        }
        out << '\n';
    }
}

int verdict_exit(const std::vector<properties::Verdict>& verdicts) {
    for (const auto& v : verdicts) {
        if (!v.holds) return kExitViolation;
    }
    return kExitOk;
}

int run_command(const std::string& name, const std::string& policy_name, std::uint64_t seed,
                bool tiny_group, const std::string& out_path, const std::string& board_path,
                const std::string& roll_path, std::ostream& out) {
    const auto policy = board::policy_from_string(policy_name);
    const auto group = tiny_group ? crypto::GroupParams::tiny() : crypto::GroupParams::default256();
    const auto result = scenario::run_builtin(name, policy, seed, group);

    out << "scenario: " << name << "\npolicy: " << board::to_string(policy)
        << "\nseed: " << seed << "\ntally: " << result.tally << '\n';
    print_verdicts(out, result.verdicts);

    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + out_path);
        netsim::write_trace(f, result.trace.events);
    }
    if (!board_path.empty()) {
        std::ofstream f(board_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + board_path);
        f << result.board_export.dump(2) << '\n';
    }
    if (!roll_path.empty()) {
        std::ofstream f(roll_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + roll_path);
        f << nlohmann::ordered_json(result.roll).dump() << '\n';
    }
    return verdict_exit(result.verdicts);
}

int list_command(bool export_configs, std::uint64_t seed, std::ostream& out) {
    for (const auto& name : scenario::builtin_names()) {
        if (export_configs) {
            const auto cfg =
                scenario::builtin_config(name, board::ArchivePolicy::Vulnerable, seed);
            out << cfg.to_json().dump() << '\n';
        } else {
            out << name << '\n';
        }
    }
    return kExitOk;
}

int verify_command(const std::string& trace_path, const std::string& roll_path,
                   std::ostream& out) {
    std::ifstream tf(trace_path, std::ios::binary);
    if (!tf) throw std::runtime_error("cannot open " + trace_path);
    const auto trace = properties::TraceData::from_jsonl(tf);

    std::ifstream rf(roll_path, std::ios::binary);
    if (!rf) throw std::runtime_error("cannot open " + roll_path);
    const auto roll_json = nlohmann::json::parse(rf);
    std::set<std::string> roll;
    for (const auto& id : roll_json) roll.insert(id.get<std::string>());

    std::vector<properties::Verdict> verdicts;
    verdicts.push_back(properties::check_eligibility(trace, roll));
    verdicts.push_back(properties::check_non_reusability(trace));
    verdicts.push_back(properties::check_strong_non_reusability(trace));
    for (const auto& v : verdicts) out << v.to_json().dump() << '\n';
    return verdict_exit(verdicts);
}

int tally_check_command(const std::string& trace_path, std::ostream& out) {
    std::ifstream tf(trace_path, std::ios::binary);
    if (!tf) throw std::runtime_error("cannot open " + trace_path);
    const auto trace = properties::TraceData::from_jsonl(tf);
    if (!trace.has_tally()) throw TraceError("transcript has no tally event");

    const auto state = properties::replay_accepts(trace.events);

    // Recount from the harness annotations: sum of the accepted ballots'
    // plaintexts, looked up by digest.
    int recount = 0;
    for (const auto& [voter, subs] : state.accepted) {
        for (const auto& sub : subs) {
            const auto& casts = trace.ground_truth.at(voter);
            bool found = false;
            for (const auto& rec : casts) {
                if (rec.digest != sub) continue;
                if (!rec.plaintext) throw TraceError("transcript lacks plaintext annotations");
                recount += *rec.plaintext;
                found = true;
                break;
            }
            if (!found) throw TraceError("accepted ballot not in any voter's cast history");
        }
    }
    int last_cast_recount = 0;
    for (const auto& [voter, casts] : trace.ground_truth) {
        if (!state.accepted.contains(voter) || state.accepted.at(voter).empty()) continue;
        if (!casts.back().plaintext) throw TraceError("transcript lacks plaintext annotations");
        last_cast_recount += *casts.back().plaintext;
    }

    const int published = state.tally_result.value_or(0);
    nlohmann::ordered_json report;
    report["published_tally"] = published;
    report["recount_accepted"] = recount;
    report["recount_last_cast"] = last_cast_recount;
    report["matches_accepted"] = published == recount;
    report["matches_last_cast"] = published == last_cast_recount;
    out << report.dump() << '\n';
    return published == recount ? kExitOk : kExitViolation;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic Helios-style election simulator: token-delay re-voting "
                 "exploit, timestamp fixes, and machine-checked trace properties"};
    app.require_subcommand(1);

    std::string scenario_name;
    std::string policy_name = "vulnerable";
    std::uint64_t seed = 1;
    bool tiny_group = false;
    std::string out_path, board_path, roll_path;
    auto* run = app.add_subcommand("run", "Run a builtin scenario and check its properties");
    run->add_option("scenario", scenario_name, "Scenario name (see `list`)")->required();
    run->add_option("--policy", policy_name,
                    "Archive policy: vulnerable | token-timestamp | ballot-timestamp");
    run->add_option("--seed", seed, "64-bit run seed");
    run->add_flag("--tiny-group", tiny_group, "Use the pinned (23, 11, 2) demo group");
    run->add_option("--out", out_path, "Write the transcript (JSON lines) here");
    run->add_option("--board-out", board_path, "Write the board export (JSON) here");
    run->add_option("--roll-out", roll_path, "Write the electoral roll (JSON array) here");

    bool export_configs = false;
    auto* list = app.add_subcommand("list", "List builtin scenarios");
    list->add_flag("--export", export_configs, "Dump each scenario's config as JSON");

    std::string trace_path, verify_roll_path;
    auto* verify = app.add_subcommand("verify", "Re-check the trace properties of a transcript");
    verify->add_option("trace", trace_path, "Transcript written by `run --out`")->required();
    verify->add_option("--roll", verify_roll_path, "Electoral roll JSON array")->required();

    std::string tally_trace_path;
    auto* tally_check =
        app.add_subcommand("tally-check", "Compare the published tally against a recount");
    tally_check->add_option("trace", tally_trace_path, "Transcript written by `run --out`")
        ->required();

    std::vector<std::string> argv(args.rbegin(), args.rend()); // CLI11 wants a reversed vector
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (!scenario::is_builtin(scenario_name)) {
                err << "error: unknown scenario '" << scenario_name << "' (try `list`)\n";
                return kExitUsage;
            }
            return run_command(scenario_name, policy_name, seed, tiny_group, out_path, board_path,
                               roll_path, out);
        }
        if (list->parsed()) return list_command(export_configs, seed, out);
        if (verify->parsed()) return verify_command(trace_path, verify_roll_path, out);
        if (tally_check->parsed()) return tally_check_command(tally_trace_path, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    err << "error: no subcommand\n";
    return kExitUsage;
}

} // namespace heliosim::cli
