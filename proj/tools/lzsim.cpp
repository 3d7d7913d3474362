// lzsim command-line tool.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "app.hpp"

namespace {

using namespace lzsim;
namespace fs = std::filesystem;

struct ConfigArgs {
    std::string path;
    std::map<std::string, std::string> flags;
};

// Every config key doubles as a flag of the same name.
void add_config_flags(CLI::App* cmd, ConfigArgs& args, bool need_path) {
    auto* pos = cmd->add_option("config", args.path, "scenario file");
    if (need_path) pos->required()->check(CLI::ExistingFile);
    else pos->check(CLI::ExistingFile);
    for (const auto& key : config_keys())
        cmd->add_option("--" + key, args.flags[key], "override config key '" + key + "'");
}

ScenarioConfig load(const ConfigArgs& args, CLI::App* cmd) {
    const std::string text = args.path.empty() ? std::string() : app::read_text(args.path);
    ConfigOverrides ov;
    for (auto* opt : cmd->parse_order()) {
        const std::string key = opt->get_name().substr(2);
        if (args.flags.count(key) && opt->get_name().rfind("--", 0) == 0) ov.emplace_back(key, args.flags.at(key));
    }
    return parse_config(text, ov);
}

std::vector<double> parse_range(const std::string& field, const std::string& text, std::size_t parts) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) {
        char* end = nullptr;
        const double v = std::strtod(p.c_str(), &end);
        if (p.empty() || end != p.c_str() + p.size()) throw ValidationError(field, "bad number '" + p + "'");
        out.push_back(v);
    }
    if (out.size() != parts) throw ValidationError(field, "expected " + std::to_string(parts) + " ':'-separated values");
    return out;
}

void print_validity(const ValidityReport& r) {
    std::printf("criterion,lhs,rhs,margin,pass\n");
    for (const auto& c : r.criteria)
        std::printf("%s,%s,%s,%s,%s\n", c.name.c_str(), csv_number(c.lhs).c_str(), csv_number(c.rhs).c_str(),
                    csv_number(c.margin()).c_str(), c.pass ? "yes" : "no");
    for (const auto& [idx, tau] : r.lz_times) std::printf("# tau_LZ crossing %d = %s\n", idx, csv_number(tau).c_str());
    for (const auto& [name, d] : r.durations) std::printf("# %s = %s\n", name.c_str(), csv_number(d).c_str());
    std::printf("# verdict: %s\n", r.verdict ? "valid" : "outside the impulse regime");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Landau-Zener dynamics of one or two driven Rydberg atoms"};
    cli.require_subcommand(1);
    cli.set_version_flag("--version", app::kVersion);

    ConfigArgs run_args, sweep_args, validate_args;
    auto* run_cmd = cli.add_subcommand("run", "run a scenario (a sweep if it has axes)");
    add_config_flags(run_cmd, run_args, false);
    auto* sweep_cmd = cli.add_subcommand("sweep", "run a parameter sweep");
    add_config_flags(sweep_cmd, sweep_args, false);
    auto* validate_cmd = cli.add_subcommand("validate", "print the impulse-approximation validity report");
    add_config_flags(validate_cmd, validate_args, false);

    std::string manifest_path, rerun_output;
    auto* rerun_cmd = cli.add_subcommand("rerun", "repeat the run recorded in a manifest");
    rerun_cmd->add_option("manifest", manifest_path)->required()->check(CLI::ExistingFile);
    rerun_cmd->add_option("--output", rerun_output, "write into another directory");

    std::string v0_range;
    double gaps_rabi = 1.0;
    auto* gaps_cmd = cli.add_subcommand("gaps", "gaps at the three avoided crossings versus V0");
    gaps_cmd->add_option("--V0-range", v0_range, "lo:hi:n")->required();
    gaps_cmd->add_option("--rabi", gaps_rabi, "Rabi frequency");

    double res_bias = 0.0, res_v0 = 0.0;
    std::string omega_range;
    auto* res_cmd = cli.add_subcommand("resonances", "resonance catalog n omega = |Delta0|, |Delta0-V0|, |2Delta0-V0|");
    res_cmd->add_option("--Delta0", res_bias)->required();
    res_cmd->add_option("--V0", res_v0)->required();
    res_cmd->add_option("--omega-range", omega_range, "lo:hi")->required();

    std::string traj_path, channel = "P_s";
    BeatOptions beat_opt;
    auto* beats_cmd = cli.add_subcommand("beats", "envelope of a beating channel in a trajectory CSV");
    beats_cmd->add_option("trajectory", traj_path)->required()->check(CLI::ExistingFile);
    beats_cmd->add_option("--channel", channel);
    beats_cmd->add_option("--t-begin", beat_opt.t_begin);
    beats_cmd->add_option("--t-end", beat_opt.t_end);
    beats_cmd->add_option("--min-depth", beat_opt.min_depth);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : app::Usage;
    }

    try {
        if (*run_cmd || *sweep_cmd) {
            const bool sweep = sweep_cmd->parsed();
            const ScenarioConfig c = sweep ? load(sweep_args, sweep_cmd) : load(run_args, run_cmd);
            if (sweep && c.axes.empty()) throw ValidationError("axis1", "a sweep needs at least one axis");
            const auto out = app::execute(c, sweep ? "sweep" : "run");
            for (const auto& f : out.outputs) std::printf("%s\n", (fs::path(c.output) / f).c_str());
            if (!out.failures.empty())
                std::fprintf(stderr, "%zu sweep points failed; see manifest.json\n", out.failures.size());
            return out.exit_code;
        }
        if (*rerun_cmd) {
            const auto [text, command] = app::manifest_config(manifest_path);
            ConfigOverrides ov;
            if (!rerun_output.empty()) ov.emplace_back("output", rerun_output);
            const ScenarioConfig c = parse_config(text, ov);
            const auto out = app::execute(c, command);
            for (const auto& f : out.outputs) std::printf("%s\n", (fs::path(c.output) / f).c_str());
            return out.exit_code;
        }
        if (*validate_cmd) {
            const ScenarioConfig c = load(validate_args, validate_cmd);
            print_validity(validity_report(c.scenario.system, c.scenario.drive));
            return app::Ok;
        }
        if (*gaps_cmd) {
            const auto r = parse_range("V0-range", v0_range, 3);
            SweepAxis axis{"V0", r[0], r[1], static_cast<int>(r[2])};
            if (r[2] != std::floor(r[2])) throw ValidationError("V0-range", "n must be an integer");
            axis.validate();
            CsvTable t;
            t.header = {"V0", "dE_0", "dE_V0_half", "dE_V0"};
            for (double v0 : axis.values()) {
                const GapReport g = gap_report(SystemSpec::three_level(gaps_rabi, v0));
                t.rows.push_back({v0, g.at_zero, g.at_half, g.at_full});
            }
            std::fputs(write_csv(t).c_str(), stdout);
            return app::Ok;
        }
        if (*res_cmd) {
            const auto r = parse_range("omega-range", omega_range, 2);
            const ResonanceCatalog cat = resonance_catalog(res_bias, res_v0, r[0], r[1]);
            std::printf("family,n,omega,transition\n");
            for (const auto& e : cat.entries)
                std::printf("%s,%d,%s,%s\n", family_name(e.family), e.n, csv_number(e.omega).c_str(),
                            family_transition(e.family));
            return app::Ok;
        }
        if (*beats_cmd) {
            const CsvTable t = read_csv_file(traj_path);
            const BeatReport b = beat_analysis(t.series("t"), t.series(channel), beat_opt);
            std::printf("envelope_frequency,%s\n", csv_number(b.envelope_frequency).c_str());
            std::printf("modulation_depth,%s\n", csv_number(b.modulation_depth).c_str());
            std::printf("carrier_slope,%s\n", csv_number(b.carrier_slope).c_str());
            std::printf("carrier_intercept,%s\n", csv_number(b.carrier_intercept).c_str());
            return app::Ok;
        }
    } catch (const lzsim::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return app::Invalid;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return app::Invalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return app::Runtime;
    }
    return app::Usage;
}
