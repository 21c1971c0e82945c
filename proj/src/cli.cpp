#include "mmg/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmg/errors.hpp"
#include "mmg/experiments.hpp"
#include "mmg/io.hpp"
#include "mmg/metrics.hpp"

namespace mmg {

namespace {

namespace fs = std::filesystem;

/// Flags that map onto configuration keys. Flag values override the file.
struct KeyFlags {
    std::vector<std::pair<std::string, std::string>> keys;  // (section.key, flag name)
    std::map<std::string, std::string> values;

    void add(CLI::App& app, const std::string& flag, const std::string& section, const std::string& key,
             const std::string& help) {
        const std::string id = section + "." + key;
        keys.emplace_back(id, flag);
        app.add_option_function<std::string>(
            "--" + flag, [this, id](const std::string& v) { values[id] = v; }, help);
    }

    std::vector<ConfigEntry> entries() const {
        std::vector<ConfigEntry> out;
        for (const auto& [id, flag] : keys) {
            auto it = values.find(id);
            if (it == values.end()) continue;
            const auto dot = id.find('.');
            out.push_back({id.substr(0, dot), id.substr(dot + 1), it->second, 0, 0});
        }
        return out;
    }
};

void add_game_flags(CLI::App& app, KeyFlags& f) {
    f.add(app, "N", "game", "N", "Number of agents");
    f.add(app, "K", "game", "K", "Number of markets");
    f.add(app, "s", "game", "s", "Strategies per market per agent");
    f.add(app, "m", "game", "m", "Memory length");
    f.add(app, "payoff", "game", "payoff", "linear | sign | scaled");
    f.add(app, "topology", "game", "topology", "regular | irregular");
    f.add(app, "n1", "game", "n1", "Agents confined to market 1 (irregular)");
    f.add(app, "n2", "game", "n2", "Agents linked to both markets (irregular)");
    f.add(app, "init", "game", "init", "Initial utilities: zero | uniform");
    f.add(app, "init-low", "game", "init_low", "Lower bound of uniform initial utilities");
    f.add(app, "init-high", "game", "init_high", "Upper bound of uniform initial utilities");
    f.add(app, "tie-break", "game", "tie_break", "random | lowest-index");
    f.add(app, "zero-demand", "game", "zero_demand", "coin | plus-one");
    f.add(app, "seed", "game", "seed", "Master seed");
    f.add(app, "T", "game", "T", "Ticks per run");
}

void add_analysis_flags(CLI::App& app, KeyFlags& f) {
    f.add(app, "window", "analysis", "window", "last-half | all | last:<count>");
    f.add(app, "theta", "analysis", "theta", "Large-fluctuation threshold");
    f.add(app, "belt", "analysis", "belt", "Relaxation belt as a fraction of N");
    f.add(app, "seeds", "ensemble", "seeds", "Runs per ensemble");
    f.add(app, "threads", "ensemble", "threads", "Worker threads (0 = all cores)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ParsedConfig load(const std::string& config_path, const KeyFlags& flags) {
    std::vector<ConfigEntry> entries;
    if (!config_path.empty()) entries = tokenize_config(read_file(config_path));
    for (auto& e : flags.entries()) entries.push_back(std::move(e));
    return materialize(entries);
}

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("MMG_OUT_DIR"); env && *env) return env;
    return ".";
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << bytes;
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-market minority game simulator", "mmg"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    KeyFlags run_flags, ens_flags, sweep_flags;

    auto* run_cmd = app.add_subcommand("run", "Run one game and write its records and manifest");
    run_cmd->add_option("--config", config_path, "Configuration file");
    add_game_flags(*run_cmd, run_flags);
    std::string format = "csv";
    bool to_stdout = false;
    run_cmd->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    run_cmd->add_option("--out", out_dir, "Output directory (default $MMG_OUT_DIR or .)");
    run_cmd->add_flag("--stdout", to_stdout, "Write records to standard output instead of files");

    auto* ens_cmd = app.add_subcommand("ensemble", "Run many seeds and write per-seed summaries");
    ens_cmd->add_option("--config", config_path, "Configuration file");
    add_game_flags(*ens_cmd, ens_flags);
    add_analysis_flags(*ens_cmd, ens_flags);
    ens_cmd->add_option("--out", out_dir, "Output directory (default $MMG_OUT_DIR or .)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write one row per point");
    sweep_cmd->add_option("--config", config_path, "Configuration file with a [sweep] section");
    add_game_flags(*sweep_cmd, sweep_flags);
    add_analysis_flags(*sweep_cmd, sweep_flags);
    sweep_flags.add(*sweep_cmd, "param", "sweep", "param", "N | n1");
    sweep_flags.add(*sweep_cmd, "values", "sweep", "values", "Comma-separated values");
    sweep_cmd->add_option("--out", out_dir, "Output directory (default $MMG_OUT_DIR or .)");

    auto* fig_cmd = app.add_subcommand("figure", "Generate a canned figure dataset");
    std::string figure;
    std::optional<std::uint64_t> fig_seed;
    std::optional<std::int64_t> fig_ticks;
    std::optional<int> fig_seeds;
    unsigned fig_threads = 0;
    fig_cmd->add_option("name", figure, "Figure name")->required()->check(CLI::IsMember(figure_names()));
    fig_cmd->add_option("--seed", fig_seed, "Master seed (default 1)");
    fig_cmd->add_option("--T", fig_ticks, "Ticks per run");
    fig_cmd->add_option("--seeds", fig_seeds, "Runs per ensemble point");
    fig_cmd->add_option("--threads", fig_threads, "Worker threads (0 = all cores)");
    fig_cmd->add_option("--out", out_dir, "Output directory (default $MMG_OUT_DIR or .)");

    auto* pred_cmd = app.add_subcommand("predict", "Print asymptotic occupancies");
    int p_agents = 0, p_markets = 2, p_slots = 2;
    std::optional<int> p_n1, p_n2;
    pred_cmd->add_option("--N", p_agents, "Number of agents");
    pred_cmd->add_option("--K", p_markets, "Number of markets")->check(CLI::PositiveNumber);
    pred_cmd->add_option("--s", p_slots, "Strategies per market")->check(CLI::PositiveNumber);
    pred_cmd->add_option("--n1", p_n1, "Agents confined to market 1 (irregular)");
    pred_cmd->add_option("--n2", p_n2, "Agents linked to both markets (irregular)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (run_cmd->parsed()) {
            const ParsedConfig c = load(config_path, run_flags);
            if (!c.seed_given) throw ConfigError("seed", "run needs an explicit seed (--seed or seed= in the config)");
            const RecordFormat fmt = parse_record_format(format);
            const auto records = run(c.game, c.ticks);
            const std::string bytes = emit_records(records, fmt);
            if (to_stdout) {
                out << bytes;
                return exit_ok;
            }
            const fs::path dir = output_dir(out_dir);
            const std::string name = std::string("records.") + format;
            write_file(dir / name, bytes);
            RunManifest m{c.game, c.ticks, artifact_version, format, content_hash(bytes)};
            write_file(dir / "manifest.json", serialize_manifest(m));
            err << "wrote " << (dir / name).string() << " and manifest.json\n";
        } else if (ens_cmd->parsed()) {
            const ParsedConfig c = load(config_path, ens_flags);
            const auto runs = ensemble_run(c.game, c.ticks, c.seeds, c.analysis, c.threads);
            std::ostringstream s;
            write_summaries_csv(runs, c.game.markets, s);
            const fs::path dir = output_dir(out_dir);
            write_file(dir / "ensemble.csv", s.str());
            err << "wrote " << (dir / "ensemble.csv").string() << "\n";
        } else if (sweep_cmd->parsed()) {
            const ParsedConfig c = load(config_path, sweep_flags);
            if (!c.sweep) throw ConfigError("values", "sweep needs [sweep] values= or --values");
            SweepSpec spec;
            spec.base = c.game;
            spec.parameter = c.sweep->parameter;
            spec.values = c.sweep->values;
            spec.seeds = c.seeds;
            spec.ticks = c.ticks;
            spec.options = c.analysis;
            spec.threads = c.threads;
            const auto points = q_sweep(spec);
            std::ostringstream s;
            const Table t = sweep_table("sweep", points, spec.parameter == SweepParameter::shared_agents);
            write_table_csv(t, s);
            const fs::path dir = output_dir(out_dir);
            write_file(dir / "sweep.csv", s.str());
            if (auto qc = estimate_critical_q(points)) err << "Q_c estimate: " << format_real(*qc) << "\n";
            err << "wrote " << (dir / "sweep.csv").string() << "\n";
        } else if (fig_cmd->parsed()) {
            FigureOverrides o{fig_seed, fig_ticks, fig_seeds, fig_threads};
            const Dataset d = figure_dataset(figure, o);
            const fs::path dir = output_dir(out_dir);
            for (const auto& t : d.tables) {
                std::ostringstream s;
                write_table_csv(t, s);
                write_file(dir / (d.figure + "_" + t.name + ".csv"), s.str());
            }
            err << "wrote " << d.tables.size() << " tables to " << dir.string() << "\n";
        } else if (pred_cmd->parsed()) {
            if (p_n1 || p_n2) {
                if (!p_n1 || !p_n2) throw ConfigError("n1", "irregular prediction needs both --n1 and --n2");
                const auto p = predicted_irregular(*p_n1, *p_n2, p_slots);
                out << format_real(p.shared_market_asymptote) << "\n" << format_real(p.bridge_market_limit) << "\n";
            } else {
                if (p_agents < 1) throw ConfigError("N", "predict needs --N >= 1");
                for (double v : predicted_occupancies(p_agents, p_markets, p_slots)) out << format_real(v) << "\n";
            }
        }
    } catch (const ConfigError& e) {
        err << "mmg: configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "mmg: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_ok;
}

}  // namespace mmg
