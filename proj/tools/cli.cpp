#include "cli.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rema/agents.hpp"
#include "rema/data.hpp"
#include "rema/errors.hpp"
#include "rema/exp.hpp"
#include "rema/report.hpp"
#include "rema/text.hpp"

namespace fs = std::filesystem;

namespace rema::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a command can be configured with; bound to the flags of
/// whichever subcommands use it.
struct RunConfig {
    ScenarioConfig scenario;
    std::string hot = "0,1,2";
    RewardParams reward;
    std::size_t episodes = 10000;
    std::string role = "train";
    std::string agent = "q";
    std::string data;
    std::string qtable;
    std::string out;
    std::string summary;
    std::string out_dir;
    std::string label;
    std::uint64_t init_seed = 1;
    std::uint64_t eval_seed = 7;
    int passes = kDefaultPasses;
    int jobs = 1;
    long trace_episode = -1;
    std::string trace_out;
    std::vector<std::string> metrics_inputs;
    std::vector<std::string> trace_inputs;
    int bands_for_traces = 10;
    double epsilon_high = 0.5;
    double memory_epsilon = 0.2;
};

std::vector<Band> parse_band_list(const std::string& s) {
    std::vector<Band> out;
    if (s.empty()) return out;
    for (auto part : text::split(s, ',')) {
        auto v = text::parse_int(part);
        if (!v || *v < 0 || *v > 1'000'000) throw ConfigError("bad band index '" + std::string(part) + "' in hot");
        out.push_back(static_cast<Band>(*v));
    }
    return out;
}

void add_scenario_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--bands", c.scenario.n_bands, "number of frequency bands")->capture_default_str();
    app->add_option("--receivers", c.scenario.n_receivers, "receiver channels")->capture_default_str();
    app->add_option("--signals", c.scenario.n_signals, "interference signals per episode")->capture_default_str();
    app->add_option("--steps", c.scenario.n_steps, "steps per episode")->capture_default_str();
    app->add_option("--p-detect", c.scenario.p_detect, "per-step detection probability")->capture_default_str();
    app->add_option("--p-hot", c.scenario.p_hot, "probability a signal lands in a hot band")->capture_default_str();
    app->add_option("--hot", c.hot, "comma-separated hot band indices")->capture_default_str();
    app->add_option("--seed", c.scenario.seed, "dataset seed")->capture_default_str();
}

void add_reward_flags(CLI::App* app, RunConfig& c) {
    auto& r = c.reward;
    app->add_option("--alpha", r.alpha, "learning rate")->capture_default_str();
    app->add_option("--gamma", r.gamma, "discount")->capture_default_str();
    app->add_option("--epsilon", r.epsilon, "exploration rate")->capture_default_str();
    app->add_option("--penalty-same", r.penalty_same)->capture_default_str();
    app->add_option("--penalty-swap", r.penalty_swap)->capture_default_str();
    app->add_option("--penalty-no-detect", r.penalty_no_detect)->capture_default_str();
    app->add_option("--bonus-detect", r.bonus_detect)->capture_default_str();
    app->add_option("--x-cap", r.x_cap, "detection streak cap")->capture_default_str();
    app->add_option("--penalty-overstay", r.penalty_overstay)->capture_default_str();
}

void add_jobs_flag(CLI::App* app, RunConfig& c) {
    app->add_option("--jobs", c.jobs, "OpenMP threads")->check(CLI::Range(1, 4096))->capture_default_str();
}

void apply_jobs(const RunConfig& c) { omp_set_num_threads(c.jobs); }

ScenarioConfig validated_scenario(RunConfig& c) {
    c.scenario.hot_bands = parse_band_list(c.hot);
    c.scenario.validate();
    return c.scenario;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::pair<std::string, std::string> split_labelled(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
        throw UsageError("expected label=path, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

// --------------------------------------------------------------------------
// commands

void cmd_gen(RunConfig& c, std::ostream& out) {
    const ScenarioConfig cfg = validated_scenario(c);
    const Role role = parse_role(c.role);
    apply_jobs(c);
    const Dataset ds = generate_dataset(cfg, c.episodes, role);
    save_dataset(ds, c.out);
    out << "wrote " << ds.episodes.size() << " " << to_string(role) << " episodes (seed " << cfg.seed << ") to "
        << c.out << '\n';
}

QTable train_table(const Dataset& ds, AgentKind kind, const RewardParams& params, std::uint64_t init_seed,
                   int passes) {
    QTable table = init_qtable(ds.cfg, variant_of(kind), init_seed, params.x_cap);
    // Exploration during training draws from a stream of its own, derived from the init seed.
    Rng rng = Rng::substream(init_seed, ~std::uint64_t{0});
    train(table, ds, params, rng, passes);
    return table;
}

void cmd_train(RunConfig& c, std::ostream& out) {
    c.reward.validate();
    const AgentKind kind = parse_agent_kind(c.agent);
    if (kind == AgentKind::heuristic) throw ConfigError("the heuristic agent has nothing to train");
    const Dataset ds = load_dataset(c.data);
    if (ds.role != Role::train) throw ConfigError("'" + c.data + "' is a validation dataset");
    const QTable table = train_table(ds, kind, c.reward, c.init_seed, c.passes);
    save_qtable(table, c.out);
    out << "trained " << to_string(kind) << " table " << table.n_states() << "x" << table.n_actions() << " on "
        << ds.episodes.size() << " episodes, checksum " << qtable_checksum(table) << '\n';
}

struct EvalResult {
    std::vector<EpisodeMetrics> metrics;
    RunSummary summary;
};

EvalResult evaluate_agent(const Dataset& ds, AgentKind kind, const QTable* table, const RewardParams& params,
                          std::uint64_t eval_seed, const std::string& label) {
    const Agent agent = kind == AgentKind::heuristic ? Agent::heuristic() : Agent::learned(kind, *table);
    EvalResult r;
    r.metrics = evaluate(agent, ds, params, eval_seed);
    r.summary = summarize(r.metrics, label);
    return r;
}

void cmd_eval(RunConfig& c, std::ostream& out) {
    c.reward.validate();
    const AgentKind kind = parse_agent_kind(c.agent);
    if (kind != AgentKind::heuristic && c.qtable.empty()) throw UsageError("--qtable is required for agent " + c.agent);
    if (c.trace_episode >= 0 && c.trace_out.empty()) throw UsageError("--trace-episode needs --trace-out");
    apply_jobs(c);

    const Dataset ds = load_dataset(c.data);
    std::optional<QTable> table;
    if (kind != AgentKind::heuristic) table = load_qtable(c.qtable);
    const std::string label = c.label.empty() ? std::string(to_string(kind)) : c.label;
    const EvalResult r = evaluate_agent(ds, kind, table ? &*table : nullptr, c.reward, c.eval_seed, label);

    write_file(c.out, [&](std::ostream& f) { write_metrics_csv(f, r.metrics, ds.cfg.n_bands); });
    if (!c.summary.empty()) write_file(c.summary, [&](std::ostream& f) { write_summary_csv(f, {r.summary}); });
    if (c.trace_episode >= 0) {
        const Agent agent = table ? Agent::learned(kind, *table) : Agent::heuristic();
        const auto trace =
            trace_episode(agent, ds, c.reward, c.eval_seed, static_cast<std::size_t>(c.trace_episode));
        write_file(c.trace_out, [&](std::ostream& f) { write_trace_csv(f, trace); });
    }
    report::table(out, {r.summary});
}

void write_report(const fs::path& dir, const std::vector<RunSummary>& summaries,
                  const std::vector<std::pair<std::string, std::vector<Action>>>& traces, int n_bands,
                  std::ostream& out) {
    fs::create_directories(dir);
    if (!summaries.empty()) {
        write_file(dir / "detections.svg", [&](std::ostream& f) { report::detections_chart(f, summaries); });
        write_file(dir / "visits.svg", [&](std::ostream& f) { report::visits_chart(f, summaries); });
        write_file(dir / "summary.csv", [&](std::ostream& f) { write_summary_csv(f, summaries); });
        write_file(dir / "report.txt", [&](std::ostream& f) { report::table(f, summaries); });
        report::table(out, summaries);
    }
    for (const auto& [label, trace] : traces) {
        const fs::path p = dir / ("trace_" + label + ".svg");
        write_file(p, [&](std::ostream& f) { report::trace_chart(f, trace, n_bands, "Receiver positions: " + label); });
        out << "wrote " << p.string() << '\n';
    }
}

void cmd_report(RunConfig& c, std::ostream& out) {
    if (c.metrics_inputs.empty() && c.trace_inputs.empty())
        throw UsageError("report needs at least one --metrics or --trace input");
    std::vector<RunSummary> summaries;
    int n_bands = c.bands_for_traces;
    for (const auto& item : c.metrics_inputs) {
        const auto [label, path] = split_labelled(item);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        std::vector<EpisodeMetrics> metrics;
        try {
            metrics = read_metrics_csv(in);
        } catch (const ParseError& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
        if (metrics.empty()) throw std::runtime_error("'" + path + "' holds no episodes");
        summaries.push_back(summarize(metrics, label));
        n_bands = static_cast<int>(metrics.front().visits.size());
    }
    std::vector<std::pair<std::string, std::vector<Action>>> traces;
    for (const auto& item : c.trace_inputs) {
        const auto [label, path] = split_labelled(item);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        traces.emplace_back(label, read_trace_csv(in));
        for (const auto& a : traces.back().second)
            for (Band p : a.positions) n_bands = std::max(n_bands, p + 1);
    }
    write_report(c.out_dir, summaries, traces, n_bands, out);
}

void cmd_export_aggregate(RunConfig& c, std::ostream& out) {
    const Dataset ds = load_dataset(c.data);
    write_file(c.out, [&](std::ostream& f) { write_aggregate(f, ds); });
    out << "wrote aggregate view of " << ds.episodes.size() << " episodes to " << c.out << '\n';
}

void cmd_compare(RunConfig& c, std::ostream& out) {
    ScenarioConfig cfg = validated_scenario(c);
    c.reward.validate();
    RewardParams low = c.reward;
    RewardParams high = c.reward;
    high.epsilon = c.epsilon_high;
    RewardParams mem = c.reward;
    mem.epsilon = c.memory_epsilon;
    high.validate();
    mem.validate();
    apply_jobs(c);

    const fs::path dir = c.out_dir;
    fs::create_directories(dir);

    const Dataset train_ds = generate_dataset(cfg, c.episodes, Role::train);
    cfg.seed += 1;
    const Dataset val_ds = generate_dataset(cfg, c.episodes, Role::validation);
    save_dataset(train_ds, dir / "train.ds");
    save_dataset(val_ds, dir / "val.ds");
    out << "datasets: " << c.episodes << " train (seed " << train_ds.cfg.seed << "), " << c.episodes
        << " validation (seed " << val_ds.cfg.seed << ")\n";

    struct Run {
        std::string label;
        AgentKind kind;
        RewardParams params;
        std::string table_file;
    };
    const std::vector<Run> runs = {
        {"heuristic", AgentKind::heuristic, low, ""},
        {"q_eps" + text::shortest(low.epsilon), AgentKind::q, low, "q_low.qt"},
        {"q_eps" + text::shortest(high.epsilon), AgentKind::q, high, "q_high.qt"},
        {"qmem", AgentKind::qmem, mem, "qmem.qt"},
    };

    std::vector<RunSummary> summaries;
    std::vector<std::pair<std::string, std::vector<Action>>> traces;
    const std::size_t trace_index = c.trace_episode >= 0 ? static_cast<std::size_t>(c.trace_episode) : 0;
    for (const auto& run : runs) {
        std::optional<QTable> table;
        if (run.kind != AgentKind::heuristic) {
            table = train_table(train_ds, run.kind, run.params, c.init_seed, c.passes);
            save_qtable(*table, dir / run.table_file);
            out << "trained " << run.label << ", checksum " << qtable_checksum(*table) << '\n';
        }
        const EvalResult r = evaluate_agent(val_ds, run.kind, table ? &*table : nullptr, run.params, c.eval_seed, run.label);
        write_file(dir / ("metrics_" + run.label + ".csv"),
                   [&](std::ostream& f) { write_metrics_csv(f, r.metrics, cfg.n_bands); });
        summaries.push_back(r.summary);

        const Agent agent = table ? Agent::learned(run.kind, *table) : Agent::heuristic();
        traces.emplace_back(run.label, trace_episode(agent, val_ds, run.params, c.eval_seed, trace_index));
        write_file(dir / ("trace_" + run.label + ".csv"), [&](std::ostream& f) { write_trace_csv(f, traces.back().second); });
    }
    write_report(dir, summaries, traces, cfg.n_bands, out);
}

// --------------------------------------------------------------------------
// config file

/// Reads key=value lines; '#' starts a comment. Keys use the long flag
/// names, with '_' accepted for '-'.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Receiver-channel resource management simulator", "rema"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config_path;

    auto* gen = app.add_subcommand("gen", "generate an episode dataset");
    add_scenario_flags(gen, c);
    gen->add_option("--episodes", c.episodes, "episode count")->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))->capture_default_str();
    gen->add_option("--role", c.role, "train or validation")->check(CLI::IsMember({"train", "validation"}))->capture_default_str();
    gen->add_option("--out", c.out, "dataset file")->required();
    add_jobs_flag(gen, c);

    auto* train_cmd = app.add_subcommand("train", "train a Q-table on a dataset");
    train_cmd->add_option("--data", c.data, "training dataset")->required();
    train_cmd->add_option("--agent", c.agent, "q or qmem")->check(CLI::IsMember({"q", "qmem", "heuristic"}))->capture_default_str();
    train_cmd->add_option("--init-seed", c.init_seed, "Q-table initialisation seed")->capture_default_str();
    train_cmd->add_option("--passes", c.passes, "sweeps over the dataset")->check(CLI::Range(0, 1'000'000))->capture_default_str();
    train_cmd->add_option("--out", c.out, "Q-table file")->required();
    add_reward_flags(train_cmd, c);

    auto* eval = app.add_subcommand("eval", "evaluate an agent on a dataset");
    eval->add_option("--data", c.data, "validation dataset")->required();
    eval->add_option("--agent", c.agent, "heuristic, q or qmem")->check(CLI::IsMember({"q", "qmem", "heuristic"}))->capture_default_str();
    eval->add_option("--qtable", c.qtable, "Q-table file (q and qmem)");
    eval->add_option("--eval-seed", c.eval_seed, "exploration seed")->capture_default_str();
    eval->add_option("--label", c.label, "agent label in the summary");
    eval->add_option("--out", c.out, "per-episode metrics CSV")->required();
    eval->add_option("--summary", c.summary, "summary CSV");
    eval->add_option("--trace-episode", c.trace_episode, "record positions for this episode")->check(CLI::NonNegativeNumber);
    eval->add_option("--trace-out", c.trace_out, "trace CSV");
    add_reward_flags(eval, c);
    add_jobs_flag(eval, c);

    auto* rep = app.add_subcommand("report", "charts and a table from metrics/trace files");
    rep->add_option("--metrics", c.metrics_inputs, "label=metrics.csv (repeatable)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    rep->add_option("--trace", c.trace_inputs, "label=trace.csv (repeatable)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    rep->add_option("--bands", c.bands_for_traces, "band count for trace-only reports")->check(CLI::Range(1, 1'000'000))->capture_default_str();
    rep->add_option("--out-dir", c.out_dir, "output directory")->required();

    auto* agg = app.add_subcommand("export-aggregate", "write the per-band aggregate view of a dataset");
    agg->add_option("--data", c.data, "dataset")->required();
    agg->add_option("--out", c.out, "output file")->required();

    auto* cmp = app.add_subcommand("compare", "generate, train, evaluate and report all four agents");
    add_scenario_flags(cmp, c);
    add_reward_flags(cmp, c);
    cmp->add_option("--episodes", c.episodes, "episodes per dataset")->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))->capture_default_str();
    cmp->add_option("--init-seed", c.init_seed)->capture_default_str();
    cmp->add_option("--eval-seed", c.eval_seed)->capture_default_str();
    cmp->add_option("--passes", c.passes)->check(CLI::Range(0, 1'000'000))->capture_default_str();
    cmp->add_option("--epsilon-high", c.epsilon_high, "exploration rate of the second Q agent")->capture_default_str();
    cmp->add_option("--memory-epsilon", c.memory_epsilon, "exploration rate of the memory agent")->capture_default_str();
    cmp->add_option("--trace-episode", c.trace_episode, "validation episode to trace")->check(CLI::NonNegativeNumber);
    cmp->add_option("--out-dir", c.out_dir)->required();
    add_jobs_flag(cmp, c);

    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->add_option("--config", config_path, "key=value file; flags on the command line win");

    std::string active = "rema";
    try {
        // Locate the subcommand and any --config so file values can be
        // placed ahead of the command-line flags.
        std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
        std::vector<std::string> merged = argv;
        if (!argv.empty()) {
            CLI::App* sub = nullptr;
            try {
                sub = app.get_subcommand(argv.front());
            } catch (const CLI::OptionNotFound&) {
            }
            std::string cfg_file;
            for (std::size_t i = 1; i < argv.size(); ++i) {
                if (argv[i] == "--config" && i + 1 < argv.size()) cfg_file = argv[i + 1];
                else if (argv[i].rfind("--config=", 0) == 0) cfg_file = argv[i].substr(9);
            }
            if (sub && !cfg_file.empty()) {
                active = "rema " + sub->get_name();
                std::vector<std::string> from_file;
                for (const auto& [key, value] : read_config_file(cfg_file)) {
                    if (key == "config" || key == "help" || sub->get_option_no_throw("--" + key) == nullptr)
                        throw UsageError("unknown key '" + key + "' in " + cfg_file + " for '" + sub->get_name() + "'");
                    from_file.push_back("--" + key);
                    from_file.push_back(value);
                }
                merged.clear();
                merged.push_back(argv.front());
                merged.insert(merged.end(), from_file.begin(), from_file.end());
                merged.insert(merged.end(), argv.begin() + 1, argv.end());
            }
        }
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << active << ": usage error: " << msg << '\n';
        return 2;
    } catch (const UsageError& e) {
        err << active << ": usage error: " << e.what() << '\n';
        return 2;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    active = "rema " + chosen->get_name();
    try {
        if (chosen == gen) cmd_gen(c, out);
        else if (chosen == train_cmd) cmd_train(c, out);
        else if (chosen == eval) cmd_eval(c, out);
        else if (chosen == rep) cmd_report(c, out);
        else if (chosen == agg) cmd_export_aggregate(c, out);
        else if (chosen == cmp) cmd_compare(c, out);
        return 0;
    } catch (const UsageError& e) {
        err << active << ": usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << active << ": configuration error: " << e.what() << '\n';
        return 1;
    } catch (const ParseError& e) {
        err << active << ": parse error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << active << ": error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rema::cli
