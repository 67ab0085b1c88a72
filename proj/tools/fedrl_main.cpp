// Command-line front end: train / benchmark / sweep / report / inspect.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error,
// 3 ordering-check failure (sweep --check).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedrl/agents/checkpoint.hpp"
#include "fedrl/errors.hpp"
#include "fedrl/harness/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fedrl;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = "runs";
    std::string preset;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file (key = value lines)");
    cmd->add_option("--set", args.overrides, "config override KEY=VALUE (repeatable)")
        ->take_all();
    cmd->add_option("--seed", args.seed, "master seed")->each([&args](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--preset", args.preset, "config preset: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--workers", args.workers, "worker pool size (sweep)");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig base;
    apply_preset(base, args.preset);
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& s : args.overrides) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects KEY=VALUE, got `" + s + "`");
        }
        kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    ExperimentConfig cfg = parse_config(args.config_path, kv, base);
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.validate();
    }
    return cfg;
}

int action_id_for_name(const std::string& name) {
    const auto table = default_compression_table();
    for (const auto& c : table) {
        if (c.name() == name) return c.id;
    }
    throw ConfigError("unknown configuration name: " + name);
}

// Fig. 5-7 x-axis order: RL families then benchmarks grouped by q.
const std::vector<std::string>& figure_order_benchmarks() {
    static const std::vector<std::string> kOrder{"8-00", "8-05", "8-10", "9-00", "9-05",
                                                 "9-10", "10-00", "10-05", "10-10"};
    return kOrder;
}

const std::vector<std::string>& rl_families() {
    static const std::vector<std::string> kFamilies{"mab", "sarsa", "qlearning", "dsarsa", "ddqn"};
    return kFamilies;
}

void run_jobs(std::vector<std::function<void()>> jobs, int workers) {
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 2;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= jobs.size() || first_error) return;
                idx = next++;
            }
            try {
                jobs[idx]();
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

int cmd_train(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    OracleData oracle;
    const bool with_oracle = cfg.compute_regret;
    if (with_oracle) oracle = compute_oracle(cfg);
    RunOutput out = run_training(cfg, with_oracle ? &oracle : nullptr);
    export_metrics(out, cfg, args.out_dir);
    if (!out.agents.empty()) {
        save_checkpoint((fs::path(args.out_dir) / "checkpoint.bin").string(), *out.agents.front());
    }
    std::cout << "train " << out.summary.agent << ": final_reward=" << out.summary.final_reward
              << " regret=" << out.summary.regret << " -> " << args.out_dir << "\n";
    return 0;
}

int cmd_benchmark(const CommonArgs& args, const std::string& action) {
    ExperimentConfig cfg = resolve_config(args);
    std::vector<int> ids;
    if (action == "all") {
        ids.resize(kNumActions);
        for (int i = 0; i < kNumActions; ++i) ids[i] = i;
    } else {
        int v = -1;
        const auto res = std::from_chars(action.data(), action.data() + action.size(), v);
        if (res.ec == std::errc() && res.ptr == action.data() + action.size()) {
            ids.push_back(v);
        } else {
            ids.push_back(action_id_for_name(action));
        }
    }
    const auto table = default_compression_table();
    for (int id : ids) {
        if (id < 0 || id >= kNumActions) throw ConfigError("benchmark action must be in 0..8");
        RunOutput out = run_constant_benchmark(cfg, id);
        const std::string dir =
            ids.size() == 1 ? args.out_dir
                            : (fs::path(args.out_dir) / ("bench_" + table[id].name())).string();
        export_metrics(out, cfg, dir);
        std::cout << "benchmark " << table[id].name() << ": mean_reward="
                  << out.summary.mean_reward << " mean_app_delay_ms="
                  << out.summary.mean_app_delay_ms << " -> " << dir << "\n";
    }
    return 0;
}

struct SweepRow {
    std::string label;
    RunSummary summary;
};

int cmd_sweep(const CommonArgs& args, bool check) {
    ExperimentConfig base = resolve_config(args);
    fs::create_directories(args.out_dir);

    // benchmarks first: they double as the regret oracle under common
    // random numbers
    const auto table = default_compression_table();
    std::vector<RunOutput> bench(kNumActions);
    {
        std::vector<std::function<void()>> jobs;
        for (int a = 0; a < kNumActions; ++a) {
            jobs.push_back([&, a] {
                ExperimentConfig cfg = base;
                cfg.write_step_metrics = false;
                bench[a] = run_constant_benchmark(cfg, a, true, false);
                export_metrics(bench[a], cfg,
                               (fs::path(args.out_dir) / ("bench_" + table[a].name())).string());
            });
        }
        run_jobs(std::move(jobs), args.workers);
    }

    OracleData oracle;
    {
        double best_total = 0.0;
        for (int a = 0; a < kNumActions; ++a) {
            const double total = std::accumulate(bench[a].step_mean_rewards.begin(),
                                                 bench[a].step_mean_rewards.end(), 0.0);
            if (oracle.best_action < 0 || total > best_total) {
                oracle.best_action = a;
                best_total = total;
            }
        }
        oracle.step_mean_rewards = bench[oracle.best_action].step_mean_rewards;
        oracle.vehicle_rewards = bench[oracle.best_action].vehicle_rewards;
    }

    std::vector<RunOutput> trained(rl_families().size());
    {
        std::vector<std::function<void()>> jobs;
        for (std::size_t i = 0; i < rl_families().size(); ++i) {
            jobs.push_back([&, i] {
                ExperimentConfig cfg = base;
                cfg.family = rl_families()[i];
                trained[i] = run_training(cfg, &oracle);
                export_metrics(trained[i], cfg,
                               (fs::path(args.out_dir) / ("train_" + cfg.family)).string());
                if (!trained[i].agents.empty()) {
                    save_checkpoint((fs::path(args.out_dir) / ("train_" + cfg.family) /
                                     "checkpoint.bin")
                                        .string(),
                                    *trained[i].agents.front());
                }
            });
        }
        run_jobs(std::move(jobs), args.workers);
    }

    // comparison table: 5 RL rows then the 9 constants in figure order
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < rl_families().size(); ++i) {
        rows.push_back({rl_families()[i], trained[i].summary});
    }
    for (const auto& name : figure_order_benchmarks()) {
        rows.push_back({name, bench[action_id_for_name(name)].summary});
    }

    {
        std::ofstream f(fs::path(args.out_dir) / "comparison.csv", std::ios::binary);
        f << "agent,reward,regret,parameters,operations,time_us,mean_app_delay_ms,mean_map\n";
        for (const auto& r : rows) {
            f << r.label << ',' << r.summary.final_reward << ',' << r.summary.regret << ','
              << r.summary.parameters << ',' << r.summary.operations << ','
              << r.summary.step_time_us << ',' << r.summary.mean_app_delay_ms << ','
              << r.summary.mean_map << '\n';
        }
    }
    auto write_fig = [&](const std::string& name, auto value) {
        std::ofstream f(fs::path(args.out_dir) / name, std::ios::binary);
        f << "label,value\n";
        for (const auto& r : rows) f << r.label << ',' << value(r.summary) << '\n';
    };
    write_fig("fig_reward.csv", [](const RunSummary& s) { return s.final_reward; });
    write_fig("fig_delay.csv", [](const RunSummary& s) { return s.mean_app_delay_ms; });
    write_fig("fig_map.csv", [](const RunSummary& s) { return s.mean_map; });

    std::cout << "sweep: " << rows.size() << " rows -> " << args.out_dir << "/comparison.csv\n";

    if (!check) return 0;

    // ordering checks mirroring the paper's qualitative claims
    int failures = 0;
    auto expect = [&failures](bool ok, const std::string& what) {
        std::cout << (ok ? "[check] PASS " : "[check] FAIL ") << what << "\n";
        if (!ok) ++failures;
    };
    const auto& mab = trained[0].summary;
    for (std::size_t i = 1; i < rl_families().size(); ++i) {
        expect(trained[i].summary.final_reward > mab.final_reward,
               rl_families()[i] + " final reward exceeds mab");
    }
    double worst_rl = trained[0].summary.final_reward;
    for (const auto& t : trained) worst_rl = std::min(worst_rl, t.summary.final_reward);
    double best_const = bench[0].summary.final_reward;
    for (const auto& b : bench) best_const = std::max(best_const, b.summary.final_reward);
    expect(worst_rl > best_const, "every RL scheme beats every constant benchmark");

    double low_delay = bench[0].summary.mean_app_delay_ms;
    int low_idx = 0;
    for (int a = 1; a < kNumActions; ++a) {
        if (bench[a].summary.mean_app_delay_ms < low_delay) {
            low_delay = bench[a].summary.mean_app_delay_ms;
            low_idx = a;
        }
    }
    expect(table[low_idx].name() == "8-00", "constant 8-00 attains the lowest mean APP delay");

    double best_map = bench[0].summary.mean_map;
    int map_idx = 0;
    for (int a = 1; a < kNumActions; ++a) {
        if (bench[a].summary.mean_map > best_map) {
            best_map = bench[a].summary.mean_map;
            map_idx = a;
        }
    }
    expect(table[map_idx].quant_bits == 10, "a q=10 configuration attains the highest mAP");

    auto mean_of = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    const double lin_first = std::max(mean_of(trained[1].summary.first100_rewards),
                                      mean_of(trained[2].summary.first100_rewards));
    const double nn_first = std::max(mean_of(trained[3].summary.first100_rewards),
                                     mean_of(trained[4].summary.first100_rewards));
    expect(lin_first > nn_first, "linear learners converge faster over the first 100 steps");
    const double lin_regret =
        std::max(trained[1].summary.regret, trained[2].summary.regret);
    const double nn_regret = std::min(trained[3].summary.regret, trained[4].summary.regret);
    expect(lin_regret < nn_regret, "linear learners accumulate less regret than NN learners");

    return failures == 0 ? 0 : 3;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_dir) {
    if (dirs.empty()) throw ConfigError("report: need at least one run directory");
    struct Acc {
        std::vector<double> final_reward, regret, step_time;
        std::int64_t parameters = 0, operations = 0;
    };
    std::map<std::string, Acc> by_agent;
    std::size_t loaded = 0;
    for (const auto& d : dirs) {
        const fs::path p = fs::path(d) / "summary.json";
        try {
            RunSummary s = load_summary(p.string());
            auto& acc = by_agent[s.agent];
            acc.final_reward.push_back(s.final_reward);
            acc.regret.push_back(s.regret);
            acc.step_time.push_back(s.step_time_us);
            acc.parameters = s.parameters;
            acc.operations = s.operations;
            ++loaded;
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << d << ": " << e.what() << "\n";
        }
    }
    if (loaded == 0) throw IoError("report: no readable summaries");

    auto mean_std = [](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= v.size();
        return std::make_pair(mean, std::sqrt(var));
    };

    fs::create_directories(out_dir);
    json j = json::array();
    std::ofstream f(fs::path(out_dir) / "report.csv", std::ios::binary);
    f << "agent,runs,final_reward_mean,final_reward_std,regret_mean,regret_std,"
         "parameters,operations,step_time_us_mean\n";
    for (const auto& [agent, acc] : by_agent) {
        const auto [rm, rs] = mean_std(acc.final_reward);
        const auto [gm, gs] = mean_std(acc.regret);
        const auto [tm, ts] = mean_std(acc.step_time);
        f << agent << ',' << acc.final_reward.size() << ',' << rm << ',' << rs << ',' << gm << ','
          << gs << ',' << acc.parameters << ',' << acc.operations << ',' << tm << '\n';
        j.push_back({{"agent", agent},
                     {"runs", acc.final_reward.size()},
                     {"final_reward_mean", rm},
                     {"final_reward_std", rs},
                     {"regret_mean", gm},
                     {"regret_std", gs},
                     {"parameters", acc.parameters},
                     {"operations", acc.operations},
                     {"step_time_us_mean", tm}});
    }
    std::ofstream jf(fs::path(out_dir) / "report.json", std::ios::binary);
    jf << j.dump(2) << '\n';
    std::cout << "report: " << by_agent.size() << " agents over " << loaded << " runs -> "
              << out_dir << "\n";
    return 0;
}

int cmd_inspect(const std::string& target) {
    fs::path p(target);
    if (fs::is_directory(p)) p /= "summary.json";
    json j;
    if (p.extension() == ".json") {
        RunSummary s = load_summary(p.string());
        j["agent"] = s.agent;
        j["final_reward"] = s.final_reward;
        j["regret"] = s.regret;
        j["parameters"] = s.parameters;
        j["operations"] = s.operations;
        j["seed"] = s.seed;
        j["config_digest"] = s.config_digest;
        j["episodes"] = s.episodes;
        j["steps"] = s.steps;
        j["n_vehicles"] = s.n_vehicles;
    } else if (p.extension() == ".bin") {
        const AgentFamily family = peek_checkpoint_family(p.string());
        AgentHyper hyper;
        auto agent = load_checkpoint(p.string(), hyper);
        const auto payload = agent->payload();
        double norm = 0.0;
        for (double x : payload) norm += x * x;
        j["family"] = family_name(family);
        j["parameters"] = parameter_count(family);
        j["payload_size"] = payload.size();
        j["payload_l2_norm"] = std::sqrt(norm);
        j["avg_reward"] = agent->avg_reward();
        j["epsilon"] = agent->epsilon();
    } else {
        throw ConfigError("inspect: expected a run directory, summary.json or checkpoint.bin");
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated RL testbed for LiDAR compression over a simulated uplink"};
    app.require_subcommand(1);

    CommonArgs train_args, bench_args, sweep_args;
    std::string bench_action = "all";
    bool sweep_check = false;
    std::vector<std::string> report_dirs;
    std::string report_out = "report";
    std::string inspect_target;

    auto* train = app.add_subcommand("train", "train one agent family");
    add_common(train, train_args);

    auto* bench = app.add_subcommand("benchmark", "run constant-compression benchmarks");
    add_common(bench, bench_args);
    bench->add_option("--action", bench_action, "action index 0..8, configuration name, or `all`");

    auto* sweep = app.add_subcommand("sweep", "all agent families + all benchmarks, shared seed");
    add_common(sweep, sweep_args);
    sweep->add_flag("--check", sweep_check, "verify the qualitative orderings (exit 3 on failure)");

    auto* report = app.add_subcommand("report", "aggregate summaries across run directories");
    report->add_option("dirs", report_dirs, "run directories");
    report->add_option("--out", report_out, "report output directory");

    auto* inspect = app.add_subcommand("inspect", "describe a run directory or checkpoint");
    inspect->add_option("target", inspect_target, "run dir, summary.json or checkpoint.bin")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(train)) return cmd_train(train_args);
        if (app.got_subcommand(bench)) return cmd_benchmark(bench_args, bench_action);
        if (app.got_subcommand(sweep)) return cmd_sweep(sweep_args, sweep_check);
        if (app.got_subcommand(report)) return cmd_report(report_dirs, report_out);
        if (app.got_subcommand(inspect)) return cmd_inspect(inspect_target);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
