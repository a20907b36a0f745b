#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrta/checkpoint.hpp"
#include "mrta/commands.hpp"
#include "mrta/config.hpp"
#include "mrta/training.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << text;
}

int run(int argc, char** argv) {
    CLI::App app{"warehouse multi-robot task allocation toolkit"};
    app.require_subcommand(1);

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "train the allocation policy");
    std::string train_config_path;
    std::string train_out = "policy.ckpt";
    std::string train_metrics = "metrics.csv";
    std::optional<std::uint64_t> train_seed;
    std::optional<int> train_iterations;
    train_cmd->add_option("--config", train_config_path, "experiment config file")
        ->required();
    train_cmd->add_option("--out", train_out, "checkpoint output path");
    train_cmd->add_option("--metrics", train_metrics, "metrics CSV path");
    train_cmd->add_option("--seed", train_seed, "override config seed");
    train_cmd->add_option("--iterations", train_iterations,
                          "override total training iterations");

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a policy");
    std::string eval_config_path;
    std::string eval_policy;
    std::string eval_baseline;
    std::string eval_csv;
    int eval_seeds = 5;
    std::optional<std::uint64_t> eval_seed;
    std::optional<int> eval_budget;
    eval_cmd->add_option("--config", eval_config_path, "experiment config file")
        ->required();
    eval_cmd->add_option("--policy", eval_policy,
                         "mpdm | rbts | checkpoint path")
        ->required();
    eval_cmd->add_option("--baseline", eval_baseline,
                         "second policy to compare against");
    eval_cmd->add_option("--seeds", eval_seeds, "number of evaluation seeds");
    eval_cmd->add_option("--seed", eval_seed, "override config base seed");
    eval_cmd->add_option("--tasks", eval_budget, "override task budget");
    eval_cmd->add_option("--csv", eval_csv, "also write a CSV report");

    // --- replay ---
    auto* replay_cmd =
        app.add_subcommand("replay", "replay a fixture step by step");
    std::string replay_fixture;
    std::string replay_policy;
    std::string replay_sequence;
    std::string replay_csv;
    replay_cmd->add_option("--fixture", replay_fixture, "scenario file")
        ->required();
    replay_cmd->add_option("--policy", replay_policy,
                           "mpdm | rbts | checkpoint path");
    replay_cmd->add_option("--sequence", replay_sequence,
                           "comma-separated task ids to allocate in order");
    replay_cmd->add_option("--csv", replay_csv, "also write a CSV report");

    // --- bench ---
    auto* bench_cmd =
        app.add_subcommand("bench", "time the policy forward pass");
    std::string bench_robots = "100,200,400";
    std::string bench_tasks = "10";
    std::string bench_policy;
    std::string bench_csv;
    int bench_calls = 1000;
    bench_cmd->add_option("--robots", bench_robots, "robot counts (csv)");
    bench_cmd->add_option("--tasks", bench_tasks, "task counts (csv)");
    bench_cmd->add_option("--policy", bench_policy,
                          "checkpoint path (random weights when omitted)");
    bench_cmd->add_option("--calls", bench_calls, "forward calls per row");
    bench_cmd->add_option("--csv", bench_csv, "also write a CSV report");

    CLI11_PARSE(app, argc, argv);

    if (train_cmd->parsed()) {
        mrta::ExperimentConfig config = mrta::load_config(train_config_path);
        if (train_seed) config.seed = *train_seed;
        if (train_iterations) config.train.total_iterations = *train_iterations;
        config.validate();

        const auto make_env = [&config](int instance) {
            return config.make_environment(config.seed +
                                           static_cast<std::uint64_t>(instance));
        };
        const mrta::TrainResult result =
            mrta::train(make_env, config.train, config.seed, train_metrics);
        mrta::save_checkpoint(result.params, mrta::config_to_text(config),
                              config.seed, train_out);
        std::cout << "trained " << result.history.size() << " updates; wrote "
                  << train_out << " and " << train_metrics << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        mrta::ExperimentConfig config = mrta::load_config(eval_config_path);
        if (eval_seed) config.seed = *eval_seed;
        if (eval_budget) config.task_budget = *eval_budget;
        const auto policy = mrta::PolicySpec::parse(eval_policy);
        std::optional<mrta::PolicySpec> baseline;
        if (!eval_baseline.empty())
            baseline = mrta::PolicySpec::parse(eval_baseline);
        const mrta::EvaluateReport report =
            mrta::cmd_evaluate(config, policy, baseline, eval_seeds);
        std::cout << mrta::render(report);
        if (!eval_csv.empty()) write_text(eval_csv, mrta::render_csv(report));
        return 0;
    }

    if (replay_cmd->parsed()) {
        const mrta::Scenario scenario = mrta::load_scenario(replay_fixture);
        mrta::ReplayReport report;
        if (!replay_sequence.empty()) {
            report = mrta::cmd_replay(scenario, parse_int_list(replay_sequence));
        } else if (!replay_policy.empty()) {
            report = mrta::cmd_replay(scenario,
                                      mrta::PolicySpec::parse(replay_policy));
        } else {
            std::cerr << "replay needs --policy or --sequence\n";
            return 2;
        }
        std::cout << mrta::render(report);
        if (!replay_csv.empty()) write_text(replay_csv, mrta::render_csv(report));
        return 0;
    }

    if (bench_cmd->parsed()) {
        mrta::PolicyParams params = mrta::PolicyParams::random_init(1);
        if (!bench_policy.empty())
            params = mrta::load_checkpoint(bench_policy).params;
        const mrta::BenchReport report =
            mrta::cmd_bench(parse_int_list(bench_robots),
                            parse_int_list(bench_tasks), params, bench_calls);
        std::cout << mrta::render(report);
        if (!bench_csv.empty()) write_text(bench_csv, mrta::render_csv(report));
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
