#include "mrta/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrta/checkpoint.hpp"
#include "mrta/error.hpp"

namespace mrta {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& base_dir) {
    std::optional<GridLayout> layout;
    NavScheme nav = NavScheme::Direct;
    int queue_capacity = 2;
    std::vector<RobotState> robots;
    std::vector<Task> tasks;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        const auto bad = [&](const std::string& why) {
            return ParseError("scenario line " + std::to_string(line_no) +
                              ": " + why);
        };
        if (kind == "grid") {
            int w, h;
            if (!(ls >> w >> h)) throw bad("grid needs <width> <height>");
            layout = GridLayout(w, h,
                                std::vector<std::uint8_t>(
                                    static_cast<std::size_t>(w) * h, 0));
        } else if (kind == "layout") {
            std::string path;
            if (!(ls >> path)) throw bad("layout needs a path");
            layout = load_layout(read_file(base_dir / path));
        } else if (kind == "nav") {
            std::string scheme;
            if (!(ls >> scheme)) throw bad("nav needs direct|astar");
            if (scheme == "direct") nav = NavScheme::Direct;
            else if (scheme == "astar") nav = NavScheme::AStar;
            else throw bad("unknown nav scheme: " + scheme);
        } else if (kind == "queue") {
            if (!(ls >> queue_capacity)) throw bad("queue needs a capacity");
        } else if (kind == "robot") {
            RobotState robot;
            if (!(ls >> robot.position.x >> robot.position.y >>
                  robot.remaining))
                throw bad("robot needs <x> <y> <remaining>");
            robots.push_back(robot);
        } else if (kind == "task") {
            Task task;
            if (!(ls >> task.origin.x >> task.origin.y >> task.destination.x >>
                  task.destination.y))
                throw bad("task needs <ox> <oy> <dx> <dy>");
            task.id = static_cast<std::int64_t>(tasks.size()) + 1;
            tasks.push_back(task);
        } else {
            throw bad("unknown directive: " + kind);
        }
    }
    if (!layout) throw ParseError("scenario declares no grid or layout");
    if (robots.empty()) throw ParseError("scenario declares no robot");
    if (tasks.empty()) throw ParseError("scenario declares no task");

    Scenario scenario{std::move(*layout), nav, queue_capacity,
                      std::move(robots), std::move(tasks)};
    const CostProvider provider =
        scenario.navigation == NavScheme::Direct
            ? CostProvider::direct()
            : CostProvider::astar(scenario.layout);
    for (Task& task : scenario.tasks)
        task.length = provider.cost(task.origin, task.destination);
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_file(path), path.parent_path());
}

PolicySpec PolicySpec::parse(const std::string& text) {
    PolicySpec spec;
    spec.label = text;
    if (text == "mpdm") {
        spec.kind = Kind::Mpdm;
    } else if (text == "rbts") {
        spec.kind = Kind::Rbts;
    } else {
        spec.kind = Kind::Checkpoint;
        spec.checkpoint = text;
    }
    return spec;
}

AllocatorFn make_allocator(const PolicySpec& spec) {
    switch (spec.kind) {
        case PolicySpec::Kind::Mpdm:
            return [](const Environment&, const Observation& obs) {
                return mpdm(obs);
            };
        case PolicySpec::Kind::Rbts:
            return [](const Environment& env, const Observation& obs) {
                return rbts(obs, env.world().robots, env.provider());
            };
        case PolicySpec::Kind::Checkpoint: {
            auto params = std::make_shared<PolicyParams>(
                load_checkpoint(spec.checkpoint).params);
            auto trace = std::make_shared<ForwardTrace>();
            return [params, trace](const Environment&, const Observation& obs) {
                const ForwardResult fwd = forward(*params, obs, *trace);
                return select_action(fwd.dist, SelectMode::Argmax, nullptr);
            };
        }
    }
    throw InvalidConfig("unknown policy spec");
}

namespace {

PolicyEvaluation evaluate_policy(const ExperimentConfig& config,
                                 const PolicySpec& spec, int n_seeds) {
    PolicyEvaluation eval;
    eval.label = spec.label;
    const AllocatorFn allocator = make_allocator(spec);
    for (int s = 0; s < n_seeds; ++s) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
        Environment env = config.make_environment(seed);
        env.reset();
        const EpisodeReport report =
            run_episode(env, allocator, config.task_budget);
        eval.per_seed.push_back({seed, report.total_ttd, report.makespan});
    }
    const double n = static_cast<double>(n_seeds);
    for (const SeedOutcome& o : eval.per_seed) {
        eval.mean_ttd += o.total_ttd / n;
        eval.mean_makespan += o.makespan / n;
    }
    for (const SeedOutcome& o : eval.per_seed) {
        eval.std_ttd += (o.total_ttd - eval.mean_ttd) *
                        (o.total_ttd - eval.mean_ttd) / n;
        eval.std_makespan += (o.makespan - eval.mean_makespan) *
                             (o.makespan - eval.mean_makespan) / n;
    }
    eval.std_ttd = std::sqrt(eval.std_ttd);
    eval.std_makespan = std::sqrt(eval.std_makespan);
    return eval;
}

}  // namespace

EvaluateReport cmd_evaluate(const ExperimentConfig& config,
                            const PolicySpec& policy,
                            const std::optional<PolicySpec>& baseline,
                            int n_seeds) {
    config.validate();
    if (n_seeds < 1) throw InvalidConfig("need at least one seed");
    EvaluateReport report;
    report.policy = evaluate_policy(config, policy, n_seeds);
    if (baseline) {
        report.baseline = evaluate_policy(config, *baseline, n_seeds);
        if (report.baseline->mean_ttd > 0.0)
            report.improvement_pct =
                (report.baseline->mean_ttd - report.policy.mean_ttd) /
                report.baseline->mean_ttd * 100.0;
    }
    return report;
}

namespace {

Environment scenario_environment(const Scenario& scenario) {
    EnvConfig env_config;
    env_config.n_robots = static_cast<int>(scenario.robots.size());
    env_config.queue_capacity = scenario.queue_capacity;
    env_config.reward = RewardScheme::TTD;
    env_config.noise_on = false;  // replays are exact
    Environment env(scenario.layout, scenario.navigation,
                    TaskGenerator::scripted(scenario.tasks), env_config,
                    /*seed=*/0);
    env.reset_from(scenario.robots);
    return env;
}

ReplayReport run_replay(const Scenario& scenario, const AllocatorFn& allocator,
                        std::string label) {
    Environment env = scenario_environment(scenario);
    ReplayReport report;
    report.policy_label = std::move(label);
    report.episode = run_episode(env, allocator,
                                 static_cast<int>(scenario.tasks.size()));
    for (const StepRecord& step : report.episode.steps) {
        std::ostringstream row;
        row << "S" << step.step << "  clock " << fmt("%7.2f", step.clock)
            << "  robot " << step.robot << " (" << step.robot_position.x << ","
            << step.robot_position.y << ")  -> task " << step.task_id
            << "  ttd " << fmt("%6.2f", step.pickup_cost) << "  robots:";
        for (const RobotState& r : step.robots_before)
            row << " (" << r.position.x << "," << r.position.y << ","
                << fmt("%.2f", r.remaining) << ")";
        report.table.push_back(row.str());
    }
    return report;
}

}  // namespace

ReplayReport cmd_replay(const Scenario& scenario, const PolicySpec& policy) {
    return run_replay(scenario, make_allocator(policy), policy.label);
}

ReplayReport cmd_replay(const Scenario& scenario,
                        const std::vector<int>& task_id_sequence) {
    if (task_id_sequence.size() != scenario.tasks.size())
        throw InvalidConfig("action sequence length must match task count");
    auto cursor = std::make_shared<std::size_t>(0);
    auto sequence = std::make_shared<std::vector<int>>(task_id_sequence);
    const AllocatorFn allocator = [cursor, sequence](const Environment& env,
                                                     const Observation&) {
        const int want_id = (*sequence)[(*cursor)++];
        const auto& queue = env.world().queue;
        for (int i = 0; i < queue.size(); ++i)
            if (queue[i].id == want_id) return i;
        throw InvalidAction("task id " + std::to_string(want_id) +
                            " is not in the queue");
    };
    return run_replay(scenario, allocator, "sequence");
}

BenchReport cmd_bench(const std::vector<int>& robot_counts,
                      const std::vector<int>& task_counts,
                      const PolicyParams& params, int calls) {
    if (robot_counts.empty() || task_counts.empty())
        throw InvalidConfig("bench needs at least one robot and task count");
    if (calls < 1) throw InvalidConfig("bench needs at least one call");
    for (int n : robot_counts)
        if (n < 1) throw InvalidConfig("robot counts must be >= 1");
    for (int n : task_counts)
        if (n < 1) throw InvalidConfig("task counts must be >= 1");

    BenchReport report;
    Rng rng = make_rng(7, 7);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    ForwardTrace trace;
    volatile double sink = 0.0;  // keep the optimizer honest

    for (int robots : robot_counts) {
        for (int tasks : task_counts) {
            Observation obs;
            obs.diagonal = 1.0;
            obs.selected = 0;
            for (int j = 0; j < robots; ++j)
                obs.robot_features.push_back(
                    {uniform(rng), uniform(rng), uniform(rng)});
            obs.selected_features = obs.robot_features[0];
            for (int i = 0; i < tasks; ++i)
                obs.task_features.push_back({uniform(rng), uniform(rng),
                                             uniform(rng), uniform(rng),
                                             uniform(rng), uniform(rng)});

            // Warm caches and the trace buffers before timing.
            for (int w = 0; w < 3; ++w) sink = sink + forward(params, obs, trace).value;
            const auto start = std::chrono::steady_clock::now();
            for (int c = 0; c < calls; ++c)
                sink = sink + forward(params, obs, trace).value;
            const auto stop = std::chrono::steady_clock::now();
            const double total_us =
                std::chrono::duration<double, std::micro>(stop - start)
                    .count();
            report.rows.push_back({robots, tasks, total_us / calls,
                                   PolicyParams::total_size()});
        }
    }
    (void)sink;
    return report;
}

std::string render(const EvaluateReport& report) {
    std::ostringstream out;
    const auto block = [&](const PolicyEvaluation& eval) {
        out << "policy " << eval.label << "\n";
        out << "  seed        ttd       makespan\n";
        for (const SeedOutcome& o : eval.per_seed) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "  %-8llu %10.2f %10.2f\n",
                          static_cast<unsigned long long>(o.seed), o.total_ttd,
                          o.makespan);
            out << buf;
        }
        out << "  mean ttd " << fmt("%.2f", eval.mean_ttd) << " +- "
            << fmt("%.2f", eval.std_ttd) << ", mean makespan "
            << fmt("%.2f", eval.mean_makespan) << " +- "
            << fmt("%.2f", eval.std_makespan) << "\n";
    };
    block(report.policy);
    if (report.baseline) {
        block(*report.baseline);
        out << "ttd improvement over " << report.baseline->label << ": "
            << fmt("%.2f", report.improvement_pct) << "%\n";
    }
    return out.str();
}

std::string render(const ReplayReport& report) {
    std::ostringstream out;
    out << "replay with " << report.policy_label << "\n";
    for (const std::string& row : report.table) out << row << "\n";
    out << "total ttd " << fmt("%.2f", report.episode.total_ttd)
        << ", makespan " << fmt("%.2f", report.episode.makespan) << "\n";
    return out.str();
}

std::string render(const BenchReport& report) {
    std::ostringstream out;
    out << "robots   tasks   us/forward   params\n";
    for (const BenchRow& row : report.rows) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%6d  %6d  %11.3f  %7zu\n", row.robots,
                      row.tasks, row.mean_us, row.param_count);
        out << buf;
    }
    return out.str();
}

std::string render_csv(const EvaluateReport& report) {
    std::ostringstream out;
    out << "policy,seed,ttd,makespan\n";
    const auto block = [&](const PolicyEvaluation& eval) {
        for (const SeedOutcome& o : eval.per_seed)
            out << eval.label << ',' << o.seed << ',' << fmt("%.6f", o.total_ttd)
                << ',' << fmt("%.6f", o.makespan) << "\n";
    };
    block(report.policy);
    if (report.baseline) block(*report.baseline);
    return out.str();
}

std::string render_csv(const ReplayReport& report) {
    std::ostringstream out;
    out << "step,clock,robot,task_id,ttd\n";
    for (const StepRecord& step : report.episode.steps)
        out << step.step << ',' << fmt("%.6f", step.clock) << ',' << step.robot
            << ',' << step.task_id << ',' << fmt("%.6f", step.pickup_cost)
            << "\n";
    return out.str();
}

std::string render_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "robots,tasks,us_per_forward,param_count\n";
    for (const BenchRow& row : report.rows)
        out << row.robots << ',' << row.tasks << ',' << fmt("%.4f", row.mean_us)
            << ',' << row.param_count << "\n";
    return out.str();
}

}  // namespace mrta
