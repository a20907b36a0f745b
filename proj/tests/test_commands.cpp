#include <doctest.h>

#include <filesystem>

#include "mrta/checkpoint.hpp"
#include "mrta/commands.hpp"
#include "mrta/error.hpp"

using namespace mrta;

namespace {

Scenario fixture_scenario() {
    return load_scenario(std::string(MRTA_FIXTURE_DIR) +
                         "/two_robot_five_task.scen");
}

}  // namespace

TEST_CASE("scenario loads the bundled fixture") {
    const Scenario s = fixture_scenario();
    CHECK(s.layout.width() == 10);
    CHECK(s.queue_capacity == 2);
    REQUIRE(s.robots.size() == 2);
    CHECK(s.robots[0].position == Cell{2, 2});
    CHECK(s.robots[1].remaining == doctest::Approx(2.0));
    REQUIRE(s.tasks.size() == 5);
    CHECK(s.tasks[0].origin == Cell{2, 9});
    CHECK(s.tasks[0].destination == Cell{5, 5});
    CHECK(s.tasks[0].length == doctest::Approx(5.0));
    CHECK(s.tasks[4].id == 5);

    CHECK_THROWS_AS(parse_scenario("grid 3 3\nrobot 0 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("robot 0 0 0\ntask 0 0 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("grid 3 3\nwhat 1\n"), ParseError);
}

TEST_CASE("replay reproduces the three reference traces") {
    const Scenario s = fixture_scenario();

    const ReplayReport greedy = cmd_replay(s, PolicySpec::parse("mpdm"));
    CHECK(greedy.episode.total_ttd == doctest::Approx(22.74).epsilon(2e-3));

    const ReplayReport regret = cmd_replay(s, PolicySpec::parse("rbts"));
    CHECK(regret.episode.total_ttd == doctest::Approx(18.46).epsilon(1e-3));

    const ReplayReport scripted = cmd_replay(s, std::vector<int>{1, 3, 4, 2, 5});
    CHECK(scripted.episode.total_ttd == doctest::Approx(17.93).epsilon(2e-3));

    CHECK(greedy.table.size() == 5);
    CHECK_THROWS_AS(cmd_replay(s, std::vector<int>{1, 2}), InvalidConfig);
    CHECK_THROWS_AS(cmd_replay(s, std::vector<int>{1, 1, 1, 1, 1}),
                    InvalidAction);

    // Render paths stay stable and parseable.
    CHECK(render(greedy).find("total ttd 22.74") != std::string::npos);
    CHECK(render_csv(scripted).find("step,clock,robot,task_id,ttd") == 0);
}

TEST_CASE("evaluate reports per-seed rows and improvement") {
    ExperimentConfig config;
    config.robots = 4;
    config.queue_capacity = 2;
    config.tasks = TaskGenMode::TwoTask;
    config.task_budget = 60;
    config.seed = 3;

    const EvaluateReport report =
        cmd_evaluate(config, PolicySpec::parse("mpdm"),
                     PolicySpec::parse("rbts"), 3);
    CHECK(report.policy.per_seed.size() == 3);
    REQUIRE(report.baseline.has_value());
    CHECK(report.baseline->per_seed.size() == 3);
    CHECK(report.policy.mean_ttd > 0.0);
    for (const SeedOutcome& o : report.policy.per_seed) {
        CHECK(o.total_ttd > 0.0);
        CHECK(o.makespan > 0.0);
    }

    // Identical config and seeds give identical reports.
    const EvaluateReport again =
        cmd_evaluate(config, PolicySpec::parse("mpdm"),
                     PolicySpec::parse("rbts"), 3);
    CHECK(render(again) == render(report));
    CHECK(render_csv(again) == render_csv(report));

    ExperimentConfig bad = config;
    bad.task_budget = 0;
    CHECK_THROWS_AS(
        cmd_evaluate(bad, PolicySpec::parse("mpdm"), std::nullopt, 1),
        InvalidConfig);
}

TEST_CASE("checkpoint policies evaluate through the same path") {
    const auto path =
        std::filesystem::temp_directory_path() / "mrta_eval_ckpt.bin";
    save_checkpoint(PolicyParams::random_init(7), "", 7, path);

    ExperimentConfig config;
    config.robots = 3;
    config.queue_capacity = 2;
    config.tasks = TaskGenMode::TwoTask;
    config.task_budget = 40;
    config.seed = 11;

    const PolicySpec spec = PolicySpec::parse(path.string());
    CHECK(spec.kind == PolicySpec::Kind::Checkpoint);
    const EvaluateReport report = cmd_evaluate(config, spec, std::nullopt, 2);
    CHECK(report.policy.per_seed.size() == 2);
    CHECK(report.policy.mean_ttd > 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("bench rows cover the count grid") {
    const PolicyParams params = PolicyParams::random_init(5);
    const BenchReport report = cmd_bench({2, 4}, {3}, params, 10);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].robots == 2);
    CHECK(report.rows[1].robots == 4);
    CHECK(report.rows[0].tasks == 3);
    CHECK(report.rows[0].mean_us > 0.0);
    CHECK(report.rows[0].param_count == report.rows[1].param_count);
    CHECK(render(report).find("us/forward") != std::string::npos);
    CHECK(render_csv(report).find("robots,tasks,") == 0);

    CHECK_THROWS_AS(cmd_bench({}, {3}, params, 10), InvalidConfig);
    CHECK_THROWS_AS(cmd_bench({2}, {0}, params, 10), InvalidConfig);
}
