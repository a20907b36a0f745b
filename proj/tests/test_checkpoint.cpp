#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mrta/checkpoint.hpp"
#include "mrta/config.hpp"
#include "mrta/error.hpp"

using namespace mrta;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(file)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("checkpoint round-trip is bitwise") {
    const PolicyParams params = PolicyParams::random_init(101);
    const auto path = temp_file("mrta_ckpt_roundtrip.bin");
    save_checkpoint(params, "robots = 10\n", 101, path);

    const CheckpointData loaded = load_checkpoint(path);
    // random_init draws on the float32 grid, so the float payload is exact.
    CHECK(loaded.params == params);
    CHECK(loaded.seed == 101);
    CHECK(loaded.config_text == "robots = 10\n");

    // Save-load-save produces an identical file byte for byte.
    const auto path2 = temp_file("mrta_ckpt_roundtrip2.bin");
    save_checkpoint(loaded.params, loaded.config_text, loaded.seed, path2);
    CHECK(slurp(path) == slurp(path2));

    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("checkpoint rejects corruption") {
    const PolicyParams params = PolicyParams::random_init(102);
    const auto path = temp_file("mrta_ckpt_corrupt.bin");
    save_checkpoint(params, "", 0, path);

    // Truncate by one byte.
    std::string bytes = slurp(path);
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 1));
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

    // Damage the magic.
    bytes[0] = 'X';
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

    // Bump the version.
    bytes[0] = 'M';
    bytes[4] = 9;
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

    // Corrupt a tensor shape (rows of the first manifest entry live right
    // after magic+version+seed+config_len+tensor_count+name_len+name).
    bytes[4] = 1;
    const std::size_t rows_at = 4 + 4 + 8 + 4 + 0 + 4 + 4 + 4;
    bytes[rows_at] = 77;
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

    CHECK_THROWS_AS(load_checkpoint(temp_file("mrta_ckpt_missing.bin")),
                    CheckpointError);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoints are robot-count independent") {
    // Weights trained against any fleet size drive any other fleet size:
    // nothing in the file depends on robot or task counts.
    const PolicyParams params = PolicyParams::random_init(103);
    const auto path = temp_file("mrta_ckpt_counts.bin");
    save_checkpoint(params, "robots = 10\n", 103, path);
    const CheckpointData loaded = load_checkpoint(path);

    ForwardTrace trace;
    for (int robots : {1, 10, 100}) {
        Observation obs;
        obs.diagonal = 1.0;
        for (int j = 0; j < robots; ++j)
            obs.robot_features.push_back({0.1, 0.2, 0.3});
        obs.selected_features = obs.robot_features[0];
        for (int i = 0; i < 5; ++i)
            obs.task_features.push_back({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
        const ForwardResult result = forward(loaded.params, obs, trace);
        CHECK(result.dist.probabilities.size() == 5);
    }
    std::filesystem::remove(path);
}

TEST_CASE("config files parse, serialize, and validate") {
    const std::string text =
        "# comment line\n"
        "robots = 7\n"
        "queue_capacity = 4\n"
        "navigation = astar\n"
        "reward = ttd_plus_task_length\n"
        "tasks = designated\n"
        "seed = 42\n"
        "task_budget = 99\n"
        "noise = false\n"
        "learning_rate = 0.001\n"
        "total_iterations = 5\n";
    const ExperimentConfig config = parse_config(text);
    CHECK(config.robots == 7);
    CHECK(config.queue_capacity == 4);
    CHECK(config.navigation == NavScheme::AStar);
    CHECK(config.reward == RewardScheme::TTDPlusTaskLength);
    CHECK(config.tasks == TaskGenMode::Designated);
    CHECK(config.seed == 42);
    CHECK(config.task_budget == 99);
    CHECK_FALSE(config.noise);
    CHECK(config.train.learning_rate == doctest::Approx(0.001));
    CHECK(config.train.total_iterations == 5);
    // Untouched keys keep their defaults.
    CHECK(config.train.rollout_length == 512);
    CHECK(config.train.minibatch_size == 32);
    CHECK(config.train.gamma == doctest::Approx(0.99));
    CHECK(config.train.value_coef == doctest::Approx(0.0002));
    CHECK(config.train.policy_coef == doctest::Approx(0.02));

    // Round trip through the text dump.
    const ExperimentConfig again = parse_config(config_to_text(config));
    CHECK(again.robots == config.robots);
    CHECK(again.navigation == config.navigation);
    CHECK(again.reward == config.reward);
    CHECK(again.tasks == config.tasks);
    CHECK(config_to_text(again) == config_to_text(config));

    CHECK_THROWS_AS(parse_config("mystery = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("robots\n"), ParseError);
    CHECK_THROWS_AS(parse_config("robots = many\n"), ParseError);

    ExperimentConfig bad = config;
    bad.robots = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
    ExperimentConfig bad_two_task = config;
    bad_two_task.tasks = TaskGenMode::TwoTask;
    bad_two_task.queue_capacity = 10;
    CHECK_THROWS_AS(bad_two_task.validate(), InvalidConfig);
}
