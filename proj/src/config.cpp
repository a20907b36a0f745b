#include "mrta/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mrta/error.hpp"

namespace mrta {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out;
    if (!(in >> out) || !(in >> std::ws).eof())
        throw ParseError("bad value for " + key + ": " + value);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    throw ParseError("bad boolean for " + key + ": " + value);
}

NavScheme parse_nav(const std::string& value) {
    if (value == "direct") return NavScheme::Direct;
    if (value == "astar") return NavScheme::AStar;
    throw ParseError("unknown navigation scheme: " + value);
}

RewardScheme parse_reward(const std::string& value) {
    if (value == "ttd") return RewardScheme::TTD;
    if (value == "task_length") return RewardScheme::TaskLength;
    if (value == "ttd_plus_task_length")
        return RewardScheme::TTDPlusTaskLength;
    throw ParseError("unknown reward scheme: " + value);
}

TaskGenMode parse_tasks(const std::string& value) {
    if (value == "random") return TaskGenMode::Random;
    if (value == "designated") return TaskGenMode::Designated;
    if (value == "two_task") return TaskGenMode::TwoTask;
    throw ParseError("unknown task generation mode: " + value);
}

}  // namespace

std::string to_string(NavScheme scheme) {
    return scheme == NavScheme::Direct ? "direct" : "astar";
}

std::string to_string(RewardScheme scheme) {
    switch (scheme) {
        case RewardScheme::TTD:
            return "ttd";
        case RewardScheme::TaskLength:
            return "task_length";
        case RewardScheme::TTDPlusTaskLength:
            return "ttd_plus_task_length";
    }
    return "ttd";
}

std::string to_string(TaskGenMode mode) {
    switch (mode) {
        case TaskGenMode::Random:
            return "random";
        case TaskGenMode::Designated:
            return "designated";
        case TaskGenMode::TwoTask:
            return "two_task";
        case TaskGenMode::Scripted:
            return "scripted";
    }
    return "random";
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) +
                             " is not key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "layout_file") config.layout_file = value;
        else if (key == "layout_preset") config.layout_preset = value;
        else if (key == "robots") config.robots = parse_number<int>(key, value);
        else if (key == "queue_capacity")
            config.queue_capacity = parse_number<int>(key, value);
        else if (key == "navigation") config.navigation = parse_nav(value);
        else if (key == "reward") config.reward = parse_reward(value);
        else if (key == "tasks") config.tasks = parse_tasks(value);
        else if (key == "seed")
            config.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "task_budget")
            config.task_budget = parse_number<int>(key, value);
        else if (key == "noise") config.noise = parse_bool(key, value);
        else if (key == "learning_rate")
            config.train.learning_rate = parse_number<double>(key, value);
        else if (key == "rollout_length")
            config.train.rollout_length = parse_number<int>(key, value);
        else if (key == "epochs_per_update")
            config.train.epochs_per_update = parse_number<int>(key, value);
        else if (key == "minibatch_size")
            config.train.minibatch_size = parse_number<int>(key, value);
        else if (key == "gamma")
            config.train.gamma = parse_number<double>(key, value);
        else if (key == "lambda")
            config.train.lambda = parse_number<double>(key, value);
        else if (key == "clip_epsilon")
            config.train.clip_epsilon = parse_number<double>(key, value);
        else if (key == "entropy_coef_start")
            config.train.entropy_coef_start = parse_number<double>(key, value);
        else if (key == "entropy_coef_end")
            config.train.entropy_coef_end = parse_number<double>(key, value);
        else if (key == "value_coef")
            config.train.value_coef = parse_number<double>(key, value);
        else if (key == "policy_coef")
            config.train.policy_coef = parse_number<double>(key, value);
        else if (key == "total_iterations")
            config.train.total_iterations = parse_number<int>(key, value);
        else if (key == "n_envs")
            config.train.n_envs = parse_number<int>(key, value);
        else
            throw ParseError("unknown config key: " + key);
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw ParseError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream out;
    if (!c.layout_file.empty()) out << "layout_file = " << c.layout_file << '\n';
    if (!c.layout_preset.empty())
        out << "layout_preset = " << c.layout_preset << '\n';
    out << "robots = " << c.robots << '\n'
        << "queue_capacity = " << c.queue_capacity << '\n'
        << "navigation = " << to_string(c.navigation) << '\n'
        << "reward = " << to_string(c.reward) << '\n'
        << "tasks = " << to_string(c.tasks) << '\n'
        << "seed = " << c.seed << '\n'
        << "task_budget = " << c.task_budget << '\n'
        << "noise = " << (c.noise ? "true" : "false") << '\n'
        << "learning_rate = " << c.train.learning_rate << '\n'
        << "rollout_length = " << c.train.rollout_length << '\n'
        << "epochs_per_update = " << c.train.epochs_per_update << '\n'
        << "minibatch_size = " << c.train.minibatch_size << '\n'
        << "gamma = " << c.train.gamma << '\n'
        << "lambda = " << c.train.lambda << '\n'
        << "clip_epsilon = " << c.train.clip_epsilon << '\n'
        << "entropy_coef_start = " << c.train.entropy_coef_start << '\n'
        << "entropy_coef_end = " << c.train.entropy_coef_end << '\n'
        << "value_coef = " << c.train.value_coef << '\n'
        << "policy_coef = " << c.train.policy_coef << '\n'
        << "total_iterations = " << c.train.total_iterations << '\n'
        << "n_envs = " << c.train.n_envs << '\n';
    return out.str();
}

void ExperimentConfig::validate() const {
    if (robots < 1) throw InvalidConfig("robots must be >= 1");
    if (queue_capacity < 1) throw InvalidConfig("queue capacity must be >= 1");
    if (task_budget < 1) throw InvalidConfig("task budget must be >= 1");
    if (tasks == TaskGenMode::TwoTask && queue_capacity != 2)
        throw InvalidConfig("two_task generation requires queue_capacity 2");
    train.validate();
}

GridLayout ExperimentConfig::make_layout() const {
    if (!layout_file.empty()) {
        std::ifstream file(layout_file);
        if (!file)
            throw ParseError("cannot open layout: " + layout_file);
        std::ostringstream buf;
        buf << file.rdbuf();
        return load_layout(buf.str());
    }
    if (!layout_preset.empty()) return generate_preset_layout(layout_preset);
    // Open grid matching the toy-scale settings.
    return GridLayout(10, 10, std::vector<std::uint8_t>(100, 0));
}

Environment ExperimentConfig::make_environment(std::uint64_t env_seed) const {
    validate();
    EnvConfig env_config;
    env_config.n_robots = robots;
    env_config.queue_capacity = queue_capacity;
    env_config.reward = reward;
    env_config.noise_on = noise;
    return Environment(make_layout(), navigation,
                       TaskGenerator::make(tasks, env_seed), env_config,
                       env_seed);
}

}  // namespace mrta
