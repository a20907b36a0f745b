#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrta/error.hpp"
#include "mrta/policy.hpp"

using namespace mrta;

namespace {

Observation make_obs(const std::vector<std::array<double, 3>>& robots,
                     const std::vector<std::array<double, 6>>& tasks,
                     int selected = 0) {
    Observation obs;
    obs.robot_features = robots;
    obs.task_features = tasks;
    obs.selected = selected;
    obs.selected_features = robots[selected];
    obs.diagonal = 1.0;
    for (const auto& t : tasks) obs.pickup_cost.push_back(t[4]);
    return obs;
}

Observation random_obs(Rng& rng, int n_robots, int n_tasks) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::vector<std::array<double, 3>> robots(n_robots);
    for (auto& r : robots)
        r = {uniform(rng), uniform(rng), uniform(rng)};
    std::vector<std::array<double, 6>> tasks(n_tasks);
    for (auto& t : tasks)
        t = {uniform(rng), uniform(rng), uniform(rng),
             uniform(rng), uniform(rng), uniform(rng)};
    std::uniform_int_distribution<int> sel(0, n_robots - 1);
    return make_obs(robots, tasks, sel(rng));
}

// Straight-line reimplementation of the architecture with plain loops; the
// production forward (kernels, shared buffers) is checked against this.
struct NaiveNet {
    const PolicyParams& p;

    std::vector<double> affine(Tensor wt, Tensor bt,
                               const std::vector<double>& x) const {
        const TensorShape& shape = PolicyParams::shape(wt);
        const double* w = p.tensor(wt);
        const double* b = p.tensor(bt);
        std::vector<double> y(shape.rows);
        for (int r = 0; r < shape.rows; ++r) {
            y[r] = b[r];
            for (int c = 0; c < shape.cols; ++c)
                y[r] += w[r * shape.cols + c] * x[c];
        }
        return y;
    }

    static std::vector<double> relu(std::vector<double> v) {
        for (double& x : v) x = std::max(0.0, x);
        return v;
    }

    std::vector<double> embed(bool robot, const std::vector<double>& f) const {
        const auto hidden =
            relu(affine(robot ? kWR1 : kWP1, robot ? kBR1 : kBP1, f));
        return affine(robot ? kWR2 : kWP2, robot ? kBR2 : kBP2, hidden);
    }

    double alpha(bool robot, const std::vector<double>& e) const {
        auto hidden = affine(robot ? kWR3 : kWP3, robot ? kBR3 : kBP3, e);
        for (double& x : hidden) x = std::tanh(x);
        const auto pre =
            affine(robot ? kWR4 : kWP4, robot ? kBR4 : kBP4, hidden);
        return 1.0 / (1.0 + std::exp(-pre[0]));
    }

    std::pair<std::vector<double>, double> run(const Observation& obs) const {
        std::vector<std::vector<double>> robot_embeds, task_embeds;
        for (const auto& f : obs.robot_features)
            robot_embeds.push_back(embed(true, {f.begin(), f.end()}));
        for (const auto& f : obs.task_features)
            task_embeds.push_back(embed(false, {f.begin(), f.end()}));

        std::vector<double> v(kGlobal, 0.0);
        for (std::size_t j = 0; j < robot_embeds.size(); ++j) {
            const double a = alpha(true, robot_embeds[j]);
            for (int i = 0; i < kEmbed; ++i) v[i] += a * robot_embeds[j][i];
        }
        for (std::size_t t = 0; t < task_embeds.size(); ++t) {
            const double a = alpha(false, task_embeds[t]);
            for (int i = 0; i < kEmbed; ++i)
                v[kEmbed + i] += a * task_embeds[t][i];
        }
        for (int i = 0; i < kEmbed; ++i)
            v[2 * kEmbed + i] = robot_embeds[obs.selected][i];

        std::vector<double> scores;
        for (const auto& e : task_embeds) {
            std::vector<double> u = v;
            u.insert(u.end(), e.begin(), e.end());
            const auto hidden = relu(affine(kW1, kB1, u));
            scores.push_back(affine(kW2, kB2, hidden)[0]);
        }
        const double shift = *std::max_element(scores.begin(), scores.end());
        double norm = 0.0;
        std::vector<double> probs(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            probs[i] = std::exp(scores[i] - shift);
            norm += probs[i];
        }
        for (double& x : probs) x /= norm;

        auto vh = affine(kWV1, kBV1, v);
        for (double& x : vh) x = std::tanh(x);
        const double value = affine(kWV2, kBV2, vh)[0];
        return {probs, value};
    }
};

}  // namespace

TEST_CASE("zero parameters produce zero embeddings and a uniform policy") {
    PolicyParams zero;
    std::array<double, kRobotFeat> rf{0.4, 0.2, 0.9};
    std::array<double, kEmbed> out{};
    robot_embedding(zero, rf, out);
    for (double x : out) CHECK(x == 0.0);

    std::array<double, kTaskFeat> tf{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    task_embedding(zero, tf, out);
    for (double x : out) CHECK(x == 0.0);

    CHECK(attention_scalar(zero, out, EmbedKind::Robot) == doctest::Approx(0.5));
    CHECK(attention_scalar(zero, out, EmbedKind::Task) == doctest::Approx(0.5));

    Rng rng = make_rng(61);
    for (int n_tasks : {1, 3, 10}) {
        const Observation obs = random_obs(rng, 4, n_tasks);
        ForwardTrace trace;
        const ForwardResult result = forward(zero, obs, trace);
        REQUIRE(static_cast<int>(result.dist.probabilities.size()) == n_tasks);
        for (double p : result.dist.probabilities)
            CHECK(p == doctest::Approx(1.0 / n_tasks));
        CHECK(result.value == doctest::Approx(0.0));
    }
}

TEST_CASE("forward matches a hand-computed toy fixture") {
    // Sparse weights small enough to evaluate by hand: the first embedding
    // coordinate carries the feature sum, everything else stays zero.
    PolicyParams p;
    for (int c = 0; c < kRobotFeat; ++c) p.tensor(kWR1)[c] = 1.0;
    p.tensor(kWR2)[0] = 1.0;                  // E_R[0] = sum(f)
    p.tensor(kWR2)[kEmbed] = -1.0;            // E_R[1] = -sum(f)
    for (int c = 0; c < kTaskFeat; ++c) p.tensor(kWP1)[c] = 1.0;
    p.tensor(kWP2)[0] = 1.0;                  // E_P[0] = sum(g)
    // Score head reads v_R[0] + E_task[0].
    p.tensor(kW1)[0] = 1.0;
    p.tensor(kW1)[48] = 1.0;
    p.tensor(kW2)[0] = 1.0;
    // Value head reads v_P[0] through one tanh unit, doubled plus 0.25.
    p.tensor(kWV1)[kEmbed] = 1.0;
    p.tensor(kWV2)[0] = 2.0;
    p.tensor(kBV2)[0] = 0.25;

    const Observation obs = make_obs({{0.1, 0.2, 0.3}},
                                     {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6},
                                      {0.2, 0.2, 0.2, 0.2, 0.2, 0.2}});
    ForwardTrace trace;
    const ForwardResult result = forward(p, obs, trace);

    // By hand: E_R = [0.6, -0.6, ...], alphas are all 0.5, E_P = [2.1, 1.2],
    // v_R[0] = 0.3, v_P[0] = 1.65, scores = [2.4, 1.5],
    // probs = sigmoid(+-0.9), value = 2 tanh(1.65) + 0.25.
    CHECK(result.dist.logits[0] == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(result.dist.logits[1] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(result.dist.probabilities[0] ==
          doctest::Approx(0.710949502625004).epsilon(1e-9));
    CHECK(result.dist.probabilities[1] ==
          doctest::Approx(0.289050497374996).epsilon(1e-9));
    CHECK(result.value ==
          doctest::Approx(2.0 * std::tanh(1.65) + 0.25).epsilon(1e-12));
}

TEST_CASE("forward agrees with the naive reimplementation") {
    Rng rng = make_rng(62);
    ForwardTrace trace;
    for (int trial = 0; trial < 25; ++trial) {
        const PolicyParams p = PolicyParams::random_init(trial + 100);
        const Observation obs = random_obs(rng, 1 + trial % 7, 1 + trial % 5);
        const ForwardResult fast = forward(p, obs, trace);
        const auto [probs, value] = NaiveNet{p}.run(obs);
        REQUIRE(fast.dist.probabilities.size() == probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i)
            CHECK(fast.dist.probabilities[i] ==
                  doctest::Approx(probs[i]).epsilon(1e-10));
        CHECK(fast.value == doctest::Approx(value).epsilon(1e-10));
    }
}

TEST_CASE("global_state pools embeddings permutation-invariantly") {
    PolicyParams p = PolicyParams::random_init(63);
    // Force the robot attention scalar to ~1 to check v_R = E for one robot.
    p.tensor(kBR4)[0] = 50.0;
    const Observation single = make_obs({{0.3, 0.1, 0.0}}, {{0.1, 0.2, 0.3,
                                                             0.4, 0.5, 0.6}});
    const GlobalState state = global_state(p, single);
    std::array<double, kEmbed> embed{};
    robot_embedding(p, std::span<const double, 3>(single.robot_features[0]),
                    embed);
    for (int i = 0; i < kEmbed; ++i)
        CHECK(state.v[i] == doctest::Approx(embed[i]).epsilon(1e-9));
    REQUIRE(state.task_embeddings.size() == 1);
}

TEST_CASE("permutation invariance and equivariance") {
    Rng rng = make_rng(64);
    std::uniform_int_distribution<int> robot_count(2, 8);
    std::uniform_int_distribution<int> task_count(2, 10);
    ForwardTrace trace;
    for (int trial = 0; trial < 100; ++trial) {
        const PolicyParams p = PolicyParams::random_init(trial + 500);
        Observation obs = random_obs(rng, robot_count(rng), task_count(rng));
        const ForwardResult base = forward(p, obs, trace);

        // Shuffle robots, tracking the selected robot's new slot.
        Observation shuffled = obs;
        std::vector<int> perm(obs.n_robots());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int j = 0; j < obs.n_robots(); ++j) {
            shuffled.robot_features[j] = obs.robot_features[perm[j]];
            if (perm[j] == obs.selected) shuffled.selected = j;
        }
        shuffled.selected_features =
            shuffled.robot_features[shuffled.selected];
        const ForwardResult robot_perm = forward(p, shuffled, trace);
        for (int i = 0; i < obs.n_tasks(); ++i)
            CHECK(robot_perm.dist.probabilities[i] ==
                  doctest::Approx(base.dist.probabilities[i]).epsilon(1e-9));
        CHECK(robot_perm.value == doctest::Approx(base.value).epsilon(1e-9));

        // Shuffle tasks: probabilities must follow the permutation.
        Observation tasks_shuffled = obs;
        std::vector<int> tperm(obs.n_tasks());
        std::iota(tperm.begin(), tperm.end(), 0);
        std::shuffle(tperm.begin(), tperm.end(), rng);
        for (int i = 0; i < obs.n_tasks(); ++i)
            tasks_shuffled.task_features[i] = obs.task_features[tperm[i]];
        const ForwardResult task_perm = forward(p, tasks_shuffled, trace);
        for (int i = 0; i < obs.n_tasks(); ++i)
            CHECK(task_perm.dist.probabilities[i] ==
                  doctest::Approx(base.dist.probabilities[tperm[i]])
                      .epsilon(1e-9));
    }
}

TEST_CASE("probabilities always form a distribution") {
    Rng rng = make_rng(65);
    ForwardTrace trace;
    for (int trial = 0; trial < 1000; ++trial) {
        const PolicyParams p = PolicyParams::random_init(trial);
        const Observation obs = random_obs(rng, 1 + trial % 6, 1 + trial % 9);
        const ForwardResult result = forward(p, obs, trace);
        double sum = 0.0;
        for (double x : result.dist.probabilities) {
            CHECK(x >= 0.0);
            CHECK(std::isfinite(x));
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
    }
}

TEST_CASE("duplicate task rows get equal probabilities") {
    const PolicyParams p = PolicyParams::random_init(66);
    const std::array<double, 6> row{0.1, 0.9, 0.4, 0.3, 0.2, 0.7};
    const Observation obs = make_obs({{0.5, 0.5, 0.0}}, {row, row, row});
    ForwardTrace trace;
    const ForwardResult result = forward(p, obs, trace);
    CHECK(result.dist.probabilities[0] ==
          doctest::Approx(result.dist.probabilities[1]).epsilon(1e-12));
    CHECK(result.dist.probabilities[1] ==
          doctest::Approx(result.dist.probabilities[2]).epsilon(1e-12));
}

TEST_CASE("parameter count is independent of entity counts") {
    const PolicyParams p = PolicyParams::random_init(67);
    Rng rng = make_rng(67);
    ForwardTrace trace;
    forward(p, random_obs(rng, 2, 3), trace);
    forward(p, random_obs(rng, 500, 40), trace);
    CHECK(PolicyParams::total_size() == p.flat().size());
    // 2628 doubles: every matrix and bias of the twelve layers.
    CHECK(PolicyParams::total_size() == 2628);
}

TEST_CASE("select_action argmax and sampling") {
    ActionDistribution dist{{0.1, 0.7, 0.2}, {}};
    CHECK(select_action(dist, SelectMode::Argmax, nullptr) == 1);
    ActionDistribution tie{{0.5, 0.5}, {}};
    CHECK(select_action(tie, SelectMode::Argmax, nullptr) == 0);

    Rng a = make_rng(68);
    Rng b = make_rng(68);
    std::vector<int> draws_a, draws_b;
    int ones = 0;
    for (int i = 0; i < 2000; ++i) {
        const int d = select_action(dist, SelectMode::Sample, &a);
        draws_a.push_back(d);
        draws_b.push_back(select_action(dist, SelectMode::Sample, &b));
        ones += d == 1;
    }
    CHECK(draws_a == draws_b);  // seeded sampling is reproducible
    CHECK(ones > 1250);         // ~0.7 of 2000
    CHECK(ones < 1550);
}

TEST_CASE("mpdm picks the nearest origin") {
    // Greedy trace, state S2: selected at (0,0), origins (2,9) and (2,4).
    Observation s2 = make_obs({{0.0, 0.0, 0.0}},
                              {{0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}});
    s2.pickup_cost = {9.220, 4.472};
    CHECK(mpdm(s2) == 1);

    // Greedy S3: selected at (3,2), origins (2,9) and (0,5).
    Observation s3 = make_obs({{0.0, 0.0, 0.0}},
                              {{0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}});
    s3.pickup_cost = {7.071, 4.243};
    CHECK(mpdm(s3) == 1);

    Observation single = make_obs({{0.0, 0.0, 0.0}}, {{0, 0, 0, 0, 0, 0}});
    single.pickup_cost = {3.0};
    CHECK(mpdm(single) == 0);

    // Brute-force equivalence on random pickup vectors.
    Rng rng = make_rng(69);
    std::uniform_real_distribution<double> uniform(0.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        Observation obs = make_obs({{0.0, 0.0, 0.0}},
                                   {{0, 0, 0, 0, 0, 0}});
        obs.task_features.resize(1 + trial % 10, {0, 0, 0, 0, 0, 0});
        obs.pickup_cost.resize(obs.task_features.size());
        for (double& k : obs.pickup_cost) k = uniform(rng);
        const int got = mpdm(obs);
        for (double k : obs.pickup_cost) CHECK(obs.pickup_cost[got] <= k);
    }
}

namespace {

Observation rbts_obs(Cell selected_pos, Cell other_pos,
                     const std::vector<Cell>& origins) {
    Observation obs;
    obs.selected = 0;
    obs.diagonal = std::sqrt(200.0);
    obs.robot_positions = {selected_pos, other_pos};
    obs.robot_features = {{selected_pos.x / 10.0, selected_pos.y / 10.0, 0.0},
                          {other_pos.x / 10.0, other_pos.y / 10.0, 0.0}};
    obs.selected_features = obs.robot_features[0];
    for (const Cell origin : origins) {
        obs.task_origins.push_back(origin);
        obs.pickup_cost.push_back(direct_distance(selected_pos, origin));
        obs.task_features.push_back({});
    }
    return obs;
}

}  // namespace

TEST_CASE("rbts reproduces the reference regret arithmetic") {
    const CostProvider provider = CostProvider::direct();

    // S0: selected (2,2), other (6,2); regrets 1.062 and 0 -> first task.
    const Observation s0 = rbts_obs({2, 2}, {6, 2}, {{2, 9}, {4, 4}});
    const std::vector<RobotState> r0{{{2, 2}, 0.0}, {{6, 2}, 2.0}};
    CHECK(rbts(s0, r0, provider) == 0);

    // S1: selected (6,2), other (5,5); regrets -1.414 and -3.123 -> first.
    const Observation s1 = rbts_obs({6, 2}, {5, 5}, {{4, 4}, {5, 6}});
    const std::vector<RobotState> r1{{{6, 2}, 0.0}, {{5, 5}, 10.0}};
    CHECK(rbts(s1, r1, provider) == 0);

    // S3: selected (5,5), other (1,2); regrets 4.657 and -1.838 -> first.
    const Observation s3 = rbts_obs({5, 5}, {1, 2}, {{5, 6}, {0, 5}});
    const std::vector<RobotState> r3{{{5, 5}, 0.0}, {{1, 2}, 5.2}};
    CHECK(rbts(s3, r3, provider) == 0);

    // Single robot falls back to the greedy rule.
    Observation solo = rbts_obs({2, 2}, {2, 2}, {{2, 9}, {4, 4}});
    const std::vector<RobotState> r_solo{{{2, 2}, 0.0}};
    CHECK(rbts(solo, r_solo, provider) == mpdm(solo));
}
