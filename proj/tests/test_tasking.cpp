#include <doctest.h>

#include <cmath>
#include <map>

#include "mrta/error.hpp"
#include "mrta/tasking.hpp"

using namespace mrta;

namespace {

GridLayout open_grid(int w, int h) {
    return GridLayout(w, h,
                      std::vector<std::uint8_t>(
                          static_cast<std::size_t>(w) * h, 0));
}

}  // namespace

TEST_CASE("queue consume and push maintain order") {
    TaskQueue queue(3);
    queue.push({{0, 0}, {1, 1}, 1.0, 1});
    queue.push({{2, 2}, {3, 3}, 1.0, 2});
    queue.push({{4, 4}, {5, 5}, 1.0, 3});
    CHECK(queue.full());
    const Task taken = queue.consume(1);
    CHECK(taken.id == 2);
    CHECK(queue.size() == 2);
    CHECK(queue[0].id == 1);
    CHECK(queue[1].id == 3);
    queue.push({{6, 6}, {7, 7}, 1.0, 4});
    CHECK(queue[2].id == 4);  // appended at the tail
    CHECK_THROWS_AS(queue.consume(3), InvalidAction);
    CHECK_THROWS_AS(queue.push({{0, 0}, {1, 1}, 1.0, 5}), InvalidAction);
    CHECK_THROWS_AS(TaskQueue(0), InvalidConfig);
}

TEST_CASE("random sampling on a two-cell strip") {
    const GridLayout layout = open_grid(2, 1);
    const CostProvider provider = CostProvider::direct();
    Rng rng = make_rng(41);
    for (int i = 0; i < 20; ++i) {
        const Task task = sample_task_random(layout, provider, rng);
        const bool forward =
            task.origin == Cell{0, 0} && task.destination == Cell{1, 0};
        const bool backward =
            task.origin == Cell{1, 0} && task.destination == Cell{0, 0};
        CHECK((forward || backward));
        CHECK(task.length == doctest::Approx(1.0));
    }
}

TEST_CASE("random sampling is uniform over free cells") {
    const GridLayout layout = open_grid(10, 10);
    const CostProvider provider = CostProvider::direct();
    Rng rng = make_rng(42);
    std::map<std::pair<int, int>, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const Task task = sample_task_random(layout, provider, rng);
        counts[{task.origin.x, task.origin.y}]++;
    }
    // Binomial(n, 1/100): every per-cell count within 3 sigma of np for this
    // fixed seed.
    const double expected = n / 100.0;
    const double sigma = std::sqrt(n * (1.0 / 100.0) * (99.0 / 100.0));
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x)
            CHECK(std::abs(counts[{x, y}] - expected) <= 3.0 * sigma);
}

TEST_CASE("random sampling fails without two free cells") {
    const GridLayout layout = load_layout(".#\n##");
    const CostProvider provider = CostProvider::direct();
    Rng rng = make_rng(43);
    CHECK_THROWS_AS(sample_task_random(layout, provider, rng),
                    GenerationError);
}

TEST_CASE("random sampling respects grid reachability") {
    const GridLayout split = load_layout(".#.\n.#.\n.#.");
    const CostProvider provider = CostProvider::astar(split);
    Rng rng = make_rng(44);
    for (int i = 0; i < 50; ++i) {
        const Task task = sample_task_random(split, provider, rng);
        // Components are single columns, so a reachable pair shares x.
        CHECK(task.origin.x == task.destination.x);
    }
}

TEST_CASE("designated sampling collapses at zero std") {
    GridLayout layout(21, 21,
                      std::vector<std::uint8_t>(21 * 21, 0),
                      {{{10, 10}, 0.0}}, {{{5, 5}, 0.0}});
    const CostProvider provider = CostProvider::direct();
    Rng rng = make_rng(45);
    const Task task = sample_task_designated(layout, provider, rng);
    CHECK(task.origin == Cell{10, 10});
    CHECK(task.destination == Cell{5, 5});
}

TEST_CASE("designated sampling centers on the region mean") {
    GridLayout layout(21, 21,
                      std::vector<std::uint8_t>(21 * 21, 0),
                      {{{10, 10}, 2.0}}, {{{10, 10}, 2.0}});
    const CostProvider provider = CostProvider::direct();
    Rng rng = make_rng(46);
    double sum_x = 0.0, sum_y = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const Task task = sample_task_designated(layout, provider, rng);
        sum_x += task.origin.x;
        sum_y += task.origin.y;
    }
    CHECK(std::abs(sum_x / n - 10.0) < 0.2);
    CHECK(std::abs(sum_y / n - 10.0) < 0.2);
}

TEST_CASE("designated sampling errors on a blocked region") {
    // The pickup mean sits on the single obstacle; std 0 never escapes it.
    GridLayout layout = GridLayout(3, 3,
                                   {0, 0, 0, 0, 1, 0, 0, 0, 0},
                                   {{{1, 1}, 0.0}}, {{{0, 0}, 0.0}});
    const CostProvider provider = CostProvider::direct();
    Rng rng = make_rng(47);
    CHECK_THROWS_AS(sample_task_designated(layout, provider, rng),
                    GenerationError);

    GridLayout no_regions = GridLayout(3, 3, std::vector<std::uint8_t>(9, 0));
    CHECK_THROWS_AS(sample_task_designated(no_regions, provider, rng),
                    GenerationError);
}

TEST_CASE("two-task generator keeps one of each in the queue") {
    const GridLayout layout = open_grid(10, 10);
    const CostProvider provider = CostProvider::direct();
    TaskGenerator gen = TaskGenerator::two_task();
    TaskQueue queue(2);
    gen.fill(layout, provider, queue);

    REQUIRE(queue.size() == 2);
    CHECK(queue[0].origin == kTwoTaskOrigin);
    CHECK(queue[0].destination == kTwoTaskShortDest);
    CHECK(queue[1].destination == kTwoTaskLongDest);
    CHECK(queue[0].length == doctest::Approx(4.243).epsilon(1e-3));
    CHECK(queue[1].length == doctest::Approx(12.728).epsilon(1e-3));

    // Consume the short task: the refill restores one of each.
    queue.consume(0);
    refill_queue(queue, gen, layout, provider);
    REQUIRE(queue.size() == 2);
    CHECK(queue[0].destination == kTwoTaskLongDest);
    CHECK(queue[1].destination == kTwoTaskShortDest);

    // Consume the long task: same invariant.
    queue.consume(0);
    refill_queue(queue, gen, layout, provider);
    REQUIRE(queue.size() == 2);
    CHECK(queue[0].destination == kTwoTaskShortDest);
    CHECK(queue[1].destination == kTwoTaskLongDest);
}

TEST_CASE("refill restores capacity and rejects a full queue") {
    const GridLayout layout = open_grid(10, 10);
    const CostProvider provider = CostProvider::direct();
    TaskGenerator gen = TaskGenerator::random(9);
    TaskQueue queue(10);
    gen.fill(layout, provider, queue);
    CHECK(queue.size() == 10);
    queue.consume(4);
    refill_queue(queue, gen, layout, provider);
    CHECK(queue.size() == 10);
    CHECK_THROWS_AS(refill_queue(queue, gen, layout, provider), InvalidAction);
}

TEST_CASE("same seed reproduces the task sequence exactly") {
    const GridLayout layout = open_grid(10, 10);
    const CostProvider provider = CostProvider::direct();
    TaskGenerator a = TaskGenerator::random(123);
    TaskGenerator b = TaskGenerator::random(123);
    TaskQueue qa(1), qb(1);
    for (int i = 0; i < 200; ++i) {
        const Task ta = *a.next(layout, provider, qa);
        const Task tb = *b.next(layout, provider, qb);
        CHECK(ta.origin == tb.origin);
        CHECK(ta.destination == tb.destination);
        CHECK(ta.length == tb.length);
    }
}

TEST_CASE("scripted generators drain in order") {
    const GridLayout layout = open_grid(10, 10);
    const CostProvider provider = CostProvider::direct();
    std::vector<Task> tasks{{{0, 0}, {1, 1}, 0.0, 1}, {{2, 2}, {3, 3}, 0.0, 2}};
    TaskGenerator gen = TaskGenerator::scripted(tasks);
    TaskQueue queue(1);
    CHECK(gen.next(layout, provider, queue)->id == 1);
    CHECK(gen.next(layout, provider, queue)->id == 2);
    CHECK_FALSE(gen.next(layout, provider, queue).has_value());
}
