#include "mrta/tasking.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mrta/error.hpp"

namespace mrta {

namespace {
constexpr int kRejectionBudget = 1000;
}

TaskQueue::TaskQueue(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw InvalidConfig("queue capacity must be >= 1");
    tasks_.reserve(capacity);
}

Task TaskQueue::consume(int index) {
    if (index < 0 || index >= size())
        throw InvalidAction("task index " + std::to_string(index) +
                            " out of range for queue of size " +
                            std::to_string(size()));
    Task task = tasks_[index];
    tasks_.erase(tasks_.begin() + index);
    return task;
}

void TaskQueue::push(Task task) {
    if (full())
        throw InvalidAction("push onto a full queue (capacity " +
                            std::to_string(capacity_) + ")");
    tasks_.push_back(task);
}

Task sample_task_random(const GridLayout& layout, const CostProvider& provider,
                        Rng& rng) {
    const auto& free = layout.free_cells();
    if (free.size() < 2)
        throw GenerationError("need at least two free cells to sample a task");
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
        const Cell origin = free[pick(rng)];
        const Cell destination = free[pick(rng)];
        if (origin == destination) continue;
        if (!provider.reachable(origin, destination)) continue;
        return Task{origin, destination, provider.cost(origin, destination)};
    }
    throw GenerationError("no reachable origin/destination pair found after " +
                          std::to_string(kRejectionBudget) + " attempts");
}

namespace {

// One rounded Gaussian cell draw from a uniformly chosen region; nullopt
// when the draw lands on a blocked or out-of-bounds cell.
std::optional<Cell> draw_region_cell(const GridLayout& layout,
                                     const std::vector<GaussianRegion>& regions,
                                     Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, regions.size() - 1);
    const GaussianRegion& region = regions[pick(rng)];
    double x = region.mean.x;
    double y = region.mean.y;
    if (region.std_dev > 0.0) {
        std::normal_distribution<double> gx(region.mean.x, region.std_dev);
        std::normal_distribution<double> gy(region.mean.y, region.std_dev);
        x = gx(rng);
        y = gy(rng);
    }
    const Cell cell{static_cast<int>(std::lround(x)),
                    static_cast<int>(std::lround(y))};
    if (!layout.is_free(cell)) return std::nullopt;
    return cell;
}

}  // namespace

Task sample_task_designated(const GridLayout& layout,
                            const CostProvider& provider, Rng& rng) {
    if (layout.pickup_regions().empty() || layout.delivery_regions().empty())
        throw GenerationError(
            "designated sampling needs at least one pickup and one delivery "
            "region");
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
        const auto origin =
            draw_region_cell(layout, layout.pickup_regions(), rng);
        if (!origin) continue;
        const auto destination =
            draw_region_cell(layout, layout.delivery_regions(), rng);
        if (!destination) continue;
        if (!provider.reachable(*origin, *destination)) continue;
        return Task{*origin, *destination,
                    provider.cost(*origin, *destination)};
    }
    throw GenerationError("designated sampling exhausted " +
                          std::to_string(kRejectionBudget) + " attempts");
}

TaskGenerator TaskGenerator::random(std::uint64_t seed) {
    TaskGenerator gen(TaskGenMode::Random);
    gen.rng_ = make_rng(seed, /*stream=*/1);
    return gen;
}

TaskGenerator TaskGenerator::designated(std::uint64_t seed) {
    TaskGenerator gen(TaskGenMode::Designated);
    gen.rng_ = make_rng(seed, /*stream=*/1);
    return gen;
}

TaskGenerator TaskGenerator::two_task() {
    return TaskGenerator(TaskGenMode::TwoTask);
}

TaskGenerator TaskGenerator::scripted(std::vector<Task> tasks) {
    TaskGenerator gen(TaskGenMode::Scripted);
    gen.script_ = std::move(tasks);
    return gen;
}

TaskGenerator TaskGenerator::make(TaskGenMode mode, std::uint64_t seed) {
    switch (mode) {
        case TaskGenMode::Random:
            return random(seed);
        case TaskGenMode::Designated:
            return designated(seed);
        case TaskGenMode::TwoTask:
            return two_task();
        case TaskGenMode::Scripted:
            break;
    }
    throw InvalidConfig("scripted generators are built from an explicit task list");
}

Task TaskGenerator::stamp(Task task) {
    task.id = ++serial_;
    return task;
}

std::optional<Task> TaskGenerator::next(const GridLayout& layout,
                                        const CostProvider& provider,
                                        const TaskQueue& queue) {
    switch (mode_) {
        case TaskGenMode::Random:
            return stamp(sample_task_random(layout, provider, rng_));
        case TaskGenMode::Designated:
            return stamp(sample_task_designated(layout, provider, rng_));
        case TaskGenMode::TwoTask: {
            // Replenish whichever of the two fixed tasks is missing.
            bool has_short = false;
            for (const Task& t : queue.tasks())
                has_short |= t.destination == kTwoTaskShortDest;
            const Cell dest = has_short ? kTwoTaskLongDest : kTwoTaskShortDest;
            return stamp(Task{kTwoTaskOrigin, dest,
                              provider.cost(kTwoTaskOrigin, dest)});
        }
        case TaskGenMode::Scripted:
            if (cursor_ >= script_.size()) return std::nullopt;
            return script_[cursor_++];
    }
    throw InvalidConfig("unknown task generation mode");
}

void TaskGenerator::fill(const GridLayout& layout, const CostProvider& provider,
                         TaskQueue& queue) {
    while (!queue.full()) {
        auto task = next(layout, provider, queue);
        if (!task) break;
        queue.push(*task);
    }
}

void refill_queue(TaskQueue& queue, TaskGenerator& gen,
                  const GridLayout& layout, const CostProvider& provider) {
    if (queue.full())
        throw InvalidAction("refill requires exactly one consumed task");
    if (queue.size() != queue.capacity() - 1 &&
        gen.mode() != TaskGenMode::Scripted)
        throw InvalidAction("refill requires exactly one consumed task");
    auto task = gen.next(layout, provider, queue);
    if (task) queue.push(*task);
}

}  // namespace mrta
