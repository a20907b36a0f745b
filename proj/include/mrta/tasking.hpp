#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mrta/layout.hpp"
#include "mrta/navigation.hpp"
#include "mrta/rng.hpp"

namespace mrta {

// Pickup/delivery job. `length` is cost(origin, destination) under the
// provider active when the task was created; `id` is a 1-based creation
// serial used by replay output.
struct Task {
    Cell origin;
    Cell destination;
    double length = 0.0;
    std::int64_t id = 0;
};

// Fixed-capacity candidate list visible to the policy. Generator-backed
// queues hold exactly `capacity` tasks at every decision point; scripted
// queues drain once their task list is exhausted.
class TaskQueue {
public:
    explicit TaskQueue(int capacity);

    int capacity() const { return capacity_; }
    int size() const { return static_cast<int>(tasks_.size()); }
    bool full() const { return size() == capacity_; }
    const Task& operator[](int i) const { return tasks_[i]; }
    const std::vector<Task>& tasks() const { return tasks_; }

    // Removes and returns the task at `index`; throws InvalidAction when the
    // index does not address a queued task.
    Task consume(int index);
    // Appends at the tail; throws InvalidAction when already full.
    void push(Task task);

private:
    std::vector<Task> tasks_;
    int capacity_;
};

enum class TaskGenMode { Random, Designated, TwoTask, Scripted };

// Origin uniform over free cells, destination uniform over the remaining
// free cells, resampled until the pair is reachable under `provider`.
// Throws GenerationError when the retry budget runs out (or fewer than two
// free cells exist).
Task sample_task_random(const GridLayout& layout, const CostProvider& provider,
                        Rng& rng);

// Origin from a uniformly chosen pickup region, destination from a delivery
// region; per-axis Gaussian draws rounded to the nearest cell, rejected when
// blocked, out of bounds, or unreachable.
Task sample_task_designated(const GridLayout& layout,
                            const CostProvider& provider, Rng& rng);

// Task source for one environment instance. Holds its own RNG stream; the
// produced sequence depends only on the seed, never on which tasks the
// policy consumed (TwoTask aside, where replenishment is defined by the
// queue contents).
class TaskGenerator {
public:
    static TaskGenerator random(std::uint64_t seed);
    static TaskGenerator designated(std::uint64_t seed);
    // Alternates between task A (0,0)->(3,3) and task B (0,0)->(9,9); the
    // queue (capacity 2) always holds one of each.
    static TaskGenerator two_task();
    // Emits `tasks` in order, then stops producing.
    static TaskGenerator scripted(std::vector<Task> tasks);

    static TaskGenerator make(TaskGenMode mode, std::uint64_t seed);

    TaskGenMode mode() const { return mode_; }

    // The next task to add given the current queue contents, or nullopt when
    // a scripted list is exhausted.
    std::optional<Task> next(const GridLayout& layout,
                             const CostProvider& provider,
                             const TaskQueue& queue);
    // Fills an empty queue to capacity.
    void fill(const GridLayout& layout, const CostProvider& provider,
              TaskQueue& queue);

private:
    explicit TaskGenerator(TaskGenMode mode) : mode_(mode) {}

    Task stamp(Task task);

    TaskGenMode mode_;
    Rng rng_{};
    std::vector<Task> script_;
    std::size_t cursor_ = 0;
    std::int64_t serial_ = 0;
};

// Restores the size-equals-capacity invariant after one task was consumed.
// Throws InvalidAction when nothing was consumed (queue already full);
// propagates GenerationError. Scripted exhaustion leaves the queue short.
void refill_queue(TaskQueue& queue, TaskGenerator& gen,
                  const GridLayout& layout, const CostProvider& provider);

// TwoTask constants.
inline constexpr Cell kTwoTaskOrigin{0, 0};
inline constexpr Cell kTwoTaskShortDest{3, 3};
inline constexpr Cell kTwoTaskLongDest{9, 9};

}  // namespace mrta
