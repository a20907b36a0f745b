#pragma once

#include <vector>

#include "mrta/layout.hpp"

namespace mrta {

enum class NavScheme { Direct, AStar };

// Route between two cells. Grid paths list every visited cell (consecutive
// entries 4-adjacent) and length counts unit moves; direct paths hold the
// two endpoints and the Euclidean distance. Robots move 1 cell per second,
// so length doubles as travel time.
struct Path {
    std::vector<Cell> cells;
    double length = 0.0;
};

double direct_distance(Cell a, Cell b);

// Minimal-move path over 4-connected free cells, Manhattan heuristic,
// open-list ties broken by smaller heuristic then insertion order so the
// returned path is deterministic. Throws InvalidEndpoint for blocked or
// out-of-bounds endpoints, Unreachable when no route exists.
Path astar_shortest_path(const GridLayout& layout, Cell a, Cell b);

// Uniform travel-cost interface over the two schemes. The reward, the task
// features and the baselines all price movement through this one object.
// AStar providers borrow the layout, which must outlive them.
class CostProvider {
public:
    static CostProvider direct() { return CostProvider(NavScheme::Direct, nullptr); }
    static CostProvider astar(const GridLayout& layout) {
        return CostProvider(NavScheme::AStar, &layout);
    }

    NavScheme scheme() const { return scheme_; }

    // Travel time in seconds; propagates InvalidEndpoint/Unreachable for the
    // grid scheme.
    double cost(Cell a, Cell b) const;
    Path path(Cell a, Cell b) const;
    // True when cost(a, b) is computable (no-throw reachability probe).
    bool reachable(Cell a, Cell b) const;

private:
    CostProvider(NavScheme scheme, const GridLayout* layout)
        : scheme_(scheme), layout_(layout) {}

    NavScheme scheme_;
    const GridLayout* layout_;
};

}  // namespace mrta
