#include "mrta/navigation.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <queue>
#include <string>

#include "mrta/error.hpp"

namespace mrta {

double direct_distance(Cell a, Cell b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

namespace {

int manhattan(Cell a, Cell b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

struct OpenEntry {
    int f;
    int h;
    std::uint64_t seq;  // insertion order, final tie-break
    int cell;
};

struct OpenOrder {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        if (a.h != b.h) return a.h > b.h;
        return a.seq > b.seq;
    }
};

std::string cell_str(Cell c) {
    return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

}  // namespace

Path astar_shortest_path(const GridLayout& layout, Cell a, Cell b) {
    if (!layout.is_free(a))
        throw InvalidEndpoint("start cell " + cell_str(a) +
                              " is blocked or out of bounds");
    if (!layout.is_free(b))
        throw InvalidEndpoint("goal cell " + cell_str(b) +
                              " is blocked or out of bounds");

    const int w = layout.width();
    const int h = layout.height();
    const int n = w * h;
    constexpr int kUnvisited = std::numeric_limits<int>::max();
    std::vector<int> dist(n, kUnvisited);
    std::vector<int> parent(n, -1);

    std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
    std::uint64_t seq = 0;
    const int start = static_cast<int>(layout.index(a));
    const int goal = static_cast<int>(layout.index(b));
    dist[start] = 0;
    open.push({manhattan(a, b), manhattan(a, b), seq++, start});

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        const int cur = top.cell;
        const Cell cc{cur % w, cur / w};
        const int g = dist[cur];
        if (top.f > g + top.h) continue;  // stale entry
        if (cur == goal) break;
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const Cell nc{cc.x + dx[k], cc.y + dy[k]};
            if (!layout.is_free(nc)) continue;
            const int ni = static_cast<int>(layout.index(nc));
            if (g + 1 < dist[ni]) {
                dist[ni] = g + 1;
                parent[ni] = cur;
                const int hh = manhattan(nc, b);
                open.push({g + 1 + hh, hh, seq++, ni});
            }
        }
    }

    if (dist[goal] == kUnvisited)
        throw Unreachable("no route from " + cell_str(a) + " to " +
                          cell_str(b));

    Path path;
    path.length = dist[goal];
    for (int cur = goal; cur != -1; cur = parent[cur])
        path.cells.push_back({cur % w, cur / w});
    std::reverse(path.cells.begin(), path.cells.end());
    return path;
}

double CostProvider::cost(Cell a, Cell b) const {
    if (scheme_ == NavScheme::Direct) return direct_distance(a, b);
    if (a == b) {
        if (!layout_->is_free(a))
            throw InvalidEndpoint("cell " + cell_str(a) +
                                  " is blocked or out of bounds");
        return 0.0;
    }
    return astar_shortest_path(*layout_, a, b).length;
}

Path CostProvider::path(Cell a, Cell b) const {
    if (scheme_ == NavScheme::Direct)
        return Path{{a, b}, direct_distance(a, b)};
    return astar_shortest_path(*layout_, a, b);
}

bool CostProvider::reachable(Cell a, Cell b) const {
    if (scheme_ == NavScheme::Direct) return true;
    try {
        cost(a, b);
        return true;
    } catch (const Unreachable&) {
        return false;
    } catch (const InvalidEndpoint&) {
        return false;
    }
}

}  // namespace mrta
