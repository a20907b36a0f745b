#include "mrta/layout.hpp"

#include <charconv>
#include <sstream>
#include <utility>

#include "mrta/error.hpp"

namespace mrta {

GridLayout::GridLayout(int width, int height,
                       std::vector<std::uint8_t> obstacles,
                       std::vector<GaussianRegion> pickup,
                       std::vector<GaussianRegion> delivery)
    : width_(width),
      height_(height),
      diagonal_(std::sqrt(static_cast<double>(width) * width +
                          static_cast<double>(height) * height)),
      obstacles_(std::move(obstacles)),
      pickup_(std::move(pickup)),
      delivery_(std::move(delivery)) {
    if (width_ <= 0 || height_ <= 0)
        throw InvalidLayout("layout dimensions must be positive");
    if (obstacles_.size() != static_cast<std::size_t>(width_) * height_)
        throw InvalidLayout("obstacle mask size does not match dimensions");
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            if (obstacles_[static_cast<std::size_t>(y) * width_ + x] == 0)
                free_cells_.push_back({x, y});
    if (free_cells_.empty()) throw InvalidLayout("layout has no free cell");
    for (const auto& regions : {pickup_, delivery_}) {
        for (const GaussianRegion& r : regions) {
            if (!in_bounds(r.mean))
                throw InvalidLayout("region mean outside grid bounds");
            if (r.std_dev < 0.0)
                throw InvalidLayout("region std must be nonnegative");
        }
    }
}

std::string GridLayout::to_text() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(height_) * (width_ + 1) + 64);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x)
            out.push_back(is_free({x, y}) ? '.' : '#');
        out.push_back('\n');
    }
    if (!pickup_.empty() || !delivery_.empty()) {
        out.push_back('\n');
        std::ostringstream regions;
        for (const GaussianRegion& r : pickup_)
            regions << "pickup " << r.mean.x << ' ' << r.mean.y << ' '
                    << r.std_dev << '\n';
        for (const GaussianRegion& r : delivery_)
            regions << "delivery " << r.mean.x << ' ' << r.mean.y << ' '
                    << r.std_dev << '\n';
        out += regions.str();
    }
    return out;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    // A single trailing newline produces one empty tail entry; drop it.
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

GaussianRegion parse_region_line(std::string_view line,
                                 std::string_view keyword) {
    std::istringstream in{std::string(line.substr(keyword.size()))};
    int x = 0, y = 0;
    double std_dev = 0.0;
    if (!(in >> x >> y >> std_dev))
        throw ParseError("malformed region line: " + std::string(line));
    std::string extra;
    if (in >> extra)
        throw ParseError("trailing tokens on region line: " +
                         std::string(line));
    if (std_dev < 0.0)
        throw ParseError("region std must be nonnegative: " +
                         std::string(line));
    return GaussianRegion{{x, y}, std_dev};
}

}  // namespace

GridLayout load_layout(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t i = 0;
    std::vector<std::string_view> grid_lines;
    for (; i < lines.size() && !lines[i].empty(); ++i)
        grid_lines.push_back(lines[i]);
    if (grid_lines.empty()) throw ParseError("empty layout text");

    const std::size_t width = grid_lines.front().size();
    std::vector<std::uint8_t> obstacles;
    obstacles.reserve(width * grid_lines.size());
    for (std::string_view line : grid_lines) {
        if (line.size() != width)
            throw ParseError("non-rectangular grid: line length " +
                             std::to_string(line.size()) + " vs " +
                             std::to_string(width));
        for (char ch : line) {
            if (ch == '.')
                obstacles.push_back(0);
            else if (ch == '#')
                obstacles.push_back(1);
            else
                throw ParseError(std::string("unknown grid character '") + ch +
                                 "'");
        }
    }

    std::vector<GaussianRegion> pickup, delivery;
    if (i < lines.size()) {
        ++i;  // skip the blank separator
        for (; i < lines.size(); ++i) {
            std::string_view line = lines[i];
            if (line.empty()) continue;
            if (line.starts_with("pickup "))
                pickup.push_back(parse_region_line(line, "pickup "));
            else if (line.starts_with("delivery "))
                delivery.push_back(parse_region_line(line, "delivery "));
            else
                throw ParseError("unknown declaration line: " +
                                 std::string(line));
        }
    }

    return GridLayout(static_cast<int>(width),
                      static_cast<int>(grid_lines.size()),
                      std::move(obstacles), std::move(pickup),
                      std::move(delivery));
}

GridLayout generate_shelf_layout(int width, int height, int shelf_w,
                                 int shelf_h, int aisle) {
    if (aisle < 1) throw InvalidLayout("aisle width must be >= 1");
    if (shelf_w < 1 || shelf_h < 1)
        throw InvalidLayout("shelf dimensions must be >= 1");
    if (width <= 0 || height <= 0)
        throw InvalidLayout("layout dimensions must be positive");

    std::vector<std::uint8_t> obstacles(
        static_cast<std::size_t>(width) * height, 0);
    for (int y0 = aisle; y0 + shelf_h <= height - aisle; y0 += shelf_h + aisle)
        for (int x0 = aisle; x0 + shelf_w <= width - aisle;
             x0 += shelf_w + aisle)
            for (int y = y0; y < y0 + shelf_h; ++y)
                for (int x = x0; x < x0 + shelf_w; ++x)
                    obstacles[static_cast<std::size_t>(y) * width + x] = 1;
    return GridLayout(width, height, std::move(obstacles));
}

GridLayout generate_preset_layout(std::string_view name) {
    struct Preset {
        std::string_view name;
        int shelf_w, shelf_h, aisle;
    };
    // Shelf compactness per preset: A very low, B high, C low, D high, E low.
    static constexpr Preset presets[] = {
        {"A", 2, 4, 5}, {"B", 4, 10, 2}, {"C", 2, 8, 3},
        {"D", 6, 6, 2}, {"E", 3, 6, 3},
    };
    for (const Preset& p : presets) {
        if (p.name == name) {
            constexpr int kSize = 60;
            GridLayout grid =
                generate_shelf_layout(kSize, kSize, p.shelf_w, p.shelf_h,
                                      p.aisle);
            // Region means sit on the always-free border ring.
            std::vector<GaussianRegion> pickup{{{1, 15}, 2.0},
                                               {{1, 45}, 2.0}};
            std::vector<GaussianRegion> delivery{{{kSize - 2, 15}, 2.0},
                                                 {{kSize - 2, 45}, 2.0}};
            return GridLayout(kSize, kSize, grid.obstacles(),
                              std::move(pickup), std::move(delivery));
        }
    }
    throw InvalidLayout("unknown layout preset: " + std::string(name));
}

}  // namespace mrta
