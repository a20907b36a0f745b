#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mrta {

struct Cell {
    int x = 0;
    int y = 0;
    auto operator<=>(const Cell&) const = default;
};

// Isotropic Gaussian pickup/delivery region. std_dev 0 collapses sampling
// onto the mean cell.
struct GaussianRegion {
    Cell mean;
    double std_dev = 1.0;
};

// Immutable occupancy grid plus task-region descriptors. Safe to share
// across concurrent readers once constructed.
class GridLayout {
public:
    GridLayout(int width, int height, std::vector<std::uint8_t> obstacles,
               std::vector<GaussianRegion> pickup = {},
               std::vector<GaussianRegion> delivery = {});

    int width() const { return width_; }
    int height() const { return height_; }
    double diagonal() const { return diagonal_; }

    bool in_bounds(Cell c) const {
        return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
    }
    // False for out-of-bounds cells rather than an error.
    bool is_free(Cell c) const {
        return in_bounds(c) && obstacles_[index(c)] == 0;
    }
    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.y) * width_ + c.x;
    }

    const std::vector<std::uint8_t>& obstacles() const { return obstacles_; }
    const std::vector<Cell>& free_cells() const { return free_cells_; }
    const std::vector<GaussianRegion>& pickup_regions() const {
        return pickup_;
    }
    const std::vector<GaussianRegion>& delivery_regions() const {
        return delivery_;
    }

    // Serializes back to the layout-file format; load_layout(to_text(L))
    // reproduces L.
    std::string to_text() const;

private:
    int width_;
    int height_;
    double diagonal_;
    std::vector<std::uint8_t> obstacles_;
    std::vector<Cell> free_cells_;
    std::vector<GaussianRegion> pickup_;
    std::vector<GaussianRegion> delivery_;
};

inline bool is_free(const GridLayout& layout, Cell c) {
    return layout.is_free(c);
}

// Parses the layout-file format: lines of '.' (free) and '#' (obstacle),
// then optionally a blank line followed by region lines
//   pickup <x> <y> <std>
//   delivery <x> <y> <std>
// Throws ParseError on malformed text, InvalidLayout when no free cell
// remains or a region mean is out of bounds.
GridLayout load_layout(std::string_view text);

// Tiles the interior with shelf_w x shelf_h obstacle blocks separated by
// aisle-wide corridors in both axes; the border ring (aisle wide) is free.
GridLayout generate_shelf_layout(int width, int height, int shelf_w,
                                 int shelf_h, int aisle);

// Named 60x60 presets "A".."E" spanning low-to-high shelf compactness, with
// pickup regions on the left border and delivery regions on the right so the
// designated task scheme works out of the box.
GridLayout generate_preset_layout(std::string_view name);

}  // namespace mrta
