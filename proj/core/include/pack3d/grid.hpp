#pragma once

// Discretized bin geometry: items, orientations, footprints and the height map.
//
// Coordinates are zero-based cells. X runs along the bin length L, Y along the
// width W and Z is the stacked height. A cell (x, y) covers the continuous
// square [x, x+1) x [y, y+1), so an item whose front-left-bottom corner sits at
// cell (x, y) has its planar centroid at (x + l/2, y + w/2).

#include <cstdint>
#include <string>
#include <vector>

#include "pack3d/error.hpp"

namespace pack3d {

struct BinConfig {
  int length = 100;  // L, cells along X
  int width = 100;   // W, cells along Y
  int height = 100;  // H, cells along Z
  double cell_size = 1.0;  // physical length of one cell, informational only

  [[nodiscard]] long long volume() const {
    return static_cast<long long>(length) * width * height;
  }
  [[nodiscard]] long long area() const { return static_cast<long long>(length) * width; }
  /// Throws Error unless every extent is at least one cell.
  void validate() const;

  friend bool operator==(const BinConfig&, const BinConfig&) = default;
};

/// Parses "LxWxH" (e.g. "100x100x100").
BinConfig parse_bin(const std::string& text);
std::string format_bin(const BinConfig& bin);

struct Dims {
  int l = 1;
  int w = 1;
  int h = 1;

  [[nodiscard]] long long volume() const { return static_cast<long long>(l) * w * h; }
  friend auto operator<=>(const Dims&, const Dims&) = default;
};

enum class Orientation : std::uint8_t { kAsIs = 0, kSwapped = 1 };

inline constexpr Orientation kOrientations[] = {Orientation::kAsIs, Orientation::kSwapped};

inline int to_int(Orientation o) { return static_cast<int>(o); }
Orientation orientation_from_int(int o);

/// o=0 keeps (l, w, h); o=1 swaps the two horizontal extents.
inline Dims oriented(const Dims& d, Orientation o) {
  return o == Orientation::kAsIs ? d : Dims{d.w, d.l, d.h};
}

/// Distinct horizontal orientations of an item; a square footprint yields one.
std::vector<Dims> orientations(const Dims& d);

struct Item {
  int id = 0;  // sequence index n
  Dims dims;
  double mass = 1.0;

  /// Item of unit density: mass equals volume.
  static Item with_unit_density(int id, const Dims& dims) {
    return Item{id, dims, static_cast<double>(dims.volume())};
  }
  void validate() const;
};

/// Half-open cell rectangle [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  [[nodiscard]] bool empty() const { return x1 <= x0 || y1 <= y0; }
  [[nodiscard]] long long area() const {
    return empty() ? 0 : static_cast<long long>(x1 - x0) * (y1 - y0);
  }
  [[nodiscard]] int dx() const { return x1 - x0; }
  [[nodiscard]] int dy() const { return y1 - y0; }
  [[nodiscard]] bool overlaps(const Rect& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
  [[nodiscard]] Rect intersect(const Rect& o) const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// The (x, y, o) action encoding: FLB cell plus orientation flag.
struct Action {
  int x = 0;
  int y = 0;
  Orientation o = Orientation::kAsIs;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Total order (o, y, x) used for deterministic tie-breaking.
inline bool action_less(const Action& a, const Action& b) {
  if (a.o != b.o) return a.o < b.o;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

struct Placement {
  Item item;
  Orientation o = Orientation::kAsIs;
  int x = 0;
  int y = 0;
  int z = 0;  // support height, derived from the height map

  [[nodiscard]] Dims dims() const { return oriented(item.dims, o); }
  [[nodiscard]] Rect footprint() const {
    const Dims d = dims();
    return Rect{x, y, x + d.l, y + d.w};
  }
  [[nodiscard]] int top() const { return z + item.dims.h; }
  [[nodiscard]] Action action() const { return Action{x, y, o}; }
};

/// L x W grid of stacked heights, stored X-major (index = x * W + y).
class HeightMap {
 public:
  HeightMap() = default;
  HeightMap(int length, int width);

  [[nodiscard]] int length() const { return length_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int at(int x, int y) const { return cells_[index(x, y)]; }
  void set(int x, int y, int value) { cells_[index(x, y)] = value; }
  [[nodiscard]] const std::vector<int>& cells() const { return cells_; }

  [[nodiscard]] bool contains(const Rect& r) const {
    return r.x0 >= 0 && r.y0 >= 0 && r.x1 <= length_ && r.y1 <= width_ && !r.empty();
  }
  /// Maximum height over the footprint. Throws OutOfBounds.
  [[nodiscard]] int support_height(const Rect& footprint) const;
  /// Sets every footprint cell to `top`.
  void fill(const Rect& footprint, int top);
  [[nodiscard]] long long total() const;

  friend bool operator==(const HeightMap&, const HeightMap&) = default;

 private:
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(y);
  }

  int length_ = 0;
  int width_ = 0;
  std::vector<int> cells_;
};

/// Returns the height map after dropping `p` onto `hmap`: every footprint cell
/// becomes support_height + h. Throws OutOfBounds or HeightOverflow.
HeightMap apply_placement(const HeightMap& hmap, const Placement& p, int bin_height);

}  // namespace pack3d
