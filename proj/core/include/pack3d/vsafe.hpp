#pragma once

// Far-to-near safe volume. The entrance line is the y = W edge of the bin. A
// cell is safe when no cell further along +Y in its column is higher, so an
// item can slide in straight from the entrance; its upon volume is the free
// column above it.

#include <vector>

#include "pack3d/grid.hpp"

namespace pack3d {

/// Sum of upon volumes of safe cells, in cells^3 (not normalized).
long long safe_volume(const HeightMap& hmap, int bin_height);

/// Per-column tables answering "safe volume after filling a footprint to a
/// flat top" in time proportional to the footprint length plus a short scan.
class SafeVolumeIndex {
 public:
  SafeVolumeIndex() = default;
  SafeVolumeIndex(const HeightMap& hmap, int bin_height);

  [[nodiscard]] long long total() const { return total_; }

  /// Safe volume after every cell of `fp` is raised to `top`; `top` must be
  /// at least the current maximum over `fp`.
  [[nodiscard]] long long after_fill(const HeightMap& hmap, const Rect& fp, int top) const;

  /// Rebuilds the columns touched by `fp`; call after `hmap` changed there.
  void update(const HeightMap& hmap, const Rect& fp);

 private:
  void build_column(const HeightMap& hmap, int x);
  [[nodiscard]] std::size_t at(int x, int y) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(width_ + 1) +
           static_cast<std::size_t>(y);
  }

  int width_ = 0;
  int bin_height_ = 0;
  long long total_ = 0;
  std::vector<int> suffix_max_;        // over [y, W), 0 for the empty suffix
  std::vector<long long> suffix_safe_;  // safe volume of cells y' >= y
  std::vector<long long> chain_;       // upon volume along the record chain
  std::vector<long long> column_;      // safe volume per column
};

}  // namespace pack3d
