#include "pack3d/vsafe.hpp"

#include <algorithm>

namespace pack3d {

long long safe_volume(const HeightMap& hmap, int bin_height) {
  long long total = 0;
  for (int x = 0; x < hmap.length(); ++x) {
    for (int y = 0; y < hmap.width(); ++y) {
      bool safe = true;
      for (int yy = y + 1; yy < hmap.width() && safe; ++yy) {
        safe = hmap.at(x, yy) <= hmap.at(x, y);
      }
      if (safe) total += bin_height - hmap.at(x, y);
    }
  }
  return total;
}

SafeVolumeIndex::SafeVolumeIndex(const HeightMap& hmap, int bin_height)
    : width_(hmap.width()), bin_height_(bin_height) {
  const std::size_t n =
      static_cast<std::size_t>(hmap.length()) * static_cast<std::size_t>(width_ + 1);
  suffix_max_.assign(n, 0);
  suffix_safe_.assign(n, 0);
  chain_.assign(n, 0);
  column_.assign(static_cast<std::size_t>(hmap.length()), 0);
  for (int x = 0; x < hmap.length(); ++x) build_column(hmap, x);
  total_ = 0;
  for (long long c : column_) total_ += c;
}

void SafeVolumeIndex::build_column(const HeightMap& hmap, int x) {
  suffix_max_[at(x, width_)] = 0;
  suffix_safe_[at(x, width_)] = 0;
  for (int y = width_ - 1; y >= 0; --y) {
    const int h = hmap.at(x, y);
    const int later = suffix_max_[at(x, y + 1)];
    suffix_max_[at(x, y)] = std::max(h, later);
    suffix_safe_[at(x, y)] = suffix_safe_[at(x, y + 1)] + (h >= later ? bin_height_ - h : 0);
  }
  // chain(y): upon volume of y plus that of the nearest lower-index cell at
  // least as high, and so on.
  std::vector<int> stack;
  for (int y = 0; y < width_; ++y) {
    const int h = hmap.at(x, y);
    while (!stack.empty() && hmap.at(x, stack.back()) < h) stack.pop_back();
    const long long prev = stack.empty() ? 0 : chain_[at(x, stack.back())];
    chain_[at(x, y)] = (bin_height_ - h) + prev;
    stack.push_back(y);
  }
  column_[static_cast<std::size_t>(x)] = suffix_safe_[at(x, 0)];
}

long long SafeVolumeIndex::after_fill(const HeightMap& hmap, const Rect& fp, int top) const {
  long long result = total_;
  for (int x = fp.x0; x < fp.x1; ++x) {
    const int beyond = suffix_max_[at(x, fp.y1)];
    long long col = suffix_safe_[at(x, fp.y1)];
    if (top >= beyond) col += static_cast<long long>(bin_height_ - top) * (fp.y1 - fp.y0);
    const int bar = std::max(top, beyond);
    for (int y = fp.y0 - 1; y >= 0; --y) {
      if (hmap.at(x, y) >= bar) {
        col += chain_[at(x, y)];
        break;
      }
    }
    result += col - column_[static_cast<std::size_t>(x)];
  }
  return result;
}

void SafeVolumeIndex::update(const HeightMap& hmap, const Rect& fp) {
  for (int x = fp.x0; x < fp.x1; ++x) {
    total_ -= column_[static_cast<std::size_t>(x)];
    build_column(hmap, x);
    total_ += column_[static_cast<std::size_t>(x)];
  }
}

}  // namespace pack3d
