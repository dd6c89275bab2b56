#include "pack3d/grid.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace pack3d {

void BinConfig::validate() const {
  if (length < 1 || width < 1 || height < 1) {
    throw Error("bin extents must be at least one cell, got " + format_bin(*this));
  }
}

BinConfig parse_bin(const std::string& text) {
  BinConfig bin;
  int parts[3] = {0, 0, 0};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find_first_of("xX", pos) : text.size();
    if (end == std::string::npos) throw Error("bin must look like LxWxH, got '" + text + "'");
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, parts[i]);
    if (ec != std::errc() || ptr != last) {
      throw Error("bin must look like LxWxH, got '" + text + "'");
    }
    pos = end + 1;
  }
  bin.length = parts[0];
  bin.width = parts[1];
  bin.height = parts[2];
  bin.validate();
  return bin;
}

std::string format_bin(const BinConfig& bin) {
  return std::to_string(bin.length) + "x" + std::to_string(bin.width) + "x" +
         std::to_string(bin.height);
}

Orientation orientation_from_int(int o) {
  if (o == 0) return Orientation::kAsIs;
  if (o == 1) return Orientation::kSwapped;
  throw Error("orientation flag must be 0 or 1, got " + std::to_string(o));
}

std::vector<Dims> orientations(const Dims& d) {
  if (d.l == d.w) return {d};
  return {d, oriented(d, Orientation::kSwapped)};
}

void Item::validate() const {
  if (dims.l < 1 || dims.w < 1 || dims.h < 1) {
    throw Error("item " + std::to_string(id) + " has a non-positive extent");
  }
  if (!(mass > 0.0)) throw Error("item " + std::to_string(id) + " has non-positive mass");
}

Rect Rect::intersect(const Rect& o) const {
  Rect r{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  if (r.empty()) return Rect{};
  return r;
}

HeightMap::HeightMap(int length, int width)
    : length_(length),
      width_(width),
      cells_(static_cast<std::size_t>(length) * static_cast<std::size_t>(width), 0) {
  if (length < 1 || width < 1) throw Error("height map needs positive extents");
}

int HeightMap::support_height(const Rect& footprint) const {
  if (!contains(footprint)) throw OutOfBounds("footprint exceeds the bin floor");
  int best = 0;
  for (int x = footprint.x0; x < footprint.x1; ++x) {
    const int* row = cells_.data() + index(x, footprint.y0);
    best = std::max(best, *std::max_element(row, row + footprint.dy()));
  }
  return best;
}

void HeightMap::fill(const Rect& footprint, int top) {
  for (int x = footprint.x0; x < footprint.x1; ++x) {
    int* row = cells_.data() + index(x, footprint.y0);
    std::fill(row, row + footprint.dy(), top);
  }
}

long long HeightMap::total() const {
  return std::accumulate(cells_.begin(), cells_.end(), 0LL);
}

HeightMap apply_placement(const HeightMap& hmap, const Placement& p, int bin_height) {
  const Rect fp = p.footprint();
  const int z = hmap.support_height(fp);
  if (z + p.item.dims.h > bin_height) {
    throw HeightOverflow("placement would rise to " + std::to_string(z + p.item.dims.h) +
                         " above bin height " + std::to_string(bin_height));
  }
  HeightMap out = hmap;
  out.fill(fp, z + p.item.dims.h);
  return out;
}

}  // namespace pack3d
