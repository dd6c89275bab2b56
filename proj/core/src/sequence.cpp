#include "pack3d/sequence.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "json.hpp"

namespace pack3d {

using nlohmann::json;

namespace {

std::vector<int> five_steps(int extent) {
  std::vector<int> out;
  for (int k = 1; k <= 5; ++k) {
    const int v = k * extent / 10;
    if (v >= 1 && (out.empty() || out.back() != v)) out.push_back(v);
  }
  return out;
}

}  // namespace

ItemRegistry ItemRegistry::default_for(const BinConfig& bin) {
  bin.validate();
  return product(five_steps(bin.length), five_steps(bin.width), five_steps(bin.height));
}

ItemRegistry ItemRegistry::product(const std::vector<int>& ls, const std::vector<int>& ws,
                                   const std::vector<int>& hs) {
  ItemRegistry r;
  for (int l : ls) {
    for (int w : ws) {
      for (int h : hs) r.types.push_back(Dims{l, w, h});
    }
  }
  return r;
}

bool ItemRegistry::contains(const Dims& d) const {
  return std::find(types.begin(), types.end(), d) != types.end();
}

void ItemRegistry::validate_for(const BinConfig& bin) const {
  if (types.empty()) throw Error("item registry is empty");
  for (const Dims& d : types) {
    if (d.l < 1 || d.w < 1 || d.h < 1 || 2 * d.l > bin.length || 2 * d.w > bin.width ||
        2 * d.h > bin.height) {
      throw Error("registry type exceeds half the bin extent");
    }
  }
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kRS: return "rs";
    case Provenance::kCut1: return "cut1";
    case Provenance::kCut2: return "cut2";
    case Provenance::kCustom: return "custom";
  }
  return "custom";
}

Provenance provenance_from_string(const std::string& text) {
  if (text == "rs") return Provenance::kRS;
  if (text == "cut1") return Provenance::kCut1;
  if (text == "cut2") return Provenance::kCut2;
  if (text == "custom") return Provenance::kCustom;
  throw Error("unknown distribution '" + text + "'");
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw Error("uniform_below with empty range");
  const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
  for (;;) {
    const std::uint64_t v = rng();
    if (v <= limit) return v % n;
  }
}

double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

long long ItemSequence::total_volume() const {
  long long v = 0;
  for (const Item& it : items) v += it.dims.volume();
  return v;
}

ItemSequence generate_rs(const ItemRegistry& registry, const BinConfig& bin, std::uint64_t seed) {
  if (registry.types.empty()) throw Error("item registry is empty");
  ItemSequence seq;
  seq.provenance = Provenance::kRS;
  seq.seed = seed;
  seq.bin = bin;
  Rng rng(seed);
  long long volume = 0;
  while (volume < bin.volume()) {
    const Dims d = registry.types[uniform_below(rng, registry.types.size())];
    seq.items.push_back(Item::with_unit_density(static_cast<int>(seq.items.size()), d));
    volume += d.volume();
  }
  return seq;
}

namespace {

struct Piece {
  int x, y, z, l, w, h;
};

// Lengths along one axis that are sums of allowed sizes.
std::vector<char> realizable(const std::vector<int>& sizes, int extent) {
  std::vector<char> ok(static_cast<std::size_t>(extent) + 1, 0);
  ok[0] = 1;
  for (int v = 1; v <= extent; ++v) {
    for (int s : sizes) {
      if (s <= v && ok[static_cast<std::size_t>(v - s)]) {
        ok[static_cast<std::size_t>(v)] = 1;
        break;
      }
    }
  }
  return ok;
}

bool cut_once(const ItemRegistry& registry, const BinConfig& bin, Rng& rng,
              std::vector<Piece>& out) {
  std::set<int> axis_sizes[3];
  for (const Dims& d : registry.types) {
    axis_sizes[0].insert(d.l);
    axis_sizes[1].insert(d.w);
    axis_sizes[2].insert(d.h);
  }
  const int extents[3] = {bin.length, bin.width, bin.height};
  std::vector<char> ok[3];
  for (int a = 0; a < 3; ++a) {
    ok[a] = realizable(std::vector<int>(axis_sizes[a].begin(), axis_sizes[a].end()), extents[a]);
    if (!ok[a][static_cast<std::size_t>(extents[a])]) return false;
  }

  out.clear();
  std::vector<Piece> stack{{0, 0, 0, bin.length, bin.width, bin.height}};
  while (!stack.empty()) {
    const Piece p = stack.back();
    stack.pop_back();
    const int len[3] = {p.l, p.w, p.h};
    std::vector<std::pair<int, int>> splits;  // (axis, offset)
    for (int a = 0; a < 3; ++a) {
      for (int s = 1; s < len[a]; ++s) {
        if (ok[a][static_cast<std::size_t>(s)] && ok[a][static_cast<std::size_t>(len[a] - s)]) {
          splits.emplace_back(a, s);
        }
      }
    }
    const bool member = registry.contains(Dims{p.l, p.w, p.h});
    // A registry piece stops with probability one half, or when it cannot
    // be split further.
    if (member && (splits.empty() || uniform_below(rng, 2) == 0)) {
      out.push_back(p);
      continue;
    }
    if (splits.empty()) return false;
    // Pick the axis first so long axes do not dominate, then the offset.
    int axes[3];
    int n_axes = 0;
    for (int a = 0; a < 3; ++a) {
      if (std::any_of(splits.begin(), splits.end(), [a](auto s) { return s.first == a; })) {
        axes[n_axes++] = a;
      }
    }
    const int axis = axes[uniform_below(rng, static_cast<std::uint64_t>(n_axes))];
    std::vector<int> offsets;
    for (auto [a, s] : splits) {
      if (a == axis) offsets.push_back(s);
    }
    const int s = offsets[uniform_below(rng, offsets.size())];
    Piece lo = p;
    Piece hi = p;
    if (axis == 0) {
      lo.l = s;
      hi.x += s;
      hi.l -= s;
    } else if (axis == 1) {
      lo.w = s;
      hi.y += s;
      hi.w -= s;
    } else {
      lo.h = s;
      hi.z += s;
      hi.h -= s;
    }
    stack.push_back(hi);
    stack.push_back(lo);
  }
  return true;
}

bool rests(const Piece& upper, const Piece& lower) {
  if (lower.z + lower.h != upper.z) return false;
  const Rect a{upper.x, upper.y, upper.x + upper.l, upper.y + upper.w};
  const Rect b{lower.x, lower.y, lower.x + lower.l, lower.y + lower.w};
  return a.overlaps(b);
}

}  // namespace

ItemSequence generate_cut(const ItemRegistry& registry, const BinConfig& bin,
                          std::uint64_t seed, Provenance variant) {
  if (variant != Provenance::kCut1 && variant != Provenance::kCut2) {
    throw Error("generate_cut needs cut1 or cut2");
  }
  constexpr int kAttempts = 64;
  Rng rng(seed);
  std::vector<Piece> pieces;
  bool done = false;
  for (int attempt = 0; attempt < kAttempts && !done; ++attempt) {
    done = cut_once(registry, bin, rng, pieces);
  }
  if (!done) throw CutFailure("bin cannot be cut into registry items");

  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    if (a.z != b.z) return a.z < b.z;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (variant == Provenance::kCut2) {
    // Random topological order of the rests-on relation.
    const std::size_t n = pieces.size();
    std::vector<int> pending(n, 0);
    std::vector<std::vector<std::size_t>> above(n);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t l = 0; l < n; ++l) {
        if (rests(pieces[u], pieces[l])) {
          ++pending[u];
          above[l].push_back(u);
        }
      }
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i] == 0) ready.push_back(i);
    }
    order.clear();
    while (!ready.empty()) {
      const std::size_t pick = uniform_below(rng, ready.size());
      const std::size_t i = ready[pick];
      ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
      order.push_back(i);
      for (std::size_t u : above[i]) {
        if (--pending[u] == 0) ready.insert(std::upper_bound(ready.begin(), ready.end(), u), u);
      }
    }
  }

  ItemSequence seq;
  seq.provenance = variant;
  seq.seed = seed;
  seq.bin = bin;
  for (std::size_t i : order) {
    const Piece& p = pieces[i];
    seq.items.push_back(Item::with_unit_density(static_cast<int>(seq.items.size()),
                                                Dims{p.l, p.w, p.h}));
    seq.positions.push_back(CutPosition{p.x, p.y, p.z});
  }
  return seq;
}

ItemSequence generate(const ItemRegistry& registry, const BinConfig& bin, std::uint64_t seed,
                      Provenance dist) {
  if (dist == Provenance::kRS) return generate_rs(registry, bin, seed);
  return generate_cut(registry, bin, seed, dist);
}

std::vector<std::vector<int>> rests_on(const ItemSequence& seq) {
  const std::size_t n = seq.items.size();
  if (seq.positions.size() != n) throw Error("sequence has no layout positions");
  std::vector<Piece> pieces(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = seq.items[i].dims;
    const auto& p = seq.positions[i];
    pieces[i] = Piece{p.x, p.y, p.z, d.l, d.w, d.h};
  }
  std::vector<std::vector<int>> out(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t l = 0; l < n; ++l) {
      if (rests(pieces[u], pieces[l])) out[u].push_back(static_cast<int>(l));
    }
  }
  return out;
}

void write_sequence(std::ostream& out, const ItemSequence& seq) {
  json header = {{"provenance", to_string(seq.provenance)},
                 {"seed", seq.seed},
                 {"bin", {{"L", seq.bin.length}, {"W", seq.bin.width}, {"H", seq.bin.height}}},
                 {"count", seq.items.size()}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const Item& it = seq.items[i];
    json rec = {{"index", it.id},
                {"l", it.dims.l},
                {"w", it.dims.w},
                {"h", it.dims.h},
                {"mass", it.mass}};
    if (i < seq.positions.size()) {
      rec["x"] = seq.positions[i].x;
      rec["y"] = seq.positions[i].y;
      rec["z"] = seq.positions[i].z;
    }
    out << rec.dump() << '\n';
  }
}

ItemSequence read_sequence(std::istream& in) {
  ItemSequence seq;
  std::string line;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      if (!have_header) {
        seq.provenance = provenance_from_string(rec.at("provenance").get<std::string>());
        seq.seed = rec.at("seed").get<std::uint64_t>();
        const json& b = rec.at("bin");
        seq.bin = BinConfig{b.at("L").get<int>(), b.at("W").get<int>(), b.at("H").get<int>()};
        have_header = true;
        continue;
      }
      Item it{rec.at("index").get<int>(),
              Dims{rec.at("l").get<int>(), rec.at("w").get<int>(), rec.at("h").get<int>()},
              rec.at("mass").get<double>()};
      seq.items.push_back(it);
      if (rec.contains("x")) {
        seq.positions.push_back(
            CutPosition{rec.at("x").get<int>(), rec.at("y").get<int>(), rec.at("z").get<int>()});
      }
    }
  } catch (const json::exception& e) {
    throw InvalidSequence(std::string("malformed sequence record: ") + e.what());
  }
  if (!have_header) throw InvalidSequence("sequence has no header record");
  if (!seq.positions.empty() && seq.positions.size() != seq.items.size()) {
    throw InvalidSequence("sequence positions are incomplete");
  }
  return seq;
}

void save_sequence(const std::string& path, const ItemSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_sequence(out, seq);
  if (!out) throw Error("write failed for " + path);
}

ItemSequence load_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  return read_sequence(in);
}

}  // namespace pack3d
