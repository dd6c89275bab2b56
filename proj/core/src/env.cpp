#include "pack3d/env.hpp"

#include <string>

namespace pack3d {

double step_reward(const RewardParams& params, const BinConfig& bin, long long volume,
                   long long safe) {
  const auto v = static_cast<double>(bin.volume());
  return params.alpha * static_cast<double>(volume) / v + params.beta * static_cast<double>(safe) / v;
}

double evaluate_state(const PackingState& state, const RewardParams& params) {
  const BinConfig& bin = state.bin();
  const auto v = static_cast<double>(bin.volume());
  const double free = v - static_cast<double>(state.hmap().total());
  return params.alpha * free / v +
         params.beta * static_cast<double>(state.safe_index().total()) / v;
}

Episode::Episode(const BinConfig& bin, ItemSequence sequence, int k, StabilityMode mode,
                 RewardParams params, bool allow_reorder)
    : state_(bin),
      sequence_(std::move(sequence)),
      k_(k),
      mode_(mode),
      params_(params),
      allow_reorder_(allow_reorder) {
  if (k < 1) throw InvalidSequence("lookahead k must be at least 1");
  for (const Item& it : sequence_.items) {
    const Dims& d = it.dims;
    const bool fits = d.h <= bin.height && ((d.l <= bin.length && d.w <= bin.width) ||
                                            (d.w <= bin.length && d.l <= bin.width));
    if (d.l < 1 || d.w < 1 || d.h < 1 || !(it.mass > 0.0) || !fits) {
      throw InvalidSequence("item " + std::to_string(it.id) + " does not fit the bin");
    }
  }
  remaining_.resize(sequence_.items.size());
  for (std::size_t i = 0; i < remaining_.size(); ++i) remaining_[i] = static_cast<int>(i);
  refresh();
}

std::vector<Item> Episode::lookahead() const {
  std::vector<Item> out;
  for (std::size_t i = 0; i < remaining_.size() && static_cast<int>(i) < k_; ++i) {
    out.push_back(sequence_.items[static_cast<std::size_t>(remaining_[i])]);
  }
  return out;
}

Observation Episode::observe() const {
  Observation obs;
  obs.hmap = state_.hmap();
  for (const Item& it : lookahead()) obs.lookahead.push_back(it.dims);
  obs.masks = masks_;
  return obs;
}

double Episode::v_safe() const {
  return static_cast<double>(state_.safe_index().total()) / static_cast<double>(bin().volume());
}

EpisodeMetrics Episode::metrics() const {
  return EpisodeMetrics{state_.utilization(), static_cast<int>(state_.placements().size()),
                        total_reward_, refused_};
}

void Episode::refresh() {
  if (remaining_.empty()) {
    for (Orientation o : kOrientations) {
      masks_[static_cast<std::size_t>(to_int(o))] = FeasibilityMask{
          bin().length, bin().width, o,
          std::vector<std::uint8_t>(static_cast<std::size_t>(bin().area()), 0)};
    }
    done_ = true;
    return;
  }
  const Item& current = sequence_.items[static_cast<std::size_t>(remaining_.front())];
  bool any = false;
  for (Orientation o : kOrientations) {
    auto& m = masks_[static_cast<std::size_t>(to_int(o))];
    m = state_.mask(current, o, mode_);
    any = any || m.any();
  }
  if (!any && allow_reorder_) {
    const std::size_t window = std::min(remaining_.size(), static_cast<std::size_t>(k_));
    for (std::size_t i = 1; i < window && !any; ++i) {
      const Item& it = sequence_.items[static_cast<std::size_t>(remaining_[i])];
      for (Orientation o : kOrientations) any = any || state_.mask(it, o, mode_).any();
    }
  }
  done_ = !any;
}

StepResult Episode::step(const Action& a) { return step_item(0, a); }

StepResult Episode::step_item(int offset, const Action& a) {
  if (done_) throw EpisodeDone();
  if (offset < 0 || offset >= k_ || static_cast<std::size_t>(offset) >= remaining_.size()) {
    throw Error("lookahead offset out of range");
  }
  if (offset > 0 && !allow_reorder_) throw Error("episode does not allow re-ordering");

  const Item& item = sequence_.items[static_cast<std::size_t>(remaining_[static_cast<std::size_t>(offset)])];
  bool allowed = false;
  if (offset == 0) {
    const Dims d = oriented(item.dims, a.o);
    const bool in_bounds = a.x >= 0 && a.y >= 0 && a.x + d.l <= bin().length &&
                           a.y + d.w <= bin().width;
    allowed = in_bounds && mask(a.o).at(a.x, a.y);
  } else {
    allowed = state_.feasible(item, a, mode_);
  }
  if (!allowed || state_.place(item, a, mode_).verdict != Verdict::kStable) {
    ++refused_;
    done_ = true;
    return StepResult{false, 0.0, true};
  }
  const double reward =
      step_reward(params_, bin(), item.dims.volume(), state_.safe_index().total());
  total_reward_ += reward;
  remaining_.erase(remaining_.begin() + offset);
  ++cursor_;
  refresh();
  return StepResult{true, reward, done_};
}

}  // namespace pack3d
