// SPDX-License-Identifier: Apache-2.0
#include "sis/gtc.hpp"

#include <algorithm>
#include <stdexcept>

namespace sis {
namespace {

constexpr int kSide = 11;
constexpr int kRoadCoords[3] = {3, 6, 9};

}  // namespace

void GtcConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(entry_prob) || !prob(exit_prob) || !prob(init_prob))
    throw std::invalid_argument("gtc: probabilities must lie in [0, 1]");
  if (horizon < 1 || horizon > 255) throw std::invalid_argument("gtc: horizon must be in [1, 255]");
  if (fixed_switch_period < 1) throw std::invalid_argument("gtc: fixed_switch_period must be >= 1");
}

GtcDomain::GtcDomain(GtcConfig cfg) : cfg_(cfg), lattice_(kSide * kSide, -1) {
  cfg_.validate();
  auto add = [&](int x, int y, bool eastbound) {
    int& slot = lattice_[static_cast<std::size_t>(y * kSide + x)];
    if (slot >= 0) return slot;
    Cell c;
    c.x = x;
    c.y = y;
    c.eastbound = eastbound;
    slot = static_cast<int>(cells_.size());
    cells_.push_back(c);
    return slot;
  };
  for (int y : kRoadCoords)
    for (int x = 0; x < kSide; ++x) add(x, y, true);
  for (int x : kRoadCoords)
    for (int y = 0; y < kSide; ++y) add(x, y, false);
  if (cells_.size() != kCells) throw std::logic_error("gtc: unexpected cell count");

  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int idx = cell_at(kRoadCoords[c], kRoadCoords[r]);
      cells_[static_cast<std::size_t>(idx)].inter = r * 3 + c;
      inter_cell_[static_cast<std::size_t>(r * 3 + c)] = idx;
    }
  for (auto& c : cells_) {
    if (c.inter >= 0) continue;
    const int nx = c.eastbound ? c.x + 1 : c.x;
    const int ny = c.eastbound ? c.y : c.y + 1;
    c.entry = c.eastbound ? c.x == 0 : c.y == 0;
    c.exit = c.eastbound ? c.x == kSide - 1 : c.y == kSide - 1;
    if (!c.exit) c.before_inter = cells_[static_cast<std::size_t>(cell_at(nx, ny))].inter >= 0;
  }

  order_.resize(kCells);
  for (int i = 0; i < kCells; ++i) order_[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
    const auto& ca = cells_[static_cast<std::size_t>(a)];
    const auto& cb = cells_[static_cast<std::size_t>(b)];
    return ca.x + ca.y > cb.x + cb.y;
  });

  local_cells_ = {cell_at(5, 6), cell_at(6, 5), cell_at(7, 6), cell_at(6, 7)};
  source_cells_ = {cell_at(4, 6), cell_at(6, 4), cell_at(8, 6), cell_at(6, 8)};

  state_card_.assign(kCells + 2 * kIntersections, 2);
  state_card_.push_back(cfg_.horizon + 1);
  local_card_.assign(kLocalVars, 2);
}

int GtcDomain::cell_at(int x, int y) const {
  if (x < 0 || y < 0 || x >= kSide || y >= kSide) return -1;
  return lattice_[static_cast<std::size_t>(y * kSide + x)];
}

int GtcDomain::car_count(const FactoredState& s) const {
  int n = 0;
  for (int c = 0; c < kCells; ++c) n += s.values[occ_slot(c)];
  return n;
}

int GtcDomain::next_cell(const FactoredState& s, int cell) const {
  const auto& c = cells_[static_cast<std::size_t>(cell)];
  if (c.exit) return -1;
  const bool east = c.inter >= 0 ? s.values[dir_slot(c.inter)] == 0 : c.eastbound;
  return east ? cell_at(c.x + 1, c.y) : cell_at(c.x, c.y + 1);
}

FactoredState GtcDomain::sample_initial(Rng& rng) const {
  FactoredState s{std::vector<Value>(state_card_.size(), 0)};
  for (int c = 0; c < kCells; ++c) s.values[occ_slot(c)] = rng.bernoulli(cfg_.init_prob) ? 1 : 0;
  for (int i = 0; i < kIntersections; ++i)
    if (s.values[occ_slot(inter_cell_[static_cast<std::size_t>(i)])])
      s.values[dir_slot(i)] = rng.bernoulli(0.5) ? 1 : 0;
  return s;
}

FactoredState GtcDomain::move_phase(const FactoredState& s, ActionId a, SourceValue* sources) const {
  FactoredState next = s;
  auto& v = next.values;
  const int step = s.values[step_slot()];
  for (int i = 0; i < kIntersections; ++i) {
    const bool toggle = i == kCentre ? a == kSwitch : step % cfg_.fixed_switch_period == 0;
    if (toggle) v[light_slot(i)] ^= 1;
  }
  Value src[4] = {v[occ_slot(source_cells_[0])], v[occ_slot(source_cells_[1])], 0, 0};

  // Downstream cells first, so a freed cell can be entered in the same step.
  for (int cell : order_) {
    if (cell == local_cells_[2]) src[2] = v[occ_slot(source_cells_[2])];
    if (cell == local_cells_[3]) src[3] = v[occ_slot(source_cells_[3])];
    if (!v[occ_slot(cell)]) continue;
    const auto& c = cells_[static_cast<std::size_t>(cell)];
    const int target = next_cell(next, cell);
    if (target < 0 || v[occ_slot(target)]) continue;
    if (c.before_inter) {
      const int inter = cells_[static_cast<std::size_t>(target)].inter;
      const bool ew_green = v[light_slot(inter)] == 0;
      if (ew_green != c.eastbound) continue;
    }
    const bool heading_east = c.inter >= 0 ? v[dir_slot(c.inter)] == 0 : c.eastbound;
    v[occ_slot(cell)] = 0;
    if (c.inter >= 0) v[dir_slot(c.inter)] = 0;
    v[occ_slot(target)] = 1;
    const int tinter = cells_[static_cast<std::size_t>(target)].inter;
    if (tinter >= 0) v[dir_slot(tinter)] = heading_east ? 0 : 1;
  }
  if (step < cfg_.horizon) v[step_slot()] = static_cast<Value>(step + 1);
  if (sources) *sources = SourceValue{{src[0], src[1], src[2], src[3]}};
  return next;
}

GlobalStep GtcDomain::step_global(const FactoredState& s, ActionId a, Rng& rng) const {
  GlobalStep out;
  out.next = move_phase(s, a, &out.source);
  auto& v = out.next.values;
  for (int cell = 0; cell < kCells; ++cell) {
    const auto& c = cells_[static_cast<std::size_t>(cell)];
    if (c.exit && v[occ_slot(cell)] && rng.bernoulli(cfg_.exit_prob)) v[occ_slot(cell)] = 0;
  }
  for (int cell = 0; cell < kCells; ++cell) {
    const auto& c = cells_[static_cast<std::size_t>(cell)];
    if (c.entry && !v[occ_slot(cell)] && rng.bernoulli(cfg_.entry_prob)) v[occ_slot(cell)] = 1;
  }
  const LocalState l = project_local(out.next);
  out.observation = encode_observation(l.values[kW], l.values[kN], l.values[kE], l.values[kS]);
  out.reward = -static_cast<double>(l.values[kW] + l.values[kN] + l.values[kE] + l.values[kS] + l.values[kI]);
  return out;
}

LocalStep GtcDomain::step_local(const LocalState& local, const SourceValue& src, ActionId a,
                                Rng&) const {
  auto l = local.values;
  if (a == kSwitch) l[kILight] ^= 1;
  const bool ew_green = l[kILight] == 0;
  // Same downstream-first order as the global movement phase.
  if (l[kE] && !src.values[2]) l[kE] = 0;
  if (l[kS] && !src.values[3]) l[kS] = 0;
  if (l[kI]) {
    const int target = l[kIDir] == 0 ? kE : kS;
    if (!l[target]) {
      l[target] = 1;
      l[kI] = 0;
      l[kIDir] = 0;
    }
  }
  if (l[kW] && ew_green && !l[kI]) {
    l[kW] = 0;
    l[kI] = 1;
    l[kIDir] = 0;
  }
  if (l[kN] && !ew_green && !l[kI]) {
    l[kN] = 0;
    l[kI] = 1;
    l[kIDir] = 1;
  }
  if (src.values[0] && !l[kW]) l[kW] = 1;
  if (src.values[1] && !l[kN]) l[kN] = 1;

  LocalStep out;
  out.observation = encode_observation(l[kW], l[kN], l[kE], l[kS]);
  out.reward = -static_cast<double>(l[kW] + l[kN] + l[kE] + l[kS] + l[kI]);
  out.next = LocalState{std::move(l)};
  return out;
}

double GtcDomain::source_entropy(const FactoredState&, ActionId) const { return 0.0; }

LocalState GtcDomain::project_local(const FactoredState& s) const {
  const auto& v = s.values;
  const int centre = inter_cell_[kCentre];
  return LocalState{{v[occ_slot(local_cells_[0])], v[occ_slot(local_cells_[1])],
                     v[occ_slot(local_cells_[2])], v[occ_slot(local_cells_[3])], v[occ_slot(centre)],
                     v[dir_slot(kCentre)], v[light_slot(kCentre)]}};
}

SourceValue GtcDomain::project_source_next(const FactoredState& s, ActionId a, Rng&) const {
  SourceValue src;
  move_phase(s, a, &src);
  return src;
}

}  // namespace sis
