// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "sis/model.hpp"

namespace sis {

struct GtcConfig {
  double entry_prob = 0.7;
  double exit_prob = 0.3;
  double init_prob = 0.7;
  int horizon = 50;
  int fixed_switch_period = 9;

  void validate() const;
};

/// Grid Traffic Control on a 3x3 grid of one-way roads.
///
/// Three eastbound and three southbound roads of 11 cells each:
/// entry, 3 x (2 approach cells + intersection), exit. Cells live on an
/// 11x11 lattice (eastbound roads at y = 3, 6, 9; southbound at x = 3, 6, 9)
/// and the 9 intersection cells are shared, giving 57 cells.
///
/// State layout: 57 occupancy bits, 9 intersection heading bits (0 = east,
/// 1 = south; zero when empty), 9 light bits (0 = east-west green,
/// 1 = north-south green), step counter.
///
/// Local state: [W, N, E, S, centre, centre heading, centre light] where
/// W/N are the approach cells into the centre and E/S the cells right after it.
/// Sources: [car upstream of W, car upstream of N, cell after E blocked,
/// cell after S blocked].
class GtcDomain final : public DomainModel {
 public:
  static constexpr ActionId kKeep = 0;
  static constexpr ActionId kSwitch = 1;
  static constexpr int kCells = 57;
  static constexpr int kIntersections = 9;
  static constexpr int kCentre = 4;  // intersection (row 1, col 1)

  enum LocalSlot { kW = 0, kN, kE, kS, kI, kIDir, kILight, kLocalVars };

  explicit GtcDomain(GtcConfig cfg = {});

  const GtcConfig& config() const { return cfg_; }

  std::string name() const override { return "gtc"; }
  int num_actions() const override { return 2; }
  int num_observations() const override { return 16; }
  int horizon() const override { return cfg_.horizon; }
  std::span<const int> state_cardinalities() const override { return state_card_; }
  std::span<const int> local_cardinalities() const override { return local_card_; }
  std::span<const int> source_cardinalities() const override { return source_card_; }

  FactoredState sample_initial(Rng& rng) const override;
  GlobalStep step_global(const FactoredState& s, ActionId a, Rng& rng) const override;
  LocalStep step_local(const LocalState& local, const SourceValue& src, ActionId a,
                       Rng& rng) const override;
  /// Sources are deterministic given (s, a): exits and entries fire only after
  /// the movement phase that the local cells depend on.
  double source_entropy(const FactoredState& s, ActionId a) const override;
  LocalState project_local(const FactoredState& s) const override;
  SourceValue project_source_next(const FactoredState& s, ActionId a, Rng& rng) const override;

  /// Cell index of lattice coordinate (x, y), or -1 if no road passes there.
  int cell_at(int x, int y) const;
  std::size_t occ_slot(int cell) const { return static_cast<std::size_t>(cell); }
  std::size_t dir_slot(int inter) const { return kCells + static_cast<std::size_t>(inter); }
  std::size_t light_slot(int inter) const { return kCells + kIntersections + static_cast<std::size_t>(inter); }
  std::size_t step_slot() const { return kCells + 2 * kIntersections; }
  int car_count(const FactoredState& s) const;
  int intersection_cell(int inter) const { return inter_cell_[static_cast<std::size_t>(inter)]; }

  /// Lights + movement only (no exits/entries); exposed for tests.
  FactoredState move_phase(const FactoredState& s, ActionId a, SourceValue* sources) const;

  static ObservationId encode_observation(int w, int n, int e, int s) { return w + 2 * n + 4 * e + 8 * s; }

 private:
  struct Cell {
    int x = 0, y = 0;
    bool eastbound = false;    // road direction for non-intersection cells
    int inter = -1;            // intersection index if shared cell
    bool before_inter = false; // approach cell feeding an intersection
    bool entry = false;
    bool exit = false;
  };

  int next_cell(const FactoredState& s, int cell) const;

  GtcConfig cfg_;
  std::vector<Cell> cells_;
  std::vector<int> lattice_;     // 11 x 11 -> cell index or -1
  std::vector<int> order_;       // cells by decreasing x + y
  std::array<int, kIntersections> inter_cell_{};
  std::array<int, 4> local_cells_{};     // W, N, E, S
  std::array<int, 4> source_cells_{};    // up W, up N, down E, down S
  std::vector<int> state_card_;
  std::vector<int> local_card_;
  std::vector<int> source_card_{2, 2, 2, 2};
};

}  // namespace sis
