// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sis/rng.hpp"

namespace sis {

using Value = std::uint8_t;
using ActionId = int;
using ObservationId = int;
using Reward = double;

/// Assignment of every state variable. Layout is owned by the domain.
struct FactoredState {
  std::vector<Value> values;
  friend bool operator==(const FactoredState&, const FactoredState&) = default;
};

/// Projection of a FactoredState onto the variables that drive observation and reward.
struct LocalState {
  std::vector<Value> values;
  friend bool operator==(const LocalState&, const LocalState&) = default;
};

/// Assignment of the influence-source variables for one transition.
struct SourceValue {
  std::vector<Value> values;
  friend bool operator==(const SourceValue&, const SourceValue&) = default;
};

/// Local states interleaved with actions: (l_0, a_0, l_1, ..., a_{k-1}, l_k).
///
/// Stored flat so particles and training records copy cheaply.
class LocalHistory {
 public:
  LocalHistory() = default;
  explicit LocalHistory(const LocalState& initial);

  /// Number of local states, i.e. 1 + number of steps.
  std::size_t length() const { return actions_.size() + 1; }
  std::size_t num_steps() const { return actions_.size(); }
  std::size_t local_dim() const { return local_dim_; }
  bool empty() const { return locals_.empty(); }

  std::span<const Value> local(std::size_t k) const {
    return {locals_.data() + k * local_dim_, local_dim_};
  }
  std::span<const Value> last_local() const { return local(length() - 1); }
  LocalState local_state(std::size_t k) const;
  LocalState initial_local() const { return local_state(0); }
  /// Action taken after local state k.
  ActionId action(std::size_t k) const { return actions_[k]; }

  void extend(ActionId a, std::span<const Value> next_local);
  /// The first `steps` steps of this history.
  LocalHistory prefix(std::size_t steps) const;

  /// Raw storage, used as a cache key and by serialisation.
  const std::vector<Value>& raw_locals() const { return locals_; }
  const std::vector<ActionId>& raw_actions() const { return actions_; }

  friend bool operator==(const LocalHistory&, const LocalHistory&) = default;

 private:
  std::size_t local_dim_ = 0;
  std::vector<Value> locals_;
  std::vector<ActionId> actions_;
};

/// Returns d extended by (a, next); d is left untouched.
LocalHistory append_history(const LocalHistory& d, ActionId a, const LocalState& next);

/// Global state paired with the local history that led to it.
struct AugmentedParticle {
  FactoredState global;
  LocalHistory history;
};

struct GlobalStep {
  FactoredState next;
  ObservationId observation = 0;
  Reward reward = 0.0;
  /// Influence-source value realised during this transition.
  SourceValue source;
};

struct LocalStep {
  LocalState next;
  ObservationId observation = 0;
  Reward reward = 0.0;
};

/// Capability contract of a factored POMDP.
///
/// step_global samples the full joint transition. step_local samples the local
/// transition given an influence-source value; for every state the composition
/// project_source_next -> step_local has the same (local', o, r) distribution
/// as step_global projected onto the local variables.
class DomainModel {
 public:
  virtual ~DomainModel() = default;

  virtual std::string name() const = 0;
  virtual int num_actions() const = 0;
  virtual int num_observations() const = 0;
  virtual int horizon() const = 0;

  virtual std::span<const int> state_cardinalities() const = 0;
  virtual std::span<const int> local_cardinalities() const = 0;
  virtual std::span<const int> source_cardinalities() const = 0;

  virtual FactoredState sample_initial(Rng& rng) const = 0;
  virtual GlobalStep step_global(const FactoredState& s, ActionId a, Rng& rng) const = 0;
  virtual LocalStep step_local(const LocalState& local, const SourceValue& src, ActionId a,
                               Rng& rng) const = 0;
  /// Exact entropy (nats) of the next-transition source variables given (s, a).
  virtual double source_entropy(const FactoredState& s, ActionId a) const = 0;
  virtual LocalState project_local(const FactoredState& s) const = 0;
  virtual SourceValue project_source_next(const FactoredState& s, ActionId a, Rng& rng) const = 0;

  bool valid_state(const FactoredState& s) const;
  bool valid_action(ActionId a) const { return a >= 0 && a < num_actions(); }
  /// Upper bound sum_v ln |card(v)| of source_entropy.
  double max_source_entropy() const;
};

/// Entropy in nats of a (normalised) discrete distribution.
double entropy(std::span<const double> probs);
double binary_entropy(double p);

}  // namespace sis
