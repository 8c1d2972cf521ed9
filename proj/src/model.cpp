// SPDX-License-Identifier: Apache-2.0
#include "sis/model.hpp"

#include <cmath>

namespace sis {

LocalHistory::LocalHistory(const LocalState& initial)
    : local_dim_(initial.values.size()), locals_(initial.values) {}

LocalState LocalHistory::local_state(std::size_t k) const {
  auto v = local(k);
  return LocalState{{v.begin(), v.end()}};
}

void LocalHistory::extend(ActionId a, std::span<const Value> next_local) {
  if (next_local.size() != local_dim_)
    throw std::invalid_argument("LocalHistory::extend: local state has wrong dimension");
  actions_.push_back(a);
  locals_.insert(locals_.end(), next_local.begin(), next_local.end());
}

LocalHistory LocalHistory::prefix(std::size_t steps) const {
  if (steps > num_steps()) throw std::out_of_range("LocalHistory::prefix: too many steps");
  LocalHistory out;
  out.local_dim_ = local_dim_;
  out.locals_.assign(locals_.begin(), locals_.begin() + static_cast<std::ptrdiff_t>((steps + 1) * local_dim_));
  out.actions_.assign(actions_.begin(), actions_.begin() + static_cast<std::ptrdiff_t>(steps));
  return out;
}

LocalHistory append_history(const LocalHistory& d, ActionId a, const LocalState& next) {
  LocalHistory out = d;
  out.extend(a, next.values);
  return out;
}

bool DomainModel::valid_state(const FactoredState& s) const {
  const auto card = state_cardinalities();
  if (s.values.size() != card.size()) return false;
  for (std::size_t i = 0; i < card.size(); ++i)
    if (static_cast<int>(s.values[i]) >= card[i]) return false;
  return true;
}

double DomainModel::max_source_entropy() const {
  double h = 0.0;
  for (int c : source_cardinalities()) h += std::log(static_cast<double>(c));
  return h;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double binary_entropy(double p) {
  const double q[2] = {p, 1.0 - p};
  return entropy(q);
}

}  // namespace sis
