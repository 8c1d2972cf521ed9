// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "sis/gru.hpp"
#include "sis/model.hpp"
#include "sis/rng.hpp"

namespace sis {

struct TrainingStep {
  ActionId action = 0;
  LocalState local;    // local state reached by this step
  SourceValue source;  // influence-source value acting during this step
  friend bool operator==(const TrainingStep&, const TrainingStep&) = default;
};

/// One stored sequence: the particle's prefix history plus the simulated steps.
///
/// The prefix carries no targets. The target of step k sits at sequence
/// position prefix.length() - 1 + k, i.e. it is predicted from the local
/// history that ends just before the step.
struct TrainingSequence {
  LocalHistory prefix;
  std::vector<TrainingStep> steps;

  std::size_t sequence_length() const { return prefix.length() + steps.size(); }
  std::size_t masked_prefix() const { return prefix.length() - 1; }
  LocalHistory full_history() const;
  friend bool operator==(const TrainingSequence&, const TrainingSequence&) = default;
};

/// Padded batch; positions after a sequence ends and prefix positions are masked.
SequenceBatch make_batch(const PredictorShape& shape, std::span<const TrainingSequence* const> seqs);
SequenceBatch make_batch(const PredictorShape& shape, std::span<const TrainingSequence> seqs);

/// Unbounded store of every sequence collected so far.
class ReplayBuffer {
 public:
  void add(TrainingSequence seq) { data_.push_back(std::move(seq)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const std::vector<TrainingSequence>& sequences() const { return data_; }
  const TrainingSequence& operator[](std::size_t i) const { return data_[i]; }

  /// Uniform draw with replacement.
  std::vector<const TrainingSequence*> sample(std::size_t batch_size, Rng& rng) const;

  void save(const std::filesystem::path& path) const;
  static ReplayBuffer load(const std::filesystem::path& path);

 private:
  std::vector<TrainingSequence> data_;
};

/// Line-delimited dataset format: a version header line, then one JSON record per sequence.
inline constexpr int kDatasetFormatVersion = 1;

}  // namespace sis
