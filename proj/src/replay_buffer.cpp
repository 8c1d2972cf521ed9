// SPDX-License-Identifier: Apache-2.0
#include "sis/replay_buffer.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace sis {
namespace {

using nlohmann::json;

std::vector<int> widen(std::span<const Value> v) { return {v.begin(), v.end()}; }

std::vector<Value> narrow(const json& j) {
  std::vector<Value> out;
  for (const auto& x : j) {
    const int v = x.get<int>();
    if (v < 0 || v > 255) throw std::runtime_error("dataset: value out of range");
    out.push_back(static_cast<Value>(v));
  }
  return out;
}

json to_json(const TrainingSequence& s) {
  json prefix_locals = json::array();
  for (std::size_t k = 0; k < s.prefix.length(); ++k) prefix_locals.push_back(widen(s.prefix.local(k)));
  json steps = json::array();
  for (const auto& st : s.steps) steps.push_back({st.action, widen(st.local.values), widen(st.source.values)});
  return {{"prefix", {{"locals", prefix_locals}, {"actions", s.prefix.raw_actions()}}}, {"steps", steps}};
}

TrainingSequence from_json(const json& j) {
  TrainingSequence s;
  const auto& locals = j.at("prefix").at("locals");
  const auto& actions = j.at("prefix").at("actions");
  if (locals.empty() || actions.size() + 1 != locals.size())
    throw std::runtime_error("dataset: prefix must hold one more local state than actions");
  s.prefix = LocalHistory(LocalState{narrow(locals[0])});
  for (std::size_t k = 0; k < actions.size(); ++k) s.prefix.extend(actions[k].get<int>(), narrow(locals[k + 1]));
  for (const auto& st : j.at("steps")) {
    if (!st.is_array() || st.size() != 3) throw std::runtime_error("dataset: malformed step");
    s.steps.push_back({st[0].get<int>(), LocalState{narrow(st[1])}, SourceValue{narrow(st[2])}});
  }
  return s;
}

}  // namespace

LocalHistory TrainingSequence::full_history() const {
  LocalHistory d = prefix;
  for (const auto& st : steps) d.extend(st.action, st.local.values);
  return d;
}

SequenceBatch make_batch(const PredictorShape& shape, std::span<const TrainingSequence* const> seqs) {
  SequenceBatch batch;
  batch.batch = static_cast<int>(seqs.size());
  const int V = static_cast<int>(shape.source_card.size());
  for (const auto* s : seqs)
    if (!s->steps.empty()) batch.steps = std::max(batch.steps, static_cast<int>(s->sequence_length()) - 1);
  const int in = shape.input_dim();
  for (int t = 0; t < batch.steps; ++t) {
    batch.inputs.push_back(Eigen::MatrixXd::Zero(in, batch.batch));
    batch.targets.emplace_back(static_cast<std::size_t>(batch.batch * V), 0);
    batch.mask.push_back(Eigen::RowVectorXd::Zero(batch.batch));
  }
  for (int b = 0; b < batch.batch; ++b) {
    const auto& s = *seqs[static_cast<std::size_t>(b)];
    if (s.steps.empty()) continue;
    const LocalHistory d = s.full_history();
    const int len = static_cast<int>(s.sequence_length()) - 1;
    for (int t = 0; t < len; ++t) {
      const int prev = t == 0 ? -1 : d.action(static_cast<std::size_t>(t - 1));
      for (int idx : encode_step(shape, prev, d.local(static_cast<std::size_t>(t))))
        batch.inputs[static_cast<std::size_t>(t)](idx, b) = 1.0;
    }
    const std::size_t off = s.masked_prefix();
    for (std::size_t k = 0; k < s.steps.size(); ++k) {
      const auto t = off + k;
      batch.mask[t](b) = 1.0;
      for (int v = 0; v < V; ++v)
        batch.targets[t][static_cast<std::size_t>(b * V + v)] = s.steps[k].source.values[static_cast<std::size_t>(v)];
    }
  }
  return batch;
}

SequenceBatch make_batch(const PredictorShape& shape, std::span<const TrainingSequence> seqs) {
  std::vector<const TrainingSequence*> ptrs;
  ptrs.reserve(seqs.size());
  for (const auto& s : seqs) ptrs.push_back(&s);
  return make_batch(shape, ptrs);
}

std::vector<const TrainingSequence*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<const TrainingSequence*> out;
  if (data_.empty()) return out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out.push_back(&data_[rng.below(data_.size())]);
  return out;
}

void ReplayBuffer::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << json{{"format", "sis-dataset"}, {"version", kDatasetFormatVersion}, {"records", data_.size()}}.dump()
        << '\n';
    for (const auto& s : data_) out << to_json(s).dump() << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ReplayBuffer ReplayBuffer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset: missing header in " + path.string());
  const auto header = json::parse(line);
  if (header.value("format", "") != "sis-dataset" || header.value("version", -1) != kDatasetFormatVersion)
    throw std::runtime_error("dataset: unsupported header in " + path.string());
  ReplayBuffer buf;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    buf.add(from_json(json::parse(line)));
  }
  if (header.contains("records") && header["records"].get<std::size_t>() != buf.size())
    throw std::runtime_error("dataset: truncated file " + path.string());
  return buf;
}

}  // namespace sis
