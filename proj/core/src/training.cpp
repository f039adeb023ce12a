#include "lipread/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <spdlog/spdlog.h>

#include "lipread/errors.hpp"

namespace lipread {
namespace {

/// Largest-remainder apportionment of n items over the fractions.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& fractions) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = static_cast<double>(n) * fractions[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    used += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

std::vector<Split> split_order(SplitMode mode) {
  if (mode == SplitMode::two_way) return {Split::train, Split::test};
  return {Split::train, Split::val, Split::test};
}

/// Assigns the (already shuffled) items to splits in order.
template <typename Assign>
void assign_in_order(std::size_t n, const SplitConfig& cfg, Assign&& assign) {
  const auto counts = apportion(n, cfg.fractions);
  const auto order = split_order(cfg.mode);
  std::size_t i = 0;
  for (std::size_t s = 0; s < counts.size(); ++s)
    for (std::size_t k = 0; k < counts[s]; ++k) assign(i++, order[s]);
}

bool finite(const EpochRecord& r) {
  return std::isfinite(r.train_loss) && std::isfinite(r.train_acc) && std::isfinite(r.val_loss) &&
         std::isfinite(r.val_acc);
}

}  // namespace

std::string to_string(SplitMode mode) { return mode == SplitMode::two_way ? "two_way" : "three_way"; }

SplitMode parse_split_mode(const std::string& name) {
  if (name == "two" || name == "two_way") return SplitMode::two_way;
  if (name == "three" || name == "three_way") return SplitMode::three_way;
  throw InvalidArgument("unknown split mode '" + name + "'");
}

std::string to_string(SplitGroup group) { return group == SplitGroup::clip ? "clip" : "participant"; }

SplitGroup parse_split_group(const std::string& name) {
  if (name == "clip") return SplitGroup::clip;
  if (name == "participant") return SplitGroup::participant;
  throw InvalidArgument("unknown split grouping '" + name + "'");
}

SplitConfig SplitConfig::two_way(std::uint64_t seed) {
  SplitConfig c;
  c.seed = seed;
  return c;
}

SplitConfig SplitConfig::three_way(std::uint64_t seed) {
  SplitConfig c;
  c.mode = SplitMode::three_way;
  c.fractions = {0.7, 0.15, 0.15};
  c.seed = seed;
  return c;
}

void SplitConfig::validate() const {
  const std::size_t want = mode == SplitMode::two_way ? 2 : 3;
  if (fractions.size() != want)
    throw InvalidArgument(to_string(mode) + " split needs " + std::to_string(want) + " fractions");
  double sum = 0;
  for (double f : fractions) {
    if (!(f > 0)) throw InvalidArgument("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("split fractions must sum to 1");
}

ClipManifest split_manifest(const ClipManifest& manifest, const SplitConfig& cfg) {
  cfg.validate();
  if (manifest.empty()) throw EmptyCorpus("cannot split an empty manifest");
  const std::size_t splits = cfg.fractions.size();

  ClipManifest out = manifest;
  out.sort();
  auto& records = out.mutable_records();
  std::mt19937_64 rng(cfg.seed);

  if (cfg.group_by == SplitGroup::participant) {
    std::set<std::string> unique;
    for (const auto& r : records) unique.insert(r.participant_id);
    std::vector<std::string> people(unique.begin(), unique.end());
    if (people.size() < splits)
      throw TooFewSamples(std::to_string(people.size()) + " participants cannot fill " + std::to_string(splits) +
                          " splits");
    std::shuffle(people.begin(), people.end(), rng);
    std::map<std::string, Split> assigned;
    assign_in_order(people.size(), cfg, [&](std::size_t i, Split s) { assigned[people[i]] = s; });
    for (auto& r : records) r.split = assigned.at(r.participant_id);
    return out;
  }

  std::vector<std::vector<std::size_t>> groups;
  if (cfg.stratified) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < records.size(); ++i) by_label[records[i].label].push_back(i);
    for (auto& [label, idx] : by_label) {
      if (idx.size() < splits)
        throw TooFewSamples("class '" + label + "' has " + std::to_string(idx.size()) + " records, " +
                            std::to_string(splits) + " splits need at least one each");
      groups.push_back(std::move(idx));
    }
  } else {
    if (records.size() < splits) throw TooFewSamples("fewer records than splits");
    groups.emplace_back(records.size());
    std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
  }
  for (auto& idx : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    assign_in_order(idx.size(), cfg, [&](std::size_t i, Split s) { records[idx[i]].split = s; });
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (batch_size < 1) throw InvalidArgument("batch size must be at least 1");
  if (early_stopping_patience < 1) throw InvalidArgument("patience must be at least 1");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
    throw InvalidArgument("learning rate must be finite and non-negative");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::early_stop: return "early_stop";
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::diverged: return "diverged";
  }
  return "?";
}

StopReason parse_stop_reason(const std::string& name) {
  if (name == "early_stop") return StopReason::early_stop;
  if (name == "max_epochs") return StopReason::max_epochs;
  if (name == "diverged") return StopReason::diverged;
  throw InvalidArgument("unknown stop reason '" + name + "'");
}

ClipScores score_distributions(const nn::Tensor& distributions, const std::vector<int>& labels) {
  const int n = distributions.dim(0), c = distributions.dim(1);
  if (static_cast<std::size_t>(n) != labels.size()) throw ShapeMismatch("label count mismatch");
  ClipScores s;
  if (n == 0) return s;
  for (int i = 0; i < n; ++i) {
    const double* row = distributions.data() + static_cast<std::size_t>(i) * c;
    const int label = labels[static_cast<std::size_t>(i)];
    s.loss -= std::log(std::max(row[label], 1e-12));
    if (std::max_element(row, row + c) - row == label) s.accuracy += 1;
  }
  s.loss /= n;
  s.accuracy /= n;
  return s;
}

std::vector<nn::Tensor> encode_records(const TrainedModel& model, const std::vector<ClipRecord>& records,
                                       const FeaturePipeline& pipeline) {
  std::vector<nn::Tensor> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(model.encode(pipeline.from_record(r)));
  return out;
}

nn::Tensor predict_batch(const TrainedModel& model, const std::vector<nn::Tensor>& clips, int batch_size) {
  const int c = model.spec().num_classes;
  nn::Tensor out({static_cast<int>(clips.size()), c});
  for (std::size_t b = 0; b < clips.size(); b += static_cast<std::size_t>(batch_size)) {
    const std::size_t e = std::min(clips.size(), b + static_cast<std::size_t>(batch_size));
    const nn::Tensor dist =
        model.predict_encoded(nn::stack(std::span<const nn::Tensor>(clips.data() + b, clips.data() + e)));
    std::copy(dist.data(), dist.data() + dist.size(), out.data() + b * static_cast<std::size_t>(c));
  }
  return out;
}

TrainingLog train(TrainedModel& model, const ClipManifest& manifest, const TrainConfig& cfg,
                  const FeaturePipeline& pipeline, const TrainHooks& hooks) {
  cfg.validate();
  if (!(model.vocab() == manifest.vocab()))
    throw InvalidArgument("model vocabulary does not match the manifest vocabulary");
  const auto train_records = manifest.in_split(Split::train);
  if (train_records.empty()) throw EmptySplit("manifest has no train split; split it first");

  TrainingLog log;
  log.method = to_string(model.spec().method);
  auto monitor_records = manifest.in_split(Split::val);
  if (monitor_records.empty()) {
    monitor_records = manifest.in_split(Split::test);
    log.monitor_split = "test";
  }
  if (monitor_records.empty()) {
    monitor_records = train_records;
    log.monitor_split = "train";
  }

  const auto labels_of = [&](const std::vector<ClipRecord>& rs) {
    std::vector<int> out;
    for (const auto& r : rs) out.push_back(manifest.vocab().id(r.label));
    return out;
  };
  const std::vector<nn::Tensor> train_x = encode_records(model, train_records, pipeline);
  const std::vector<int> train_y = labels_of(train_records);
  const std::vector<nn::Tensor> monitor_x = encode_records(model, monitor_records, pipeline);
  const std::vector<int> monitor_y = labels_of(monitor_records);
  if (hooks.on_data_ready) hooks.on_data_ready(train_x.size(), monitor_x.size());
  model.set_fingerprint({cfg.seed, manifest.content_hash()});

  // direct_cnn learns from individual frames; the others from whole clips.
  const bool per_frame = model.spec().method == Method::direct_cnn;
  const nn::Shape sample_shape = model.sample_shape();
  const std::size_t sample_size = nn::shape_size(sample_shape);
  std::vector<std::pair<std::size_t, std::size_t>> samples;  // (clip, offset)
  for (std::size_t i = 0; i < train_x.size(); ++i) {
    const std::size_t per_clip = per_frame ? train_x[i].size() / sample_size : 1;
    for (std::size_t k = 0; k < per_clip; ++k) samples.emplace_back(i, k * sample_size);
  }

  auto params = model.parameters();
  auto optimizer = nn::make_optimizer(cfg.optimizer, cfg.learning_rate);
  std::mt19937_64 rng(cfg.seed);
  const auto start = std::chrono::steady_clock::now();
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<nn::Tensor> best_weights;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    model.network().reseed(cfg.seed * 7919ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(samples.begin(), samples.end(), rng);

    for (std::size_t b = 0; b < samples.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(samples.size(), b + static_cast<std::size_t>(cfg.batch_size));
      nn::Shape batch_shape{static_cast<int>(e - b)};
      batch_shape.insert(batch_shape.end(), sample_shape.begin(), sample_shape.end());
      nn::Tensor x(batch_shape);
      std::vector<int> y;
      for (std::size_t k = b; k < e; ++k) {
        const auto [clip, offset] = samples[k];
        const double* src = train_x[clip].data() + offset;
        std::copy(src, src + sample_size, x.data() + (k - b) * sample_size);
        y.push_back(train_y[clip]);
      }
      nn::zero_grad(params);
      nn::Tensor grad;
      const double loss = nn::softmax_cross_entropy(model.network().forward(x), y, &grad);
      if (!std::isfinite(loss)) {
        log.stop_reason = StopReason::diverged;
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch), log);
      }
      model.network().backward(grad);
      optimizer->step(params);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    const auto tr = score_distributions(predict_batch(model, train_x), train_y);
    const auto va = score_distributions(predict_batch(model, monitor_x), monitor_y);
    rec.train_loss = tr.loss;
    rec.train_acc = tr.accuracy;
    rec.val_loss = va.loss;
    rec.val_acc = va.accuracy;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (hooks.on_epoch_end) hooks.on_epoch_end(rec, model);
    if (!finite(rec)) {
      log.stop_reason = StopReason::diverged;
      throw TrainingDiverged("non-finite metrics at epoch " + std::to_string(epoch), log);
    }
    log.epochs.push_back(rec);
    spdlog::info("epoch {:3d}  loss {:.4f} acc {:.3f}  {}_loss {:.4f} {}_acc {:.3f}  ({:.1f}s)", epoch,
                 rec.train_loss, rec.train_acc, log.monitor_split, rec.val_loss, log.monitor_split, rec.val_acc,
                 rec.wall_time);

    if (rec.val_loss < best_loss) {
      best_loss = rec.val_loss;
      log.best_epoch = epoch;
      if (cfg.early_stopping) best_weights = model.weights();
    } else if (cfg.early_stopping && epoch - log.best_epoch >= cfg.early_stopping_patience) {
      log.stop_reason = StopReason::early_stop;
      break;
    }
  }
  if (cfg.early_stopping && !best_weights.empty()) model.set_weights(best_weights);
  return log;
}

}  // namespace lipread
