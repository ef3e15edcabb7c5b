#include "lge/curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "lge/errors.hpp"
#include "lge/stats.hpp"

namespace lge::curriculum {
namespace {

// Spike flags live for exactly one following stage.
TrainResult run_plans(const Dataset& train_ds, const TrainConfig& cfg,
                      const std::vector<StagePlan>& plans, bool flag_spikes,
                      const TrainHooks& hooks) {
  cfg.validate();
  if (train_ds.empty()) throw InvalidArgument("train: empty training set");

  std::unordered_map<SampleId, std::size_t> index;
  for (std::size_t i = 0; i < train_ds.samples.size(); ++i) {
    if (!index.emplace(train_ds.samples[i].id, i).second) {
      throw InvalidArgument("train: duplicate sample id " +
                            std::to_string(train_ds.samples[i].id));
    }
  }
  const Partition partition = partition_by_difficulty(train_ds);

  PrngStream init_stream(cfg.seed, streams::kInit);
  TrainResult result;
  result.params = segnet::init_params(init_stream);
  result.adam = AdamState::for_params(result.params.tensors, cfg.lr, cfg.weight_decay);
  const auto decay_mask = segnet::ModelParams::decay_mask();

  TrainRecord& rec = result.record;
  std::set<SampleId> flagged_prev;
  int epochs_done = 0;

  for (const StagePlan& plan : plans) {
    Dataset stage_ds;
    for (int d : plan.difficulties) {
      const auto& cls = partition[d].samples;
      stage_ds.samples.insert(stage_ds.samples.end(), cls.begin(), cls.end());
    }
    const loss::LossConfig lc = cfg.loss_config(plan);
    const std::vector<SampleId> pool =
        stage_pool(stage_ds, flagged_prev, plan.oversample_multiplier);
    std::set<SampleId> seen;

    for (int epoch = 1; epoch <= plan.epochs && !pool.empty(); ++epoch) {
      PrngStream shuffle = shuffle_stream(cfg.seed, plan.stage, epoch);
      double loss_sum = 0.0;
      for (const auto& batch : epoch_batches(pool, plan.batch_size, shuffle)) {
        if (hooks.on_batch) hooks.on_batch(plan.stage, epoch, batch);
        std::vector<Grid> acc = segnet::ModelParams::zeros().tensors;
        for (SampleId id : batch) {
          seen.insert(id);
          const auto& s = train_ds.samples[index.at(id)];
          const auto fwd = segnet::forward(result.params, s.image, s.myo);
          const auto hv = loss::hybrid_loss(s.scar, fwd.prob, s.myo, lc);
          loss_sum += hv.breakdown.total;
          const auto g = segnet::backward(result.params, fwd.trace, hv.grad);
          for (std::size_t k = 0; k < acc.size(); ++k) {
            for (std::size_t i = 0; i < acc[k].size(); ++i) acc[k][i] += g[k][i];
          }
        }
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (auto& t : acc) {
          for (double& v : t.values) v *= scale;
        }
        adam_step(result.params.tensors, acc, result.adam, decay_mask);
        ++rec.optimizer_steps;
      }
      const EpochLoss el{plan.stage, epoch, loss_sum / static_cast<double>(pool.size())};
      rec.epoch_losses.push_back(el);
      if (hooks.on_epoch) hooks.on_epoch(el);
    }
    epochs_done += plan.epochs;
    rec.stage_boundaries.push_back(epochs_done);
    rec.ids_seen.push_back(std::move(seen));

    std::map<SampleId, double> end_losses;
    for (const auto& s : stage_ds.samples) {
      const Grid prob = segnet::predict(result.params, s.image, s.myo);
      end_losses[s.id] = loss::hybrid_loss(s.scar, prob, s.myo, lc).breakdown.total;
    }
    std::set<SampleId> flags;
    if (flag_spikes && !end_losses.empty()) flags = flag_spike_samples(end_losses, cfg.p_spike);
    rec.stage_losses.push_back(std::move(end_losses));
    rec.flags.push_back(flags);
    flagged_prev = std::move(flags);
  }

  result.params.quantize_to_float();
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (stages != kDifficultyLevels) {
    throw InvalidArgument("train config: stages must equal the number of difficulty levels (" +
                          std::to_string(kDifficultyLevels) + ")");
  }
  if (!(lr > 0.0)) throw InvalidArgument("train config: lr must be > 0");
  if (weight_decay < kMinWeightDecay || weight_decay > kMaxWeightDecay) {
    throw InvalidArgument("train config: weight_decay must lie in [1e-14, 1e-9]");
  }
  for (int t = 0; t < stages; ++t) {
    if (epochs[t] < 0) throw InvalidArgument("train config: epochs must be >= 0");
    if (batch_sizes[t] < 1) throw InvalidArgument("train config: batch size must be >= 1");
    loss::LossConfig lc{w_fg[t], w_bg[t], epsilon, alpha, gamma, beta};
    lc.validate();
  }
  if (!(p_spike > 0.0 && p_spike <= 100.0)) {
    throw InvalidArgument("train config: p_spike must lie in (0, 100]");
  }
  if (spike_multiplier < 1) throw InvalidArgument("train config: spike multiplier must be >= 1");
  if (baseline_batch_size < 1) throw InvalidArgument("train config: baseline batch size must be >= 1");
}

std::vector<StagePlan> TrainConfig::curriculum_plans() const {
  std::vector<StagePlan> plans;
  for (int t = 1; t <= stages; ++t) {
    StagePlan p;
    p.stage = t;
    for (int d = 0; d < t; ++d) p.difficulties.insert(d);
    p.epochs = epochs[t - 1];
    p.batch_size = batch_sizes[t - 1];
    p.w_fg = w_fg[t - 1];
    p.w_bg = w_bg[t - 1];
    p.oversample_multiplier = spike_multiplier;
    plans.push_back(p);
  }
  return plans;
}

StagePlan TrainConfig::baseline_plan() const {
  StagePlan p;
  p.stage = 1;
  for (int d = 0; d < kDifficultyLevels; ++d) p.difficulties.insert(d);
  p.epochs = std::accumulate(epochs.begin(), epochs.begin() + stages, 0);
  p.batch_size = baseline_batch_size;
  p.w_fg = w_fg[stages - 1];
  p.w_bg = w_bg[stages - 1];
  p.oversample_multiplier = 1;
  return p;
}

loss::LossConfig TrainConfig::loss_config(const StagePlan& plan) const {
  return loss::LossConfig{plan.w_fg, plan.w_bg, epsilon, alpha, gamma, beta};
}

Partition partition_by_difficulty(const Dataset& ds) {
  Partition p;
  for (const auto& s : ds.samples) {
    if (s.difficulty < 0 || s.difficulty >= kDifficultyLevels) {
      throw InvalidArgument("partition: difficulty outside {0,1,2} for id " +
                            std::to_string(s.id));
    }
    p[s.difficulty].samples.push_back(s);
  }
  for (auto& cls : p) cls.manifest = ds.manifest;
  return p;
}

std::vector<Dataset> stage_datasets(const Partition& partition, int n) {
  if (n != kDifficultyLevels) {
    throw InvalidArgument("stage_datasets: " + std::to_string(n) + " stages requested for " +
                          std::to_string(kDifficultyLevels) + " difficulty levels");
  }
  std::vector<Dataset> stages;
  Dataset cumulative;
  for (int t = 0; t < n; ++t) {
    const auto& cls = partition[t].samples;
    cumulative.samples.insert(cumulative.samples.end(), cls.begin(), cls.end());
    cumulative.manifest = partition[t].manifest;
    stages.push_back(cumulative);
  }
  return stages;
}

std::set<SampleId> flag_spike_samples(const std::map<SampleId, double>& losses,
                                      double p_spike) {
  if (losses.empty()) throw InvalidArgument("flag_spike_samples: no losses");
  std::vector<double> values;
  values.reserve(losses.size());
  for (const auto& [id, l] : losses) values.push_back(l);
  const double threshold = percentile_nearest_rank(values, p_spike);
  std::set<SampleId> flagged;
  for (const auto& [id, l] : losses) {
    if (l > threshold) flagged.insert(id);
  }
  return flagged;
}

std::vector<SampleId> stage_pool(const Dataset& stage_ds,
                                 const std::set<SampleId>& flagged_prev, int multiplier) {
  if (multiplier < 1) throw InvalidArgument("stage_pool: multiplier must be >= 1");
  std::vector<SampleId> pool;
  std::set<SampleId> members;
  for (const auto& s : stage_ds.samples) {
    pool.push_back(s.id);
    members.insert(s.id);
  }
  for (SampleId id : flagged_prev) {
    if (!members.contains(id)) {
      throw InvalidArgument("stage_pool: flagged id " + std::to_string(id) +
                            " is not part of the stage dataset");
    }
    for (int k = 1; k < multiplier; ++k) pool.push_back(id);
  }
  return pool;
}

std::vector<std::vector<SampleId>> epoch_batches(std::vector<SampleId> pool, int batch_size,
                                                 PrngStream& stream) {
  if (batch_size < 1) throw InvalidArgument("epoch_batches: batch size must be >= 1");
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[stream.below(i)]);
  }
  std::vector<std::vector<SampleId>> batches;
  for (std::size_t start = 0; start < pool.size(); start += batch_size) {
    const std::size_t end = std::min(pool.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(start),
                         pool.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

PrngStream shuffle_stream(std::uint64_t seed, int stage, int epoch) {
  return PrngStream(seed, streams::kShuffleBase + static_cast<std::uint64_t>(stage) * 65536 +
                              static_cast<std::uint64_t>(epoch));
}

TrainResult train(const Dataset& train_ds, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  return run_plans(train_ds, cfg, cfg.curriculum_plans(), true, hooks);
}

TrainResult train_baseline(const Dataset& train_ds, const TrainConfig& cfg,
                           const TrainHooks& hooks) {
  cfg.validate();
  return run_plans(train_ds, cfg, {cfg.baseline_plan()}, false, hooks);
}

}  // namespace lge::curriculum
