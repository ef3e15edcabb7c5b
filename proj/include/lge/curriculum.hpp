#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "lge/adam.hpp"
#include "lge/losses.hpp"
#include "lge/phantom.hpp"
#include "lge/segnet.hpp"

/// Difficulty-staged training: cumulative stage datasets, stage-dependent
/// batch size and Dice weights, and loss-spike re-selection between stages.
namespace lge::curriculum {

using phantom::Dataset;
using phantom::kDifficultyLevels;
using SampleId = std::int64_t;
using Partition = std::array<Dataset, kDifficultyLevels>;

struct StagePlan {
  int stage = 1;  // 1-based
  std::set<int> difficulties;
  int epochs = 50;
  int batch_size = 32;
  double w_fg = 0.6;
  double w_bg = 0.4;
  int oversample_multiplier = 2;
};

struct TrainConfig {
  int stages = kDifficultyLevels;
  double lr = 1e-4;
  double weight_decay = 1e-9;
  std::uint64_t seed = 1;
  std::array<int, kDifficultyLevels> epochs{50, 50, 50};
  std::array<int, kDifficultyLevels> batch_sizes{32, 4, 4};
  std::array<double, kDifficultyLevels> w_fg{0.6, 0.75, 0.8};
  std::array<double, kDifficultyLevels> w_bg{0.4, 0.25, 0.2};
  double alpha = 0.25;
  double beta = 0.5;
  double gamma = 2.0;
  double epsilon = 1e-6;
  double p_spike = 90.0;
  int spike_multiplier = 2;
  int baseline_batch_size = 32;

  void validate() const;
  /// Stage t includes difficulties 0..t-1.
  [[nodiscard]] std::vector<StagePlan> curriculum_plans() const;
  /// One stage over all difficulties with the summed epochs, the baseline
  /// batch size and the last stage's Dice weights.
  [[nodiscard]] StagePlan baseline_plan() const;
  [[nodiscard]] loss::LossConfig loss_config(const StagePlan& plan) const;
};

struct EpochLoss {
  int stage = 0;
  int epoch = 0;  // 1-based within the stage
  double mean_loss = 0.0;
};

struct TrainRecord {
  std::vector<EpochLoss> epoch_losses;
  /// End-of-stage per-sample hybrid loss over the stage dataset.
  std::vector<std::map<SampleId, double>> stage_losses;
  /// Ids flagged at the end of each stage (empty for the baseline).
  std::vector<std::set<SampleId>> flags;
  /// Ids that appeared in any minibatch of each stage.
  std::vector<std::set<SampleId>> ids_seen;
  /// Cumulative epoch count at the end of each stage.
  std::vector<int> stage_boundaries;
  std::uint64_t optimizer_steps = 0;
};

struct TrainResult {
  segnet::ModelParams params;  // rounded to checkpoint precision
  AdamState adam;
  TrainRecord record;
};

struct TrainHooks {
  std::function<void(int stage, int epoch, std::span<const SampleId> batch)> on_batch;
  std::function<void(const EpochLoss&)> on_epoch;
};

Partition partition_by_difficulty(const Dataset& ds);

/// Cumulative D_1 ⊆ ... ⊆ D_n, where D_t holds every sample with d <= t-1.
/// Requires n == number of difficulty levels.
std::vector<Dataset> stage_datasets(const Partition& partition, int n);

/// Ids whose loss strictly exceeds the nearest-rank p_spike percentile.
std::set<SampleId> flag_spike_samples(const std::map<SampleId, double>& losses,
                                      double p_spike);

/// Stage pool: every stage id once (dataset order), then multiplier-1 extra
/// copies of each previously flagged id. Flagged ids must belong to the stage.
std::vector<SampleId> stage_pool(const Dataset& stage_ds,
                                 const std::set<SampleId>& flagged_prev, int multiplier);

/// Shuffled minibatches covering `pool` once; the last may be short.
std::vector<std::vector<SampleId>> epoch_batches(std::vector<SampleId> pool,
                                                 int batch_size, PrngStream& stream);

/// Shuffle stream for a (stage, epoch) pair.
PrngStream shuffle_stream(std::uint64_t seed, int stage, int epoch);

TrainResult train(const Dataset& train_ds, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

TrainResult train_baseline(const Dataset& train_ds, const TrainConfig& cfg,
                           const TrainHooks& hooks = {});

/// `epoch_loss.csv` (stage,epoch,mean_loss) and `flags.csv` (stage,sample_id,loss).
void write_epoch_loss_csv(const TrainRecord& record, const std::filesystem::path& path);
void write_flags_csv(const TrainRecord& record, const std::filesystem::path& path);

}  // namespace lge::curriculum
