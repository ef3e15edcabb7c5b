#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lge/metrics.hpp"
#include "lge/run_config.hpp"

namespace lge::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kUserError = 2 };

inline constexpr const char* kCheckpointName = "model.lgep";
inline constexpr const char* kEpochLossName = "epoch_loss.csv";
inline constexpr const char* kFlagsName = "flags.csv";
inline constexpr const char* kConfigEchoName = "config.txt";

struct GenOptions {
  std::filesystem::path out;
  std::array<int, phantom::kDifficultyLevels> counts{100, 100, 100};
  std::uint64_t seed = 1;
};

struct TrainOptions {
  std::filesystem::path data;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  bool baseline = false;
  bool verbose = false;
};

struct EvalOptions {
  std::filesystem::path data;
  std::filesystem::path run;
  std::filesystem::path out;
};

struct CompareOptions {
  std::filesystem::path a;
  std::filesystem::path b;
  std::filesystem::path out;
};

struct ReportOptions {
  std::filesystem::path eval;
  std::filesystem::path out;
};

/// One Wilcoxon row of a comparison table.
struct CompareRow {
  std::string metric;
  std::optional<metrics::WilcoxonResult> result;
  std::string note;
};

/// Paired Dice and paired absolute burden error, matched by sample id.
/// Throws InvalidArgument listing the symmetric difference of the id sets.
std::vector<CompareRow> compare_reports(const metrics::EvalReport& a,
                                        const metrics::EvalReport& b);
std::string format_compare_csv(const std::vector<CompareRow>& rows);

/// Train/test halves exactly as cmd_train and cmd_eval derive them.
phantom::SplitResult split_for_run(const phantom::Dataset& ds, const RunConfig& cfg);

int cmd_gen(const GenOptions& opt, std::ostream& log, std::ostream& err);
int cmd_train(const TrainOptions& opt, std::ostream& log, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& log, std::ostream& err);
int cmd_compare(const CompareOptions& opt, std::ostream& log, std::ostream& err);
int cmd_report(const ReportOptions& opt, std::ostream& log, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace lge::cli
