#include "lge/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "lge/curriculum.hpp"
#include "lge/errors.hpp"
#include "lge/segnet.hpp"
#include "lge/svg_plot.hpp"

namespace lge::cli {
namespace {

// Input the user can fix: reported with exit code 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UserError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw UserError(path.string() + ": write failed");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw UserError(dir.string() + ": cannot create directory" +
                    (ec ? " (" + ec.message() + ")" : std::string()));
  }
}

template <typename Fn>
int guarded(const char* name, std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UserError& e) {
    err << name << ": " << e.what() << '\n';
  } catch (const FormatError& e) {
    err << name << ": format error: " << e.what() << '\n';
  } catch (const InvalidArgument& e) {
    err << name << ": " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << name << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << name << ": internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kUserError;
}

}  // namespace

phantom::SplitResult split_for_run(const phantom::Dataset& ds, const RunConfig& cfg) {
  PrngStream stream(cfg.train.seed, streams::kSplit);
  return phantom::split_dataset(ds, cfg.train_fraction, stream);
}

int cmd_gen(const GenOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded("gen", err, [&] {
    phantom::GenConfig gc;
    gc.counts = opt.counts;
    gc.seed = opt.seed;
    gc.validate();
    if (gc.total() <= 0) throw UserError("empty dataset: counts sum to zero");
    ensure_dir(opt.out);
    const auto ds = phantom::generate_dataset(gc);
    try {
      phantom::write_dataset(ds, opt.out);
    } catch (const std::runtime_error& e) {
      throw UserError(e.what());
    }
    log << "wrote " << ds.size() << " samples to " << opt.out.string() << '\n';
    return int{kOk};
  });
}

int cmd_train(const TrainOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded("train", err, [&] {
    RunConfig cfg = opt.config ? RunConfig::load(*opt.config) : RunConfig{};
    if (opt.baseline) cfg.baseline = true;
    cfg.validate();
    const phantom::Dataset ds = phantom::read_dataset(opt.data);
    const auto split = split_for_run(ds, cfg);
    for (const auto& w : split.warnings) err << "train: warning: " << w << '\n';
    if (split.train.empty()) throw UserError("training split is empty");
    ensure_dir(opt.out);

    curriculum::TrainHooks hooks;
    if (opt.verbose) {
      hooks.on_epoch = [&](const curriculum::EpochLoss& e) {
        log << "stage " << e.stage << " epoch " << e.epoch << " loss " << e.mean_loss << '\n';
      };
    }
    const auto result = cfg.baseline ? curriculum::train_baseline(split.train, cfg.train, hooks)
                                     : curriculum::train(split.train, cfg.train, hooks);
    segnet::save_checkpoint(result.params, &result.adam, opt.out / kCheckpointName);
    curriculum::write_epoch_loss_csv(result.record, opt.out / kEpochLossName);
    curriculum::write_flags_csv(result.record, opt.out / kFlagsName);
    write_text(opt.out / kConfigEchoName, cfg.to_text());
    log << (cfg.baseline ? "baseline" : "curriculum") << " run: " << split.train.size()
        << " training samples, " << result.record.optimizer_steps << " optimizer steps\n";
    return int{kOk};
  });
}

int cmd_eval(const EvalOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded("eval", err, [&] {
    const auto ckpt_path = opt.run / kCheckpointName;
    if (!std::filesystem::exists(ckpt_path)) {
      throw UserError("missing checkpoint " + ckpt_path.string());
    }
    const auto cfg_path = opt.run / kConfigEchoName;
    if (!std::filesystem::exists(cfg_path)) {
      throw UserError("missing resolved config " + cfg_path.string());
    }
    const RunConfig cfg = RunConfig::load(cfg_path);
    const auto ckpt = segnet::load_checkpoint(ckpt_path);
    const phantom::Dataset ds = phantom::read_dataset(opt.data);
    const auto split = split_for_run(ds, cfg);
    if (split.test.empty()) throw UserError("test split is empty");
    const auto report = metrics::evaluate(ckpt.params, split.test, cfg.threshold);
    if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
    write_text(opt.out, metrics::format_report_csv(report));
    log << "evaluated " << report.rows.size() << " test samples; median dice "
        << report.aggregates.median_dice << '\n';
    return int{kOk};
  });
}

std::vector<CompareRow> compare_reports(const metrics::EvalReport& a,
                                        const metrics::EvalReport& b) {
  std::map<std::int64_t, const metrics::EvalRow*> ra, rb;
  for (const auto& r : a.rows) ra[r.id] = &r;
  for (const auto& r : b.rows) rb[r.id] = &r;
  std::vector<std::int64_t> only_a, only_b;
  for (const auto& [id, r] : ra) {
    if (!rb.contains(id)) only_a.push_back(id);
  }
  for (const auto& [id, r] : rb) {
    if (!ra.contains(id)) only_b.push_back(id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::ostringstream msg;
    msg << "sample id sets differ; only in A: {";
    for (std::size_t i = 0; i < only_a.size(); ++i) msg << (i ? "," : "") << only_a[i];
    msg << "}; only in B: {";
    for (std::size_t i = 0; i < only_b.size(); ++i) msg << (i ? "," : "") << only_b[i];
    msg << "}";
    throw InvalidArgument(msg.str());
  }

  std::vector<double> dice_a, dice_b, err_a, err_b;
  for (const auto& [id, r] : ra) {
    const auto* s = rb.at(id);
    dice_a.push_back(r->dice);
    dice_b.push_back(s->dice);
    err_a.push_back(std::abs(r->gt_burden - r->pred_burden));
    err_b.push_back(std::abs(s->gt_burden - s->pred_burden));
  }
  auto row = [](const char* name, const std::vector<double>& x, const std::vector<double>& y) {
    CompareRow out;
    out.metric = name;
    try {
      out.result = metrics::wilcoxon_signed_rank(x, y);
    } catch (const DegenerateInput& e) {
      out.note = std::string("degenerate-input: ") + e.what();
    }
    return out;
  };
  return {row("dice", dice_a, dice_b), row("abs_burden_error", err_a, err_b)};
}

std::string format_compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "metric,n_eff,statistic,p_value,method,note\n";
  for (const auto& r : rows) {
    out << r.metric << ',';
    if (r.result) {
      out << r.result->n_effective << ',' << fmt(r.result->statistic) << ','
          << fmt(r.result->p_value) << ',' << metrics::method_name(r.result->method) << ',';
    } else {
      out << "0,,,,";
    }
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << note << '\n';
  }
  return out.str();
}

int cmd_compare(const CompareOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded("compare", err, [&] {
    const auto a = metrics::read_report_csv(opt.a);
    const auto b = metrics::read_report_csv(opt.b);
    const auto rows = compare_reports(a, b);
    if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
    write_text(opt.out, format_compare_csv(rows));
    for (const auto& r : rows) {
      log << r.metric << ": ";
      if (r.result) {
        log << "p = " << r.result->p_value << " (n_eff " << r.result->n_effective << ", "
            << metrics::method_name(r.result->method) << ")\n";
      } else {
        log << r.note << '\n';
      }
    }
    return int{kOk};
  });
}

int cmd_report(const ReportOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded("report", err, [&] {
    const auto report = metrics::read_report_csv(opt.eval);
    ensure_dir(opt.out);
    write_text(opt.out / "scatter.svg", scatter_svg(report));
    write_text(opt.out / "bland_altman.svg", bland_altman_svg(report));
    log << "wrote scatter.svg and bland_altman.svg to " << opt.out.string() << '\n';
    return int{kOk};
  });
}

int run_cli(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Curriculum-staged myocardial scar segmentation on synthetic LGE phantoms"};
  app.require_subcommand(1);

  GenOptions gen;
  std::string counts_text = "100,100,100";
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic phantom dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--counts", counts_text, "Samples per difficulty: easy,medium,hard");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");

  TrainOptions train;
  std::string train_config;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset's training split");
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--config", train_config, "key=value run configuration");
  train_cmd->add_option("--out", train.out, "Run directory")->required();
  train_cmd->add_flag("--baseline", train.baseline, "Single-stage training on all samples");
  train_cmd->add_flag("--verbose", train.verbose, "Print per-epoch losses");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run on its test split");
  eval_cmd->add_option("--data", eval.data, "Dataset directory")->required();
  eval_cmd->add_option("--run", eval.run, "Run directory from train")->required();
  eval_cmd->add_option("--out", eval.out, "Report CSV path")->required();

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Paired Wilcoxon tests between two reports");
  cmp_cmd->add_option("--a", cmp.a, "First report CSV")->required();
  cmp_cmd->add_option("--b", cmp.b, "Second report CSV")->required();
  cmp_cmd->add_option("--out", cmp.out, "Comparison CSV path")->required();

  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Render scatter and Bland-Altman SVG plots");
  rep_cmd->add_option("--eval", rep.eval, "Report CSV from eval")->required();
  rep_cmd->add_option("--out", rep.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "run with --help for usage\n";
    return kUserError;
  }

  if (gen_cmd->parsed()) {
    std::array<int, phantom::kDifficultyLevels> counts{};
    char tail = 0;
    if (std::sscanf(counts_text.c_str(), "%d,%d,%d%c", &counts[0], &counts[1], &counts[2],
                    &tail) != 3) {
      err << "gen: --counts expects three comma-separated integers, got \"" << counts_text
          << "\"\n";
      return kUserError;
    }
    gen.counts = counts;
    return cmd_gen(gen, log, err);
  }
  if (train_cmd->parsed()) {
    if (!train_config.empty()) train.config = train_config;
    return cmd_train(train, log, err);
  }
  if (eval_cmd->parsed()) return cmd_eval(eval, log, err);
  if (cmp_cmd->parsed()) return cmd_compare(cmp, log, err);
  if (rep_cmd->parsed()) return cmd_report(rep, log, err);
  return kUserError;
}

}  // namespace lge::cli
