#include <charconv>
#include <cstdio>
#include <fstream>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "lge/errors.hpp"
#include "lge/metrics.hpp"

namespace lge::metrics {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw FormatError(where + ": \"" + s + "\" is not a number");
  }
  return v;
}

}  // namespace

std::string format_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "id,dice,gt_burden,pred_burden\n";
  for (const auto& r : report.rows) {
    out << r.id << ',' << fmt(r.dice) << ',' << fmt(r.gt_burden) << ',' << fmt(r.pred_burden)
        << '\n';
  }
  const Aggregates& a = report.aggregates;
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::optional<double> mean_diff, lo, hi;
  if (a.bland_altman) {
    mean_diff = a.bland_altman->mean_diff;
    lo = a.bland_altman->loa_low;
    hi = a.bland_altman->loa_high;
  }
  out << "#agg,median_dice," << fmt(a.median_dice) << '\n';
  out << "#agg,mean_dice," << fmt(a.mean_dice) << '\n';
  out << "#agg,pearson_r," << opt(a.pearson_r) << '\n';
  out << "#agg,ba_mean_diff," << opt(mean_diff) << '\n';
  out << "#agg,ba_loa_low," << opt(lo) << '\n';
  out << "#agg,ba_loa_high," << opt(hi) << '\n';
  return out.str();
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << format_report_csv(report);
}

EvalReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open report");
  std::string line;
  if (!std::getline(in, line) || split_commas(line) !=
                                     std::vector<std::string>{"id", "dice", "gt_burden",
                                                              "pred_burden"}) {
    throw FormatError(path.string() + ": row 1: expected header id,dice,gt_burden,pred_burden");
  }
  EvalReport report;
  std::map<std::string, std::optional<double>> agg;
  int row = 1;
  std::set<std::int64_t> seen;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ": row " + std::to_string(row);
    const auto f = split_commas(line);
    if (f[0] == "#agg") {
      if (f.size() != 3) throw FormatError(where + ": aggregate line needs 3 fields");
      agg[f[1]] = f[2].empty() ? std::nullopt : std::optional<double>(parse_double(f[2], where));
      continue;
    }
    if (f.size() != 4) {
      throw FormatError(where + ": expected 4 fields, found " + std::to_string(f.size()));
    }
    EvalRow r;
    std::int64_t id = 0;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size()) {
      throw FormatError(where + ": id \"" + f[0] + "\" is not an integer");
    }
    if (!seen.insert(id).second) throw FormatError(where + ": duplicate id " + f[0]);
    r.id = id;
    r.dice = parse_double(f[1], where);
    r.gt_burden = parse_double(f[2], where);
    r.pred_burden = parse_double(f[3], where);
    for (double v : {r.dice, r.gt_burden, r.pred_burden}) {
      if (v < 0.0 || v > 1.0) throw FormatError(where + ": value outside [0, 1]");
    }
    report.rows.push_back(r);
  }
  if (report.rows.empty()) throw FormatError(path.string() + ": report has no rows");

  Aggregates& a = report.aggregates;
  auto get = [&](const char* key) -> std::optional<double> {
    const auto it = agg.find(key);
    return it == agg.end() ? std::nullopt : it->second;
  };
  a.median_dice = get("median_dice").value_or(0.0);
  a.mean_dice = get("mean_dice").value_or(0.0);
  a.pearson_r = get("pearson_r");
  if (get("ba_mean_diff") && get("ba_loa_low") && get("ba_loa_high")) {
    BlandAltman ba;
    ba.mean_diff = *get("ba_mean_diff");
    ba.loa_low = *get("ba_loa_low");
    ba.loa_high = *get("ba_loa_high");
    ba.sd = (ba.loa_high - ba.mean_diff) / 1.96;
    a.bland_altman = ba;
  }
  return report;
}

}  // namespace lge::metrics
