#include "lge/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace lge::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename T, std::size_t N>
bool parse_triple(const std::string& s, std::array<T, N>& out) {
  std::array<T, N> tmp{};
  std::size_t start = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto comma = s.find(',', start);
    const bool last = i + 1 == N;
    if (last != (comma == std::string::npos)) return false;
    const std::string part = trim(s.substr(start, last ? std::string::npos : comma - start));
    if (!parse_number(part, tmp[i])) return false;
    start = comma + 1;
  }
  out = tmp;
  return true;
}

template <typename T, std::size_t N>
std::string join(const std::array<T, N>& a) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(a[i]);
    } else {
      s += std::to_string(a[i]);
    }
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, const std::string& key,
                         const std::string& what)
    : InvalidArgument(origin + ":" + std::to_string(line) + ": key '" + key + "': " + what),
      key_(key),
      line_(line) {}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  auto& t = cfg.train;
  using Setter = std::function<bool(const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"seed", [&](const std::string& v) { return parse_number(v, t.seed); }},
      {"counts", [&](const std::string& v) { return parse_triple(v, cfg.counts); }},
      {"stages", [&](const std::string& v) { return parse_number(v, t.stages); }},
      {"epochs", [&](const std::string& v) { return parse_triple(v, t.epochs); }},
      {"batch_sizes", [&](const std::string& v) { return parse_triple(v, t.batch_sizes); }},
      {"baseline_batch_size",
       [&](const std::string& v) { return parse_number(v, t.baseline_batch_size); }},
      {"lr", [&](const std::string& v) { return parse_number(v, t.lr); }},
      {"weight_decay", [&](const std::string& v) { return parse_number(v, t.weight_decay); }},
      {"alpha", [&](const std::string& v) { return parse_number(v, t.alpha); }},
      {"beta", [&](const std::string& v) { return parse_number(v, t.beta); }},
      {"gamma", [&](const std::string& v) { return parse_number(v, t.gamma); }},
      {"epsilon", [&](const std::string& v) { return parse_number(v, t.epsilon); }},
      {"w_fg", [&](const std::string& v) { return parse_triple(v, t.w_fg); }},
      {"w_bg", [&](const std::string& v) { return parse_triple(v, t.w_bg); }},
      {"p_spike", [&](const std::string& v) { return parse_number(v, t.p_spike); }},
      {"spike_multiplier",
       [&](const std::string& v) { return parse_number(v, t.spike_multiplier); }},
      {"threshold", [&](const std::string& v) { return parse_number(v, cfg.threshold); }},
      {"train_fraction", [&](const std::string& v) { return parse_number(v, cfg.train_fraction); }},
      {"baseline",
       [&](const std::string& v) {
         if (v != "0" && v != "1") return false;
         cfg.baseline = v == "1";
         return true;
       }},
  };

  std::set<std::string> seen;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin, line_no, line, "expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(origin, line_no, key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(origin, line_no, key, "duplicate key");
    if (!it->second(value)) {
      throw ConfigError(origin, line_no, key, "malformed value \"" + value + "\"");
    }
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(path.string() + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::validate() const {
  train.validate();
  for (int c : counts) {
    if (c < 0) throw InvalidArgument("counts must be >= 0");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("threshold must lie in (0, 1)");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
}

std::string RunConfig::to_text() const {
  const auto& t = train;
  std::ostringstream out;
  out << "# resolved run configuration\n";
  out << "seed=" << t.seed << '\n';
  out << "counts=" << join(counts) << '\n';
  out << "stages=" << t.stages << '\n';
  out << "epochs=" << join(t.epochs) << '\n';
  out << "batch_sizes=" << join(t.batch_sizes) << '\n';
  out << "baseline_batch_size=" << t.baseline_batch_size << '\n';
  out << "lr=" << fmt(t.lr) << '\n';
  out << "weight_decay=" << fmt(t.weight_decay) << '\n';
  out << "alpha=" << fmt(t.alpha) << '\n';
  out << "beta=" << fmt(t.beta) << '\n';
  out << "gamma=" << fmt(t.gamma) << '\n';
  out << "epsilon=" << fmt(t.epsilon) << '\n';
  out << "w_fg=" << join(t.w_fg) << '\n';
  out << "w_bg=" << join(t.w_bg) << '\n';
  out << "p_spike=" << fmt(t.p_spike) << '\n';
  out << "spike_multiplier=" << t.spike_multiplier << '\n';
  out << "threshold=" << fmt(threshold) << '\n';
  out << "train_fraction=" << fmt(train_fraction) << '\n';
  out << "baseline=" << (baseline ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace lge::cli
