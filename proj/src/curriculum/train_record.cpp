#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "lge/curriculum.hpp"

namespace lge::curriculum {
namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

void write_epoch_loss_csv(const TrainRecord& record, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "stage,epoch,mean_loss\n";
  for (const auto& e : record.epoch_losses) {
    out << e.stage << ',' << e.epoch << ',' << fmt_double(e.mean_loss) << '\n';
  }
}

void write_flags_csv(const TrainRecord& record, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "stage,sample_id,loss\n";
  for (std::size_t s = 0; s < record.flags.size(); ++s) {
    for (SampleId id : record.flags[s]) {
      out << s + 1 << ',' << id << ',' << fmt_double(record.stage_losses[s].at(id)) << '\n';
    }
  }
}

}  // namespace lge::curriculum
