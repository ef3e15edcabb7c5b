#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lge/errors.hpp"
#include "lge/segnet.hpp"

namespace lge::segnet {
namespace {

constexpr char kMagic[4] = {'L', 'G', 'E', 'P'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

void put_floats(std::vector<std::uint8_t>& out, const std::vector<Grid>& tensors) {
  for (const auto& t : tensors) {
    for (double v : t.values) put<float>(out, static_cast<float>(v));
  }
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, const std::string& origin) : b_(b), origin_(origin) {}
  template <typename T>
  T get(const char* what) {
    if (off_ + sizeof(T) > b_.size()) {
      throw FormatError(origin_ + ": truncated at offset " + std::to_string(off_) +
                        " while reading " + what);
    }
    T v;
    std::memcpy(&v, b_.data() + off_, sizeof(T));
    off_ += sizeof(T);
    return v;
  }
  void read_floats(std::vector<Grid>& tensors, const char* what) {
    for (auto& t : tensors) {
      for (double& v : t.values) {
        const float f = get<float>(what);
        if (!std::isfinite(f)) {
          throw FormatError(origin_ + ": non-finite " + what + " at offset " +
                            std::to_string(off_ - sizeof(float)));
        }
        v = f;
      }
    }
  }
  [[nodiscard]] std::size_t offset() const { return off_; }
  [[nodiscard]] std::size_t remaining() const { return b_.size() - off_; }

 private:
  std::span<const std::uint8_t> b_;
  const std::string& origin_;
  std::size_t off_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params, const AdamState* adam) {
  if (params.count() != kParamCount) {
    throw InvalidArgument("save_checkpoint: parameter count " + std::to_string(params.count()) +
                          " differs from the architecture's " + std::to_string(kParamCount));
  }
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint8_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kParamCount));
  put_floats(out, params.tensors);
  put<std::uint8_t>(out, adam != nullptr ? 1 : 0);
  if (adam != nullptr) {
    if (adam->m.size() != params.tensors.size() || adam->v.size() != params.tensors.size()) {
      throw InvalidArgument("save_checkpoint: Adam moments do not mirror parameters");
    }
    put_floats(out, adam->m);
    put_floats(out, adam->v);
    put<std::uint64_t>(out, adam->step);
  }
  return out;
}

void save_checkpoint(const ModelParams& params, const AdamState* adam,
                     const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params, adam);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& origin) {
  Reader r(bytes, origin);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>("magic"));
  if (std::memcmp(magic, kMagic, 4) != 0) {
    std::string shown;
    for (char c : magic) shown += (c >= 32 && c < 127) ? c : '?';
    throw FormatError(origin + ": bad magic \"" + shown + "\" at offset 0, expected \"LGEP\"");
  }
  const auto version = r.get<std::uint8_t>("version");
  if (version != kVersion) {
    throw FormatError(origin + ": unsupported version " + std::to_string(version) +
                      " at offset 4");
  }
  const auto count = r.get<std::uint32_t>("parameter count");
  if (count != kParamCount) {
    throw FormatError(origin + ": parameter count " + std::to_string(count) +
                      " at offset 5 does not match the architecture's " +
                      std::to_string(kParamCount));
  }
  Checkpoint ck;
  ck.params = ModelParams::zeros();
  r.read_floats(ck.params.tensors, "parameter");
  const auto flag = r.get<std::uint8_t>("moment flag");
  if (flag > 1) {
    throw FormatError(origin + ": moment flag " + std::to_string(flag) + " at offset " +
                      std::to_string(r.offset() - 1) + " is not 0 or 1");
  }
  if (flag == 1) {
    AdamState adam = AdamState::for_params(ck.params.tensors, 1e-4, kMaxWeightDecay);
    r.read_floats(adam.m, "first moment");
    r.read_floats(adam.v, "second moment");
    adam.step = r.get<std::uint64_t>("step counter");
    ck.adam = std::move(adam);
  }
  if (r.remaining() != 0) {
    throw FormatError(origin + ": " + std::to_string(r.remaining()) +
                      " trailing bytes at offset " + std::to_string(r.offset()));
  }
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open checkpoint");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes, path.string());
}

}  // namespace lge::segnet
