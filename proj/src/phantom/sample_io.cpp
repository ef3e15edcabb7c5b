#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "lge/errors.hpp"
#include "lge/phantom.hpp"

namespace lge::phantom {
namespace {

static_assert(std::endian::native == std::endian::little,
              "sample I/O assumes a little-endian host");

constexpr char kMagic[4] = {'L', 'G', 'E', 'S'};
constexpr std::uint8_t kVersion = 1;
constexpr int kMaxExtent = 4096;
constexpr std::size_t kHeaderBytes = 4 + 1 + 2 + 2 + 1;

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  void need(std::size_t n, const char* what) const {
    if (offset_ + n > bytes_.size()) {
      throw FormatError(origin_ + ": truncated at offset " + std::to_string(offset_) +
                        ": need " + std::to_string(n) + " bytes for " + what +
                        ", " + std::to_string(bytes_.size() - offset_) + " left");
    }
  }
  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return v;
  }
  [[nodiscard]] std::size_t offset() const { return offset_; }
  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - offset_; }
  [[nodiscard]] const std::string& origin() const { return origin_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::string origin_;
  std::size_t offset_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_binary(const Grid& g, const char* what) {
  for (double v : g.values) {
    if (v != 0.0 && v != 1.0) {
      throw InvalidArgument(std::string("write_sample: ") + what + " is not binary");
    }
  }
}

}  // namespace

std::vector<std::uint8_t> encode_sample(const Sample& s) {
  const int h = s.image.height;
  const int w = s.image.width;
  if (s.image.channels != 1 || h < 1 || w < 1 || h > kMaxExtent || w > kMaxExtent) {
    throw InvalidArgument("write_sample: image must be 1xHxW, got " + s.image.shape_string());
  }
  require_same_shape(s.image, s.scar, "write_sample scar");
  require_same_shape(s.image, s.myo, "write_sample myo");
  if (s.difficulty < 0 || s.difficulty >= kDifficultyLevels) {
    throw InvalidArgument("write_sample: difficulty outside {0,1,2}");
  }
  check_binary(s.scar, "scar mask");
  check_binary(s.myo, "myocardium mask");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + s.image.size() * 6);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint8_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(w));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(h));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.difficulty));
  for (double v : s.image.values) put<float>(out, static_cast<float>(v));
  for (double v : s.scar.values) put<std::uint8_t>(out, v > 0.0 ? 1 : 0);
  for (double v : s.myo.values) put<std::uint8_t>(out, v > 0.0 ? 1 : 0);
  return out;
}

Sample decode_sample(std::span<const std::uint8_t> bytes, std::int64_t id,
                     const std::string& origin) {
  Reader r(bytes, origin);
  r.need(4, "magic");
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>("magic"));
  if (std::memcmp(magic, kMagic, 4) != 0) {
    std::string shown;
    for (char c : magic) {
      shown += (c >= 32 && c < 127) ? c : '?';
    }
    throw FormatError(origin + ": bad magic \"" + shown + "\" at offset 0, expected \"LGES\"");
  }
  const auto version = r.get<std::uint8_t>("version");
  if (version != kVersion) {
    throw FormatError(origin + ": unsupported version " + std::to_string(version) +
                      " at offset 4");
  }
  const int w = r.get<std::uint16_t>("width");
  const int h = r.get<std::uint16_t>("height");
  if (w < 1 || h < 1 || w > kMaxExtent || h > kMaxExtent) {
    throw FormatError(origin + ": bad shape " + std::to_string(w) + "x" +
                      std::to_string(h) + " at offset 5");
  }
  const int difficulty = r.get<std::uint8_t>("difficulty");
  if (difficulty >= kDifficultyLevels) {
    throw FormatError(origin + ": difficulty " + std::to_string(difficulty) +
                      " at offset 9 outside {0,1,2}");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  r.need(n * sizeof(float), "image");

  Sample s;
  s.id = id;
  s.difficulty = difficulty;
  s.image = Grid(1, h, w);
  s.scar = Grid(1, h, w);
  s.myo = Grid(1, h, w);
  for (std::size_t i = 0; i < n; ++i) {
    const float v = r.get<float>("image");
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw FormatError(origin + ": image value outside [0,1] at offset " +
                        std::to_string(r.offset() - sizeof(float)));
    }
    s.image[i] = v;
  }
  r.need(2 * n, "masks");
  for (Grid* g : {&s.scar, &s.myo}) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = r.get<std::uint8_t>("mask");
      if (v > 1) {
        throw FormatError(origin + ": non-binary mask byte " + std::to_string(v) +
                          " at offset " + std::to_string(r.offset() - 1));
      }
      (*g)[i] = v;
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(origin + ": " + std::to_string(r.remaining()) +
                      " trailing bytes at offset " + std::to_string(r.offset()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.scar[i] > s.myo[i]) {
      throw FormatError(origin + ": scar pixel " + std::to_string(i) +
                        " outside the myocardium");
    }
  }
  return s;
}

void write_sample(const Sample& s, const std::filesystem::path& path) {
  const auto bytes = encode_sample(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Sample read_sample(const std::filesystem::path& path, std::int64_t id) {
  const auto bytes = read_file(path);
  return decode_sample(bytes, id, path.string());
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "LGESET v1\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05zu.lges", i);
    write_sample(ds.samples[i], dir / name);
    manifest << name << '\t' << ds.samples[i].difficulty << '\n';
  }
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw std::runtime_error((dir / kManifestName).string() + ": cannot open for writing");
  out << manifest.str();
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestName;
  std::ifstream in(manifest_path);
  if (!in) throw FormatError(manifest_path.string() + ": cannot open manifest");
  std::string line;
  if (!std::getline(in, line) || line != "LGESET v1") {
    throw FormatError(manifest_path.string() + ":1: expected header \"LGESET v1\"");
  }
  Dataset ds;
  ds.manifest = manifest_path;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(manifest_path.string() + ":" + std::to_string(line_no) +
                        ": expected \"path<TAB>difficulty\"");
    }
    const std::string rel = line.substr(0, tab);
    const std::string diff = line.substr(tab + 1);
    if (diff.size() != 1 || diff[0] < '0' || diff[0] > '2') {
      throw FormatError(manifest_path.string() + ":" + std::to_string(line_no) +
                        ": difficulty \"" + diff + "\" outside {0,1,2}");
    }
    Sample s = read_sample(dir / rel, static_cast<std::int64_t>(ds.samples.size()));
    if (s.difficulty != diff[0] - '0') {
      throw FormatError(manifest_path.string() + ":" + std::to_string(line_no) +
                        ": difficulty disagrees with sample header of " + rel);
    }
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw FormatError(manifest_path.string() + ": no samples listed");
  return ds;
}

}  // namespace lge::phantom
