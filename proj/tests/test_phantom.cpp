#include <doctest.h>

#include <algorithm>
#include <queue>
#include <set>

#include "lge/phantom.hpp"
#include "oracles.hpp"

using namespace lge;
using namespace lge::phantom;

namespace {

int count_components4(const Grid& mask) {
  const int h = mask.height, w = mask.width;
  std::vector<int> seen(mask.size(), 0);
  int components = 0;
  for (int start = 0; start < h * w; ++start) {
    if (mask[start] == 0.0 || seen[start]) continue;
    ++components;
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const int p = q.front();
      q.pop();
      const int y = p / w, x = p % w;
      const int nb[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[1] < 0 || n[0] >= h || n[1] >= w) continue;
        const int k = n[0] * w + n[1];
        if (mask[k] != 0.0 && !seen[k]) {
          seen[k] = 1;
          q.push(k);
        }
      }
    }
  }
  return components;
}

double burden(const Sample& s) {
  double scar = 0, myo = 0;
  for (std::size_t i = 0; i < s.myo.size(); ++i) {
    myo += s.myo[i];
    scar += s.scar[i] * s.myo[i];
  }
  return scar / myo;
}

}  // namespace

TEST_CASE("easy samples have high contrast and large compact scar") {
  GenConfig cfg;
  for (int i = 0; i < 200; ++i) {
    PrngStream s(17, i);
    const auto g = generate_sample_detailed(cfg, 0, s, i);
    CHECK(g.contrast_gap >= 0.35);
    CHECK(g.contrast_gap <= 0.5);
    const double b = burden(g.sample);
    CHECK(b >= 0.15);
    CHECK(b <= 0.35);
    CHECK_FALSE(g.label_jittered);
    CHECK(count_components4(g.sample.scar) == 1);
  }
}

TEST_CASE("burden ranges hold per difficulty") {
  GenConfig cfg;
  for (int d = 1; d < 3; ++d) {
    for (int i = 0; i < 200; ++i) {
      PrngStream s(23, 1000 * d + i);
      const auto g = generate_sample_detailed(cfg, d, s, i);
      const double b = burden(g.sample);
      if (g.zero_scar) {
        CHECK(b == 0.0);
        continue;
      }
      CHECK(b >= cfg.burden[d].lo);
      CHECK(b < cfg.burden[d].hi);
      CHECK(g.contrast_gap >= cfg.contrast_gap[d].lo);
      CHECK(g.contrast_gap < cfg.contrast_gap[d].hi);
    }
  }
}

TEST_CASE("zero-scar hard slices keep a myocardium") {
  GenConfig cfg;
  cfg.zero_scar_prob = 1.0;
  PrngStream s(1, 1);
  const auto g = generate_sample_detailed(cfg, 2, s);
  CHECK(g.zero_scar);
  CHECK(std::all_of(g.sample.scar.values.begin(), g.sample.scar.values.end(),
                    [](double v) { return v == 0.0; }));
  CHECK(std::count(g.sample.myo.values.begin(), g.sample.myo.values.end(), 1.0) > 0);
}

TEST_CASE("sample invariants: scar inside myocardium, image in range, annular myocardium") {
  GenConfig cfg;
  for (int d = 0; d < 3; ++d) {
    for (int i = 0; i < 100; ++i) {
      PrngStream s(5, 100 * d + i);
      const Sample smp = generate_sample(cfg, d, s, i);
      CHECK(smp.difficulty == d);
      CHECK(smp.image.height == kImageSize);
      int outside = 0;
      for (std::size_t p = 0; p < smp.scar.size(); ++p) {
        if (smp.scar[p] == 1.0 && smp.myo[p] == 0.0) ++outside;
        CHECK(smp.image[p] >= 0.0);
        CHECK(smp.image[p] <= 1.0);
        CHECK(static_cast<double>(static_cast<float>(smp.image[p])) == smp.image[p]);
      }
      CHECK(outside == 0);
      CHECK(count_components4(smp.myo) == 1);
      // Annulus: the centre pixel region is not myocardium.
      CHECK(smp.myo(0, 32, 32) == 0.0);
    }
  }
}

TEST_CASE("scar is brighter than viable myocardium on average") {
  GenConfig cfg;
  PrngStream s(8, 8);
  const Sample smp = generate_sample(cfg, 0, s);
  double scar = 0, ns = 0, viable = 0, nv = 0;
  for (std::size_t p = 0; p < smp.myo.size(); ++p) {
    if (smp.myo[p] == 0.0) continue;
    if (smp.scar[p] == 1.0) {
      scar += smp.image[p];
      ++ns;
    } else {
      viable += smp.image[p];
      ++nv;
    }
  }
  CHECK(scar / ns - viable / nv > 0.3);
}

TEST_CASE("generate_dataset counts, ids and determinism") {
  GenConfig cfg;
  cfg.counts = {4, 3, 3};
  cfg.seed = 77;
  const Dataset a = generate_dataset(cfg);
  REQUIRE(a.size() == 10);
  std::array<int, 3> per{};
  std::set<std::int64_t> ids;
  for (const auto& s : a.samples) {
    ++per[s.difficulty];
    ids.insert(s.id);
  }
  CHECK(per == std::array<int, 3>{4, 3, 3});
  CHECK(ids.size() == 10);
  const Dataset b = generate_dataset(cfg);
  CHECK(a.samples == b.samples);
  cfg.counts = {0, 0, 0};
  CHECK_THROWS_AS(generate_dataset(cfg), InvalidArgument);
}

TEST_CASE("difficulty is monotone in contrast gap and burden") {
  GenConfig cfg;
  cfg.seed = 2025;
  std::array<double, 3> gap{}, bur{};
  // Mirrors generate_dataset's stream assignment to recover the gaps.
  std::int64_t id = 0;
  for (int d = 0; d < 3; ++d) {
    for (int i = 0; i < 100; ++i, ++id) {
      PrngStream s(cfg.seed, static_cast<std::uint64_t>(id));
      const auto g = generate_sample_detailed(cfg, d, s, id);
      gap[d] += g.contrast_gap / 100.0;
      bur[d] += burden(g.sample) / 100.0;
    }
  }
  CHECK(gap[0] > gap[1]);
  CHECK(gap[1] > gap[2]);
  CHECK(bur[0] > bur[1]);
  CHECK(bur[1] > bur[2]);

  const Dataset ds = generate_dataset(cfg);
  std::array<double, 3> bur_ds{};
  for (const auto& s : ds.samples) bur_ds[s.difficulty] += burden_of(s) / 100.0;
  for (int d = 0; d < 3; ++d) CHECK(bur_ds[d] == doctest::Approx(bur[d]).epsilon(1e-12));
}

TEST_CASE("stratified split: 4/3/3 at 0.8") {
  GenConfig cfg;
  cfg.counts = {4, 3, 3};
  const Dataset ds = generate_dataset(cfg);
  PrngStream s(1, streams::kSplit);
  const auto split = split_dataset(ds, 0.8, s);
  CHECK(split.train.size() == 8);
  CHECK(split.test.size() == 2);
  // round(0.8 * 10) = 8 seats: floors (3, 2, 2) plus one largest-remainder
  // seat, tied between the two 2.4 classes and given to the lower difficulty.
  std::array<int, 3> tr{}, te{};
  for (const auto& x : split.train.samples) ++tr[x.difficulty];
  for (const auto& x : split.test.samples) ++te[x.difficulty];
  CHECK(tr == std::array<int, 3>{3, 3, 2});
  CHECK(te == std::array<int, 3>{1, 0, 1});
  CHECK(split.warnings.empty());
}

TEST_CASE("stratified split is disjoint, exhaustive and order-preserving") {
  GenConfig cfg;
  cfg.counts = {10, 10, 10};
  const Dataset ds = generate_dataset(cfg);
  PrngStream s(9, 9);
  const auto split = split_dataset(ds, 0.8, s);
  std::array<int, 3> tr{}, te{};
  std::set<std::int64_t> train_ids, test_ids;
  for (const auto& x : split.train.samples) {
    ++tr[x.difficulty];
    train_ids.insert(x.id);
  }
  for (const auto& x : split.test.samples) {
    ++te[x.difficulty];
    test_ids.insert(x.id);
  }
  CHECK(tr == std::array<int, 3>{8, 8, 8});
  CHECK(te == std::array<int, 3>{2, 2, 2});
  std::vector<std::int64_t> inter;
  std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                        std::back_inserter(inter));
  CHECK(inter.empty());
  CHECK(train_ids.size() + test_ids.size() == ds.size());
  CHECK(std::is_sorted(split.train.samples.begin(), split.train.samples.end(),
                       [](const Sample& a, const Sample& b) { return a.id < b.id; }));
}

TEST_CASE("tiny classes go to train with a warning") {
  GenConfig cfg;
  cfg.counts = {5, 1, 0};
  const Dataset ds = generate_dataset(cfg);
  PrngStream s(2, 2);
  const auto split = split_dataset(ds, 0.8, s);
  CHECK(split.warnings.size() == 1);
  int d1_train = 0;
  for (const auto& x : split.train.samples) d1_train += x.difficulty == 1;
  CHECK(d1_train == 1);
  CHECK(split.train.size() + split.test.size() == 6);
  CHECK_THROWS_AS(split_dataset(ds, 1.0, s), InvalidArgument);
  CHECK_THROWS_AS(split_dataset(ds, 0.0, s), InvalidArgument);
}

TEST_CASE("sample file round-trip is bit-exact") {
  const auto dir = oracle::scratch_dir("phantom_io");
  GenConfig cfg;
  for (int d = 0; d < 3; ++d) {
    PrngStream s(31, d);
    const Sample smp = generate_sample(cfg, d, s, 5);
    write_sample(smp, dir / "x.lges");
    CHECK(read_sample(dir / "x.lges", 5) == smp);
    CHECK(std::filesystem::file_size(dir / "x.lges") == 10 + 64 * 64 * 6);
  }
}

TEST_CASE("malformed sample files are rejected with diagnostics") {
  GenConfig cfg;
  PrngStream s(1, 0);
  const auto bytes = encode_sample(generate_sample(cfg, 1, s));

  auto truncated = bytes;
  truncated.resize(bytes.size() - 7);
  CHECK_THROWS_WITH_AS(decode_sample(truncated), doctest::Contains("truncated"), FormatError);

  auto bad_magic = bytes;
  std::copy_n("XXXX", 4, bad_magic.begin());
  CHECK_THROWS_WITH_AS(decode_sample(bad_magic), doctest::Contains("XXXX"), FormatError);

  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_WITH_AS(decode_sample(bad_version), doctest::Contains("version"), FormatError);

  auto bad_shape = bytes;
  bad_shape[5] = 0;
  bad_shape[6] = 0;
  CHECK_THROWS_AS(decode_sample(bad_shape), FormatError);

  auto bad_mask = bytes;
  bad_mask.back() = 7;
  CHECK_THROWS_WITH_AS(decode_sample(bad_mask), doctest::Contains("offset"), FormatError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_WITH_AS(decode_sample(trailing), doctest::Contains("trailing"), FormatError);
}

TEST_CASE("dataset directory round-trip") {
  const auto dir = oracle::scratch_dir("phantom_ds");
  GenConfig cfg;
  cfg.counts = {2, 2, 2};
  const Dataset ds = generate_dataset(cfg);
  write_dataset(ds, dir);
  const Dataset back = read_dataset(dir);
  CHECK(back.samples == ds.samples);
  const std::string manifest = oracle::file_text(dir / kManifestName);
  CHECK(manifest.rfind("LGESET v1\n", 0) == 0);
  CHECK(manifest.find("sample_00003.lges\t1\n") != std::string::npos);
}
