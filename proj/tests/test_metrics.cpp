#include <doctest.h>

#include "lge/metrics.hpp"
#include "lge/prng.hpp"
#include "oracles.hpp"

using namespace lge;
using namespace lge::metrics;

namespace {

Grid row(std::initializer_list<double> v) {
  Grid g(1, 1, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), g.values.begin());
  return g;
}

// Paired samples whose differences include ties and zeros.
void random_pairs(PrngStream& rng, int n, std::vector<double>& a, std::vector<double>& b) {
  a.assign(n, 0.0);
  b.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    b[i] = rng.uniform(-1.0, 1.0);
    a[i] = b[i] + static_cast<double>(rng.uniform_int(-4, 4));
  }
}

}  // namespace

TEST_CASE("dice coefficient") {
  CHECK(dice_coeff(row({1, 1, 0, 0}), row({1, 1, 0, 0})) == 1.0);
  CHECK(dice_coeff(row({1, 1, 0, 0}), row({0, 0, 1, 1})) == 0.0);
  CHECK(dice_coeff(row({1, 1, 0, 0}), row({1, 0, 0, 0})) == doctest::Approx(2.0 / 3.0));
  CHECK(dice_coeff(row({0, 0}), row({0, 0})) == 1.0);
  CHECK(dice_coeff(row({0, 0}), row({0, 1})) == 0.0);
  CHECK_THROWS_AS(dice_coeff(row({0, 0}), row({0, 0, 0})), InvalidArgument);

  PrngStream rng(3, 3);
  for (int t = 0; t < 100; ++t) {
    Grid a(1, 5, 5), b(1, 5, 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
      b[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    }
    const double d = dice_coeff(a, b);
    CHECK(d == dice_coeff(b, a));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    Grid ar = a, br = b;
    std::reverse(ar.values.begin(), ar.values.end());
    std::reverse(br.values.begin(), br.values.end());
    CHECK(dice_coeff(ar, br) == d);
  }
}

TEST_CASE("scar burden") {
  const Grid m = row({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0});
  CHECK(scar_burden(row({1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0}), m) == doctest::Approx(0.3));
  CHECK(scar_burden(Grid(1, 1, 12), m) == 0.0);
  CHECK(scar_burden(m, m) == 1.0);
  // Pixels outside M do not count.
  CHECK(scar_burden(row({1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1, 1}), m) == doctest::Approx(0.3));
  CHECK_THROWS_AS(scar_burden(m, Grid(1, 1, 12)), InvalidArgument);
}

TEST_CASE("binarize thresholds inside the myocardium") {
  const Grid p = row({0.5, 0.49, 0.9, 0.7});
  const Grid m = row({1, 1, 1, 0});
  CHECK(binarize(p, m).values == std::vector<double>{1, 0, 1, 0});
  CHECK(binarize(p, m, 0.95).values == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("pearson correlation") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson_r(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson_r(x, std::vector<double>{-1, -2, -3}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(pearson_r(x, std::vector<double>{1, 2, 4}) - 0.981981) < 1e-5);
  CHECK_THROWS_AS(pearson_r(x, std::vector<double>{2, 2, 2}), UndefinedStatistic);
  CHECK_THROWS_AS(pearson_r(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
  CHECK_THROWS_AS(pearson_r(x, std::vector<double>{1, 2}), InvalidArgument);

  PrngStream rng(4, 4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(10), b(10), a2(10), b2(10);
    const double sa = rng.uniform(0.1, 5), oa = rng.uniform(-3, 3);
    const double sb = rng.uniform(0.1, 5), ob = rng.uniform(-3, 3);
    for (int i = 0; i < 10; ++i) {
      a[i] = rng.next_double();
      b[i] = a[i] + rng.normal();
      a2[i] = sa * a[i] + oa;
      b2[i] = sb * b[i] + ob;
    }
    const double r = pearson_r(a, b);
    CHECK(std::abs(pearson_r(a2, b2) - r) < 1e-12);
    CHECK(std::abs(r) <= 1.0);
  }
}

TEST_CASE("Bland-Altman") {
  const std::vector<double> same{0.1, 0.4, 0.3};
  const auto z = bland_altman(same, same);
  CHECK(z.mean_diff == 0.0);
  CHECK(z.loa_low == 0.0);
  CHECK(z.loa_high == 0.0);

  const auto c = bland_altman(std::vector<double>{2, 3, 4}, std::vector<double>{1, 2, 3});
  CHECK(c.mean_diff == doctest::Approx(1.0));
  CHECK(c.loa_low == doctest::Approx(1.0));
  CHECK(c.loa_high == doctest::Approx(1.0));

  const auto d = bland_altman(std::vector<double>{0, 2}, std::vector<double>{0, 0});
  CHECK(d.mean_diff == doctest::Approx(1.0));
  CHECK(std::abs(d.loa_low - -1.77186) < 1e-4);
  CHECK(std::abs(d.loa_high - 3.77186) < 1e-4);
  CHECK_THROWS_AS(bland_altman(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("Wilcoxon worked cases") {
  const std::vector<double> zero(6, 0.0);
  const std::vector<double> five{1, 2, 3, 4, 5};
  const auto r5 = wilcoxon_signed_rank(five, std::span(zero).first(5));
  CHECK(r5.p_value == 0.0625);
  CHECK(r5.n_effective == 5);
  CHECK(r5.statistic == 0.0);
  CHECK(r5.method == WilcoxonMethod::kExact);
  const std::vector<double> six{1, 2, 3, 4, 5, 6};
  CHECK(wilcoxon_signed_rank(six, zero).p_value == 0.03125);
  CHECK_THROWS_AS(wilcoxon_signed_rank(six, six), DegenerateInput);
  CHECK_THROWS_AS(wilcoxon_signed_rank(six, five), InvalidArgument);
  CHECK(std::string(method_name(WilcoxonMethod::kNormal)) == "normal-approximation");
}

TEST_CASE("Wilcoxon exact path equals sign enumeration") {
  PrngStream rng(5, 5);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a, b;
    random_pairs(rng, rng.uniform_int(1, 14), a, b);
    int n_eff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n_eff += (a[i] - b[i]) != 0.0;
    if (n_eff == 0 || n_eff > 12) continue;
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK(r.method == WilcoxonMethod::kExact);
    CHECK(r.n_effective == n_eff);
    CHECK(r.p_value == oracle::wilcoxon_bruteforce(a, b));
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
    ++checked;
  }
  CHECK(checked > 700);
}

TEST_CASE("Wilcoxon normal path tracks the exact path") {
  // Every attainable W for tie-free ranks. The continuity-corrected normal
  // tail stays within 0.01 of the exact one from n = 17 on; at n = 15 and 16
  // the largest gaps are 0.0111 and 0.0104 (mid-range p).
  for (int n = 15; n <= 20; ++n) {
    double worst = 0.0;
    for (int w = 0; w <= n * (n + 1) / 4; ++w) {
      std::vector<double> a(n), b(n, 0.0);
      int rest = w;
      for (int r = n; r >= 1; --r) {
        a[r - 1] = r <= rest ? r : -r;
        if (r <= rest) rest -= r;
      }
      const auto exact = wilcoxon_signed_rank(a, b, WilcoxonMethod::kExact);
      const auto normal = wilcoxon_signed_rank(a, b, WilcoxonMethod::kNormal);
      CHECK(exact.statistic == w);
      CHECK(normal.statistic == w);
      worst = std::max(worst, std::abs(exact.p_value - normal.p_value));
    }
    INFO("n = " << n);
    CHECK(worst < (n >= 17 ? 0.01 : 0.0112));
  }

  PrngStream rng(6, 6);
  for (int t = 0; t < 200; ++t) {
    const int n = rng.uniform_int(17, 20);
    std::vector<double> a(n), b(n);
    const double shift = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < n; ++i) {
      b[i] = rng.next_double();
      a[i] = b[i] + shift + rng.normal();
    }
    const auto exact = wilcoxon_signed_rank(a, b, WilcoxonMethod::kExact);
    const auto normal = wilcoxon_signed_rank(a, b, WilcoxonMethod::kNormal);
    CHECK(exact.method == WilcoxonMethod::kExact);
    CHECK(normal.method == WilcoxonMethod::kNormal);
    CHECK(std::abs(exact.p_value - normal.p_value) < 0.01);
  }
  std::vector<double> a(30), b(30, 0.0);
  for (int i = 0; i < 30; ++i) a[i] = i + 1;
  const auto big = wilcoxon_signed_rank(a, b);
  CHECK(big.method == WilcoxonMethod::kNormal);
  CHECK(big.p_value > 0.0);
  CHECK(big.p_value < 1e-5);
}

TEST_CASE("report CSV and aggregates") {
  std::vector<EvalRow> rows{{3, 0.5, 0.1, 0.2}, {7, 1.0, 0.0, 0.0}, {9, 0.25, 0.3, 0.1}};
  EvalReport rep{rows, compute_aggregates(rows)};
  CHECK(rep.aggregates.median_dice == 0.5);
  CHECK(rep.aggregates.mean_dice == doctest::Approx(1.75 / 3.0));
  REQUIRE(rep.aggregates.pearson_r.has_value());
  REQUIRE(rep.aggregates.bland_altman.has_value());

  const auto dir = oracle::scratch_dir("metrics_csv");
  write_report_csv(rep, dir / "r.csv");
  const auto text = oracle::file_text(dir / "r.csv");
  CHECK(text.rfind("id,dice,gt_burden,pred_burden\n3,", 0) == 0);
  CHECK(text.find("#agg,median_dice,0.5\n") != std::string::npos);

  const auto back = read_report_csv(dir / "r.csv");
  REQUIRE(back.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.rows[i].id == rows[i].id);
    CHECK(back.rows[i].dice == rows[i].dice);
    CHECK(back.rows[i].gt_burden == rows[i].gt_burden);
    CHECK(back.rows[i].pred_burden == rows[i].pred_burden);
  }
  const auto again = compute_aggregates(back.rows);
  CHECK(again.mean_dice == rep.aggregates.mean_dice);
  CHECK(*again.pearson_r == *rep.aggregates.pearson_r);
  CHECK(again.bland_altman->loa_high == rep.aggregates.bland_altman->loa_high);
  CHECK(format_report_csv(back) == text);

  // Constant burdens leave Pearson undefined and the value blank.
  std::vector<EvalRow> flat{{1, 1.0, 0.0, 0.0}, {2, 1.0, 0.0, 0.0}};
  const EvalReport f{flat, compute_aggregates(flat)};
  CHECK_FALSE(f.aggregates.pearson_r.has_value());
  CHECK(format_report_csv(f).find("#agg,pearson_r,\n") != std::string::npos);

  std::ofstream(dir / "bad.csv") << "id,dice,gt_burden,pred_burden\n1,0.5,0.1\n";
  CHECK_THROWS_WITH_AS(read_report_csv(dir / "bad.csv"), doctest::Contains("row 2"), FormatError);
  std::ofstream(dir / "range.csv") << "id,dice,gt_burden,pred_burden\n1,1.5,0.1,0.1\n";
  CHECK_THROWS_AS(read_report_csv(dir / "range.csv"), FormatError);
}

TEST_CASE("evaluation on a generated sample") {
  phantom::GenConfig g;
  g.counts = {1, 0, 0};
  const auto ds = phantom::generate_dataset(g);
  const auto rep = evaluate(segnet::ModelParams::zeros(), ds);
  REQUIRE(rep.rows.size() == 1);
  // Zero parameters give 0.5 everywhere, which the threshold keeps: prediction = M.
  CHECK(rep.rows[0].pred_burden == 1.0);
  CHECK(rep.rows[0].gt_burden == doctest::Approx(phantom::burden_of(ds.samples[0])));
  const double expected = 2.0 * rep.rows[0].gt_burden / (rep.rows[0].gt_burden + 1.0);
  CHECK(rep.rows[0].dice == doctest::Approx(expected).epsilon(1e-12));
  CHECK(evaluate_sample(segnet::ModelParams::zeros(), ds.samples[0], 0.6).pred_burden == 0.0);
}
