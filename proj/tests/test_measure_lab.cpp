#include <doctest.h>

#include <random>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/measure_lab.hpp"
#include "oracles.hpp"

using namespace ifsrecur;

namespace {

AffineIFS line(std::vector<std::pair<double, double>> maps) {
  Json j{{"d", 1}, {"maps", Json::array()}};
  for (auto [a, t] : maps) j["maps"].push_back({{"A", {{a}}}, {"t", {t}}});
  return AffineIFS::from_json(j);
}

Vec v1(double x) { return Vec::Constant(1, x); }

Eigen::MatrixXd table2(double a, double b, double ab) {
  Eigen::MatrixXd t(2, 2);
  t << a, ab, ab, b;
  return t;
}

}  // namespace

TEST_CASE("level-one shrinking target intervals") {
  // λ(A) = 1 and h = 1 give a target ball of radius 1 around 0.
  const AffineIFS ifs = line({{0.5, 0.0}, {0.5, 1.0}});
  const auto spec = TargetSpec::shrinking_ball(HFamily::constant(1.0), SymbolicSequence::parse("(0)"));
  const auto bodies = stage_target_bodies(ifs, spec, 1);
  REQUIRE(bodies.size() == 2);
  CHECK(bodies[0].center(0) == doctest::Approx(0.0));
  CHECK(bodies[0].halfwidths()(0) == doctest::Approx(0.5));
  CHECK(bodies[1].center(0) == doctest::Approx(1.0));
  CHECK(bodies[1].halfwidths()(0) == doctest::Approx(0.5));
}

TEST_CASE("diagonal target bodies are axis-aligned ellipses") {
  const Json j = Json::parse(R"({"d":2,"maps":[
    {"A":[[0.4,0],[0,0.3]],"t":[0,0]},{"A":[[0.4,0],[0,0.3]],"t":[1,0]}]})");
  const AffineIFS ifs = AffineIFS::from_json(j);
  const auto spec = TargetSpec::shrinking_ball(HFamily::constant(1.0), SymbolicSequence::parse("(0)"));
  const auto bodies = stage_target_bodies(ifs, spec, 4);
  REQUIRE(bodies.size() == 16);
  const double r4 = spec.ball_radius(ifs, 4);
  CHECK(r4 == doctest::Approx(std::pow(1.0 / std::pow(0.24, 4), 0.5)));
  for (const auto& b : bodies) {
    CHECK(b.halfwidths()(0) == doctest::Approx(std::pow(0.4, 4) * r4));
    CHECK(b.halfwidths()(1) == doctest::Approx(std::pow(0.3, 4) * r4));
  }
}

TEST_CASE("target volumes sum to h(n) times the unit ball volume") {
  const Json j = Json::parse(R"({"d":2,"maps":[
    {"A":[[0.4,0.1],[0,0.3]],"t":[0,0]},{"A":[[0.2,0],[0.1,0.45]],"t":[1,0]},
    {"A":[[0.3,0],[0,0.3]],"t":[0,1]}]})");
  const AffineIFS ifs = AffineIFS::from_json(j);
  const auto spec = TargetSpec::shrinking_ball(HFamily::power_law(2.0, 1.0), SymbolicSequence::parse("(12)"));
  for (int n = 1; n <= 6; ++n) {
    const auto bodies = stage_target_bodies(ifs, spec, n);
    CHECK(analytic_volume_sum(bodies) == doctest::Approx(2.0 / n * M_PI).epsilon(1e-9));
  }
}

TEST_CASE("recurrence interval of a single word") {
  const AffineIFS ifs = line({{0.5, 0.0}, {0.5, 1.0}});
  TargetSpec spec = TargetSpec::recurrence_ball(HFamily::constant(1.0));
  spec.mode = TargetMode::RecurrenceGeneral;
  spec.body = [](int) -> Shape { return Ball{0.1}; };
  const auto bodies = stage_recurrence_bodies(ifs, spec, 1);
  CHECK(bodies[1].center(0) == doctest::Approx(2.0));
  CHECK(bodies[1].halfwidths()(0) == doctest::Approx(0.1));
}

TEST_CASE("diagonal recurrence radii") {
  const Json j = Json::parse(R"({"d":2,"maps":[
    {"A":[[0.4,0],[0,0.3]],"t":[0,0]},{"A":[[0.4,0],[0,0.3]],"t":[1,1]}]})");
  const AffineIFS ifs = AffineIFS::from_json(j);
  TargetSpec spec = TargetSpec::recurrence_ball(HFamily::constant(1.0));
  spec.mode = TargetMode::RecurrenceGeneral;
  spec.body = [](int) -> Shape { return Ball{0.2}; };
  for (const auto& b : stage_recurrence_bodies(ifs, spec, 3)) {
    CHECK(b.halfwidths()(0) == doctest::Approx(0.064 * 0.2 / (1 - 0.064)));
    CHECK(b.halfwidths()(1) == doctest::Approx(0.027 * 0.2 / (1 - 0.027)));
  }
}

TEST_CASE("recurrence membership matches the direct predicate") {
  const double lambda = std::sqrt(0.5);
  const AffineIFS ifs = line({{lambda, 0.0}, {lambda, 1.0}});
  TargetSpec spec = TargetSpec::recurrence_ball(HFamily::constant(1.0));
  spec.mode = TargetMode::RecurrenceGeneral;
  spec.body = [](int) -> Shape { return Ball{0.3}; };
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0 / (1.0 - lambda));
  const auto bodies = stage_recurrence_bodies(ifs, spec, 5);
  const auto words = WordSpace(2, 5).collect();
  int checked = 0;
  for (int k = 0; k < 20000; ++k) {
    const std::size_t i = rng() % 32;
    const double x = u(rng);
    const double gap = std::abs(oracle::inverse_word_1d({lambda, lambda}, {0, 1}, words[i], x) - x);
    if (std::abs(gap - 0.3) < 1e-9) continue;
    CHECK(bodies[i].contains(v1(x)) == (gap <= 0.3));
    ++checked;
  }
  CHECK(checked > 19000);
}

TEST_CASE("intersection tables") {
  const Window w{v1(0.0), v1(1.0)};
  const PixelMask a = rasterize({{v1(0.3), Ball{0.2}}}, w, {1000});
  const PixelMask b = rasterize({{v1(0.8), Ball{0.1}}}, w, {1000});
  const PixelMask c = rasterize({{v1(0.3), Ball{0.1}}}, w, {1000});
  SUBCASE("identical") {
    const auto t = pairwise_intersection_table({a, a, a});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(t.at(i, j) == doctest::Approx(a.measure()));
    CHECK(kochen_stone_bound(t) == doctest::Approx(a.measure()));
  }
  SUBCASE("disjoint") {
    const auto t = pairwise_intersection_table({a, b});
    CHECK(t.count(0, 1) == 0);
    CHECK(kochen_stone_bound(t) == doctest::Approx(a.measure() + b.measure()));
    CHECK(bonferroni_bound(t) == doctest::Approx(a.measure() + b.measure()));
  }
  SUBCASE("nested") {
    const auto t = pairwise_intersection_table({a, c});
    CHECK(t.count(0, 1) == c.occupied_count());
  }
  SUBCASE("union is subadditive") {
    const auto u = union_mask({a, b, c});
    CHECK(u.occupied_count() <= a.occupied_count() + b.occupied_count() + c.occupied_count());
  }
}

TEST_CASE("classical bounds from tables") {
  CHECK(kochen_stone_bound(table2(0.3, 0.3, 0.1)) == doctest::Approx(0.45));
  CHECK(bonferroni_bound(table2(0.3, 0.3, 0.1)) == doctest::Approx(0.5));
  Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 5, 0.2);
  CHECK(kochen_stone_bound(same) == doctest::Approx(0.2));
  CHECK(bonferroni_bound(same) == doctest::Approx(5 * 0.2 - 10 * 0.2));
  CHECK_THROWS_AS(kochen_stone_bound(Eigen::MatrixXd::Zero(3, 3)), Error);
  CHECK_THROWS_AS(kochen_stone_bound(table2(0.3, 0.3, -0.1)), Error);
  Eigen::MatrixXd asym = table2(0.3, 0.3, 0.1);
  asym(0, 1) = 0.2;
  CHECK_THROWS_AS(bonferroni_bound(asym), Error);
}

TEST_CASE("exact bound checks hold on random families") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Window w{v1(0.0), v1(1.0)};
  for (int f = 0; f < 30; ++f) {
    std::vector<PixelMask> masks;
    for (int k = 0; k < 5; ++k) masks.push_back(rasterize({{v1(u(rng)), Ball{0.3 * u(rng)}}}, w, {997}));
    const auto t = pairwise_intersection_table(masks);
    const auto un = union_mask(masks).occupied_count();
    if (std::all_of(t.counts.begin(), t.counts.end(), [](auto c) { return c == 0; })) continue;
    CHECK(kochen_stone_holds_exactly(t, un));
    CHECK(bonferroni_holds_exactly(t, un));
    CHECK(oracle::kochen_stone_exact(t.counts, t.size, un));
    CHECK(kochen_stone_bound(t) <= union_mask(masks).measure() * (1 + 1e-12));
  }
}

TEST_CASE("overlap gamma") {
  const AffineIFS three = line({{0.5, 0.0}, {0.5, 0.5}, {0.5, 1.0}});
  CHECK(exact_overlap_gamma(three, Word{0, 2}) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  const AffineIFS two = line({{0.5, 0.0}, {0.5, 1.0}});
  CHECK(exact_overlap_gamma(two, Word{1}) == doctest::Approx(0.5));
  for (const Word& w : {Word{0}, Word{1, 2}, Word{2, 2, 0}}) {
    const double det = compose_word(three, w).abs_det();
    CHECK(exact_overlap_gamma(three, w) + det / std::pow(1.5, static_cast<double>(w.size())) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("exact overlap detection") {
  const AffineIFS three = line({{0.5, 0.0}, {0.5, 0.5}, {0.5, 1.0}});
  const auto pairs = detect_exact_overlaps(three, 2);
  const bool found = std::any_of(pairs.begin(), pairs.end(), [](const OverlapPair& p) {
    return p.u == Word{0, 2} && p.v == Word{1, 0} && p.exact;
  });
  CHECK(found);
  for (const auto& p : pairs) CHECK(p.u < p.v);
  CHECK(detect_exact_overlaps(line({{0.5, 0.0}, {0.5, 1.0}}), 4).empty());
  const auto twins = detect_exact_overlaps(line({{0.5, 0.3}, {0.5, 0.3}}), 1);
  REQUIRE(twins.size() == 1);
  CHECK(twins[0].u == Word{0});
  CHECK(twins[0].v == Word{1});
}

TEST_CASE("product criterion") {
  CHECK(product_ifs_criterion({3, 3}, {0.3, 0.3}) == doctest::Approx(1.0));
  CHECK(product_ifs_criterion({2, 3}, {0.3, 0.3}) == doctest::Approx(0.6 / std::sqrt(0.54)));
  CHECK(product_ifs_criterion({2, 2}, {0.4, 0.26}) == doctest::Approx(0.52 / std::sqrt(0.8 * 0.52)));
  CHECK_THROWS_AS(product_ifs_criterion({2}, {0.3, 0.3}), Error);
}

TEST_CASE("Borel-Cantelli reports") {
  const AffineIFS two = line({{0.5, 0.0}, {0.5, 1.0}});
  const auto conv = borel_cantelli_report(
      two, TargetSpec::shrinking_ball(HFamily::power_law(1.0, 2.0), SymbolicSequence::parse("(0)")), 50);
  CHECK(conv.hint == SeriesHint::ConvergesAnalytically);
  CHECK(conv.partial_sums.back() < M_PI * M_PI / 6.0 * 2.0 + 1e-12);
  const auto div = borel_cantelli_report(
      two, TargetSpec::shrinking_ball(HFamily::power_law(1.0, 1.0), SymbolicSequence::parse("(0)")), 50);
  CHECK(div.hint == SeriesHint::DivergesAnalytically);
  const auto custom = borel_cantelli_report(
      two, TargetSpec::shrinking_ball(HFamily::custom({1, 1, 1}), SymbolicSequence::parse("(0)")), 3);
  CHECK(custom.hint == SeriesHint::Numeric);

  const AffineIFS three = line({{0.5, 0.0}, {0.5, 0.5}, {0.5, 1.0}});
  const auto ov = borel_cantelli_report(
      three, TargetSpec::shrinking_ball(HFamily::constant(1.0), SymbolicSequence::parse("(0)")), 200,
      OverlapWitness{2, 8.0 / 9.0});
  CHECK(ov.overlap_series_bound == doctest::Approx(18.0));
  CHECK(ov.overlap_partial_sums.back() <= 18.0 * 2.0 + 1e-9);
  CHECK(ov.overlap_hint == SeriesHint::ConvergesAnalytically);
}

TEST_CASE("restricted coverage") {
  const AffineIFS two = line({{0.5, 0.0}, {0.5, 1.0}});
  const auto spec = TargetSpec::shrinking_ball(HFamily::constant(1.0), SymbolicSequence::parse("(0)"));
  CHECK(restricted_coverage(two, spec, 1, {v1(0.0), Ball{0.2}}, 1024) == doctest::Approx(1.0));
  CHECK(restricted_coverage(two, spec, 1, {v1(10.0), Ball{0.2}}, 1024) == 0.0);
}

TEST_CASE("restricted coverage of the middle third at level 12") {
  const double lambda = std::sqrt(0.5);
  const AffineIFS ifs = line({{lambda, 0.0}, {lambda, 1.0}});
  const double top = 1.0 / (1.0 - lambda);
  const auto spec = TargetSpec::recurrence_ball(HFamily::power_law(1.0, 1.0));
  const PlacedBody third{v1(top / 2.0), Ball{top / 6.0}};
  const double raster = restricted_coverage(ifs, spec, 12, third, 1u << 16);
  // Exact oracle for the same set restricted to the ball.
  const auto bodies = stage_bodies(ifs, spec, 12);
  const double exact = interval_union_measure(bodies, std::make_pair(top / 3.0, 2.0 * top / 3.0)) / (top / 3.0);
  CHECK(raster > 0.0);
  CHECK(std::abs(raster - exact) <= 0.02);
  const double oracle_value =
      oracle::recurrence_coverage_1d(lambda, 12, 12, [](int n) { return 1.0 / n; }, top / 3.0, 2.0 * top / 3.0);
  CHECK(exact == doctest::Approx(oracle_value).epsilon(1e-9));
  CHECK(oracle_value == doctest::Approx(0.079579494347752439).epsilon(1e-12));
}

TEST_CASE("cumulative coverage is nondecreasing") {
  const double lambda = std::sqrt(0.5);
  const AffineIFS ifs = line({{lambda, 0.0}, {lambda, 1.0}});
  const double top = 1.0 / (1.0 - lambda);
  const auto spec = TargetSpec::recurrence_ball(HFamily::power_law(1.0, 1.0));
  const auto stages = cumulative_coverage(ifs, spec, {6, 8, 10}, {v1(top / 2), Ball{top / 2}}, 1u << 14, 6);
  REQUIRE(stages.size() == 3);
  for (std::size_t i = 1; i < stages.size(); ++i) CHECK(*stages[i].exact_fraction >= *stages[i - 1].exact_fraction);
  CHECK(*stages.back().exact_fraction ==
        doctest::Approx(oracle::recurrence_coverage_1d(lambda, 6, 10, [](int n) { return 1.0 / n; })).epsilon(1e-9));
  CHECK_THROWS_AS(cumulative_coverage(ifs, spec, {8, 6}, {v1(1.0), Ball{1.0}}, 64), Error);
}

TEST_CASE("upper density") {
  CHECK(upper_density_estimate(std::vector<bool>(10, true)) == 1.0);
  CHECK(upper_density_estimate(std::vector<bool>(10, false)) == 0.0);
  std::vector<bool> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0;
  CHECK(std::abs(upper_density_estimate(alt) - 0.5) <= 1.0 / 500.0);
}
