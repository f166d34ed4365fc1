#include <doctest.h>

#include <random>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/measure_lab.hpp"
#include "ifsrecur/parallel.hpp"
#include "ifsrecur/rng.hpp"
#include "ifsrecur/transversality_mc.hpp"
#include "oracles.hpp"

using namespace ifsrecur;

namespace {

std::vector<Mat> diag_family(std::vector<double> diag, int m) {
  const auto d = static_cast<Eigen::Index>(diag.size());
  Mat a = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) a(i, i) = diag[static_cast<std::size_t>(i)];
  return std::vector<Mat>(static_cast<std::size_t>(m), a);
}

// Unordered pairs of level-n centers whose copies of E_n meet, by a direct
// double loop over independently composed centers.
std::uint64_t brute_pairs(const std::vector<Mat>& mats, const std::vector<double>& T, int n, double s) {
  const AffineIFS ifs = ifs_at(mats, T);
  const int d = ifs.dim();
  const Vec tail = periodic_fixed_point(ifs, Word{0});
  std::vector<Vec> pts;
  WordSpace(static_cast<std::uint32_t>(mats.size()), static_cast<std::uint32_t>(n))
      .for_each([&](const Word& w) { pts.push_back(oracle::apply_word(ifs, w, tail)); });
  const double lam = std::pow(ifs.lambda_value(), 1.0 / d);
  Vec semi(d);
  for (int i = 0; i < d; ++i) semi(i) = 2.0 * std::pow(mats[0](i, i), n) * s / std::pow(lam, n);
  std::uint64_t count = 0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (std::size_t k = j + 1; k < pts.size(); ++k) {
      double q = 0.0;
      for (int i = 0; i < d; ++i) q += std::pow((pts[j](i) - pts[k](i)) / semi(i), 2);
      if (q <= 1.0 + 1e-12) ++count;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("Philox known answers") {
  const PhiloxCounter zero = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(zero == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  const PhiloxCounter ones = philox4x32_10({~0U, ~0U, ~0U, ~0U}, {~0U, ~0U});
  CHECK(ones == PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
}

TEST_CASE("uniform draws") {
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = uniform01(3, i, 0);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(uniform01(1, 2, 3) == uniform01(1, 2, 3));
  CHECK(uniform01(1, 2, 3) != uniform01(1, 3, 2));
}

TEST_CASE("translation samples are addressable") {
  const auto a = sample_translations(3, 2, 1.5, 10, 42);
  const auto b = sample_translations(3, 2, 1.5, 20, 42);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(a[i].T == b[i].T);
  for (double t : b[7].T) CHECK(std::abs(t) <= 1.5);
  CHECK(b[3].T[4] == uniform_symmetric(42, 3, 4, 1.5));
}

TEST_CASE("only equal positive diagonals are accepted") {
  CHECK(common_positive_diagonal(diag_family({0.3, 0.2}, 3))(1) == 0.2);
  std::vector<Mat> mixed = diag_family({0.3}, 2);
  mixed[1](0, 0) = 0.2;
  CHECK_THROWS_AS(common_positive_diagonal(mixed), Error);
  Mat full(2, 2);
  full << 0.3, 0.1, 0.0, 0.3;
  CHECK_THROWS_AS(common_positive_diagonal({full, full}), Error);
}

TEST_CASE("ellipse semi-axes") {
  const Vec e = ellipse_semi_axes((Vec(2) << 0.4, 0.35).finished(), 3, 4, 0.1);
  const double lam = 3 * 0.4 * 0.35;
  CHECK(e(0) == doctest::Approx(std::pow(0.4, 4) * 0.1 / std::pow(lam, 2.0)));
  CHECK(e(1) == doctest::Approx(std::pow(0.35, 4) * 0.1 / std::pow(lam, 2.0)));
}

TEST_CASE("orbit centers satisfy the shift relation") {
  const auto mats = diag_family({0.4, 0.3}, 3);
  const AffineIFS ifs = ifs_at(mats, sample_translations(3, 2, 1.0, 1, 9)[0].T);
  const auto tail = SymbolicSequence::parse("2(01)");
  const auto centers = orbit_centers(ifs, tail, 3);
  const auto words = WordSpace(3, 3).collect();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Vec direct = project(ifs, SymbolicSequence(words[i] + tail.preperiod, tail.period));
    CHECK((centers[i] - direct).norm() <= 1e-10);
  }
}

TEST_CASE("pair statistic against the direct double loop") {
  const auto one = diag_family({0.45}, 2);
  const auto two = diag_family({0.4, 0.35}, 3);
  for (const auto& p : sample_translations(2, 1, 1.0, 10, 7)) {
    for (double s : {0.05, 0.2}) {
      CHECK(pair_overlap_statistic(one, p, SymbolicSequence::parse("(0)"), 6, s) == brute_pairs(one, p.T, 6, s));
    }
  }
  for (const auto& p : sample_translations(3, 2, 1.0, 5, 7)) {
    CHECK(pair_overlap_statistic(two, p, SymbolicSequence::parse("(0)"), 4, 0.3) == brute_pairs(two, p.T, 4, 0.3));
  }
}

TEST_CASE("pair statistic at the reference configuration") {
  const auto mats = diag_family({0.45}, 2);
  const auto p = sample_translations(2, 1, 1.0, 1, 7)[0];
  const auto value = pair_overlap_statistic(mats, p, SymbolicSequence::parse("(0)"), 6, 2.0);
  CHECK(value == brute_pairs(mats, p.T, 6, 2.0));
  CHECK(value <= 64ULL * 63ULL / 2ULL);
  CHECK(value == 108);
  CHECK(pair_overlap_statistic(mats, p, SymbolicSequence::parse("(0)"), 6, 0.2) == 0);
}

TEST_CASE("coincident centers are always counted") {
  // Maps 0 and 1 are identical, so words that differ only by swapping those
  // symbols share a center: Σ_k C(3,k) C(2^k,2) = 3 + 18 + 28 pairs at n = 3.
  const auto mats = diag_family({0.45}, 3);
  const ParameterSample p{{0.0, 0.0, 1.0}, 0, 0};
  const auto tiny = pair_overlap_statistic(mats, p, SymbolicSequence::parse("(0)"), 3, 1e-9);
  CHECK(tiny >= 49);
  CHECK(pair_overlap_statistic(mats, p, SymbolicSequence::parse("(0)"), 3, 0.3) >= tiny);
}

TEST_CASE("scaling reports are deterministic across thread counts") {
  const auto mats = diag_family({0.45}, 2);
  set_thread_count(1);
  const auto a = mc_scaling(mats, SymbolicSequence::parse("(0)"), 5, 1.0, kDefaultScaleGrid, 40, 11);
  set_thread_count(4);
  const auto b = mc_scaling(mats, SymbolicSequence::parse("(0)"), 5, 1.0, kDefaultScaleGrid, 40, 11);
  set_thread_count(0);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.per_sample == b.per_sample);
}

TEST_CASE("least squares") {
  const auto fit = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
}

TEST_CASE("budgets") {
  const auto mats = diag_family({0.45}, 2);
  CHECK_THROWS_AS(mc_scaling(mats, SymbolicSequence::parse("(0)"), 9, 1.0, {0.1}, 10, 1), Error);
  CHECK_THROWS_AS(mc_scaling(mats, SymbolicSequence::parse("(0)"), 4, 1.0, {0.1}, 501, 1), Error);
}

TEST_CASE("union statistics stay below their bounds") {
  const auto mats = diag_family({0.45}, 2);
  for (const auto& p : sample_translations(2, 1, 1.0, 20, 3)) {
    const AffineIFS ifs = ifs_at(mats, p.T);
    for (double s : {0.1, 0.4}) {
      const UnionSample u = union_measure_statistic(ifs, SymbolicSequence::parse("(0)"), 5, s, 1u << 14);
      CHECK(u.measure <= s + u.boundary_error + 1e-12);
      const UnionSample r = recurrence_union_statistic(ifs_at(mats, p.T, ContractionMode::Strict), 5, s, 1u << 14);
      CHECK(r.measure <= r.bound + r.boundary_error + 1e-12);
    }
  }
  std::vector<Mat> wide = diag_family({0.6}, 2);
  CHECK_THROWS_AS(recurrence_union_statistic(ifs_at(wide, {0.0, 1.0}), 3, 0.1, 256), Error);
}
