#include <doctest.h>

#include <cmath>
#include <set>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/garsia_algebra.hpp"
#include "ifsrecur/ifs_core.hpp"

using namespace ifsrecur;

namespace {

// Direct 3^n scan over all nonzero coefficient vectors.
double brute_separation(double lambda, int n) {
  double best = 1e300;
  std::vector<int> c(static_cast<std::size_t>(n), -1);
  const long total = static_cast<long>(std::pow(3.0, n));
  for (long code = 0; code < total; ++code) {
    long x = code;
    bool nonzero = false;
    long double s = 0.0L;
    long double p = 1.0L;
    for (int i = 0; i < n; ++i) {
      const int ci = static_cast<int>(x % 3) - 1;
      x /= 3;
      nonzero = nonzero || ci != 0;
      s += ci * p;
      p *= lambda;
    }
    if (nonzero) best = std::min(best, static_cast<double>(std::abs(s)));
  }
  return best;
}

}  // namespace

TEST_CASE("polynomial parsing") {
  CHECK(IntPolynomial::parse("x^6+x^5-x-2") == IntPolynomial{1, 1, 0, 0, 0, -1, -2});
  CHECK(IntPolynomial::parse("[1,0,-2]") == IntPolynomial{1, 0, -2});
  CHECK(IntPolynomial::parse("2*x^3 - x") == IntPolynomial{2, 0, -1, 0});
  CHECK(IntPolynomial::parse("x^2-2").to_string() == "x^2-2");
  CHECK_THROWS_AS(IntPolynomial::parse("x^^2"), Error);
  const IntPolynomial big = IntPolynomial::parse("x^2-123456789012345678901234567890");
  CHECK(big.constant_term() == BigInt("-123456789012345678901234567890"));
}

TEST_CASE("exact division") {
  const IntPolynomial a{1, -1};
  const IntPolynomial b{1, 0, 1};
  const IntPolynomial p = a * b;
  CHECK(p == IntPolynomial{1, -1, 1, -1});
  const auto q = p.divide_exact(a);
  REQUIRE(q.has_value());
  CHECK(*q == b);
  CHECK_FALSE(p.divide_exact(IntPolynomial{1, 2}).has_value());
}

TEST_CASE("root products equal the constant term") {
  for (const char* text : {"x^2-2", "x^6+x^5-x-2", "x^5-x^4-2", "x^3-x-1", "x^7+3*x^2-5", "x^12-2"}) {
    const IntPolynomial p = IntPolynomial::parse(text);
    const auto roots = polynomial_roots(p);
    CHECK(roots.size() == static_cast<std::size_t>(p.degree()));
    double prod = 1.0;
    for (auto r : roots) {
      prod *= std::abs(r);
      CHECK(std::abs(p.evaluate(std::complex<long double>(r.real(), r.imag()))) < 1e-9);
    }
    const double c = std::abs(p.constant_term().convert_to<double>());
    CHECK(std::abs(prod - c) <= 1e-8 * c);
  }
}

TEST_CASE("Garsia verdicts") {
  SUBCASE("square root of two") {
    const GarsiaReport r = is_garsia(IntPolynomial::parse("x^2-2"));
    CHECK(r.verdict == GarsiaVerdict::Garsia);
    REQUIRE(r.real_root_in_1_2.has_value());
    CHECK(*r.real_root_in_1_2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(r.irreducibility == Irreducibility::Certified);
  }
  SUBCASE("sextic example") {
    const GarsiaReport r = is_garsia(IntPolynomial::parse("x^6+x^5-x-2"));
    CHECK(r.verdict == GarsiaVerdict::Garsia);
    REQUIRE(r.real_root_in_1_2.has_value());
    CHECK(*r.real_root_in_1_2 == doctest::Approx(1.08162).epsilon(1e-5));
    CHECK(r.min_conjugate_modulus > 1.0);
  }
  SUBCASE("higher roots of two") {
    for (int k = 3; k <= 12; ++k) {
      const GarsiaReport r = is_garsia(IntPolynomial::parse("x^" + std::to_string(k) + "-2"));
      CHECK(r.verdict == GarsiaVerdict::Garsia);
    }
  }
  SUBCASE("norm not two") {
    const GarsiaReport r = is_garsia(IntPolynomial::parse("x^2-3"));
    CHECK(r.verdict == GarsiaVerdict::NotGarsia);
  }
  SUBCASE("reducible") {
    // (x^2-2)(x+2) has norm 4; (x-1)(x+2) has a root on the unit circle.
    const GarsiaReport r = is_garsia(IntPolynomial{1, 1, -2});
    CHECK(r.verdict != GarsiaVerdict::Garsia);
    const GarsiaReport q = is_garsia(IntPolynomial{1, 0, 0, 0, -4});  // (x^2-2)(x^2+2)
    CHECK(q.verdict == GarsiaVerdict::NotGarsia);
    CHECK(q.factor.has_value());
  }
  SUBCASE("conjugate inside the unit disc") {
    // Irreducible (no integer roots), norm 2, one root of modulus about 0.689.
    const GarsiaReport r = is_garsia(IntPolynomial{1, 2, -2, -2});
    CHECK(r.verdict == GarsiaVerdict::NotGarsia);
    CHECK(r.min_conjugate_modulus < 1.0);
  }
  SUBCASE("golden mean polynomial has norm one") {
    CHECK(is_garsia(IntPolynomial{1, -1, -1}).verdict == GarsiaVerdict::NotGarsia);
  }
  SUBCASE("unsupported and malformed input") {
    CHECK_THROWS_AS(is_garsia(IntPolynomial::parse("x^13-2")), Error);
    CHECK_THROWS_AS(is_garsia(IntPolynomial{2, 0, -2}), Error);
  }
}

TEST_CASE("report JSON carries the verdict") {
  const Json j = is_garsia(IntPolynomial::parse("x^2-2")).to_json();
  CHECK(j.at("verdict") == "Garsia");
  CHECK(j.at("roots").size() == 2);
}

TEST_CASE("separation scan agrees with brute force") {
  for (double lambda : {0.8, 1.0 / std::sqrt(2.0), 0.55, 0.93}) {
    for (int n = 1; n <= 8; ++n) {
      const SeparationScan s = separation_scan(lambda, n);
      CHECK(s.min == doctest::Approx(brute_separation(lambda, n)).epsilon(1e-12));
      CHECK(s.evaluated == (static_cast<std::uint64_t>(std::pow(3.0, n)) - 1) / 2);
      // The witness reproduces the minimum.
      long double v = 0.0L;
      long double p = 1.0L;
      for (int c : s.argmin) {
        v += c * p;
        p *= lambda;
      }
      CHECK(std::abs(static_cast<double>(std::abs(v)) - s.min) <= 1e-13);
      const auto first = std::find_if(s.argmin.begin(), s.argmin.end(), [](int c) { return c != 0; });
      REQUIRE(first != s.argmin.end());
      CHECK(*first == 1);
    }
  }
}

TEST_CASE("separation is nonincreasing in n") {
  for (double lambda : {0.8, 0.6, 1.0 / std::sqrt(2.0)}) {
    double prev = 1e300;
    for (int n = 1; n <= 12; ++n) {
      const double s = separation_min(lambda, n);
      CHECK(s <= prev);
      prev = s;
    }
  }
}

TEST_CASE("separation at lambda 0.8, n = 5") {
  // Exhaustive reference from the direct scan above.
  CHECK(separation_min(0.8, 5) == doctest::Approx(brute_separation(0.8, 5)).epsilon(1e-14));
  CHECK(periodic_separation(0.8, 5) == doctest::Approx(brute_separation(0.8, 5) / (1.0 - std::pow(0.8, 5))));
}

TEST_CASE("separation input checks") {
  CHECK_THROWS_AS(separation_scan(0.4, 3), Error);
  CHECK_THROWS_AS(separation_scan(0.8, kMaxSeparationLength + 1), Error);
}

TEST_CASE("Bernoulli atoms sit at periodic points") {
  const double lambda = 1.0 / std::sqrt(2.0);
  const AffineIFS ifs = AffineIFS::from_json(Json{
      {"d", 1},
      {"maps", {{{"A", {{lambda}}}, {"t", {0.0}}}, {{"A", {{lambda}}}, {"t", {1.0}}}}}});
  const AtomMeasure atoms = bernoulli_atoms(lambda, 6);
  REQUIRE(atoms.atoms.size() == 64);
  const auto words = WordSpace(2, 6).collect();
  double mass = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    CHECK(std::abs(atoms.atoms[i].location - periodic_fixed_point(ifs, words[i])(0)) <= 1e-12);
    mass += atoms.atoms[i].weight;
  }
  CHECK(mass == doctest::Approx(1.0));
  const Histogram h = empirical_density(atoms, 32);
  CHECK(h.total_mass() == doctest::Approx(1.0));
  CHECK(min_atom_gap(atoms) > 0.0);
  // Distinct level-n atoms are separated by at least the periodic separation.
  CHECK(min_atom_gap(atoms) >= periodic_separation(lambda, 6) * (1.0 - 1e-12));
}
