#include "ifsrecur/dimension_calc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifsrecur/errors.hpp"

namespace ifsrecur {

void DimensionInput::validate() const {
  require(!lambdas.empty(), ErrorKind::Domain, "need at least one diagonal entry");
  for (double l : lambdas) {
    require(l > 0.0 && l < 0.5, ErrorKind::Domain, "each lambda_i must lie in (0, 1/2), got " + format_double(l));
  }
  require(lambda_a > 1.0 && std::isfinite(lambda_a), ErrorKind::Domain,
          "lambda(A) must exceed 1, got " + format_double(lambda_a));
  require(s > 1.0 && std::isfinite(s), ErrorKind::Domain, "s must exceed 1, got " + format_double(s));
}

std::vector<double> dimension_exponents(const DimensionInput& in) {
  const double d = static_cast<double>(in.lambdas.size());
  const double log_inv = std::log(1.0 / in.lambda_a);
  std::vector<double> a;
  for (double l : in.lambdas) a.push_back(std::log(l) / log_inv + 1.0 / d);
  return a;
}

DimensionResult dim_lower_bound(const DimensionInput& in) {
  in.validate();
  const std::size_t dn = in.lambdas.size();
  const double d = static_cast<double>(dn);
  const double shift = (in.s - 1.0) / d;
  const double log_inv = std::log(1.0 / in.lambda_a);

  // Work in ascending-λ order so that any permutation of the input gives
  // bit-identical sums.
  std::vector<std::size_t> order(dn);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return in.lambdas[x] < in.lambdas[y]; });
  const std::vector<double> a_input = dimension_exponents(in);

  std::vector<double> ps;
  for (std::size_t i : order) {
    ps.push_back(a_input[i]);
    ps.push_back(a_input[i] + shift);
  }
  std::sort(ps.begin(), ps.end());
  std::vector<double> unique;
  for (double p : ps) {
    if (unique.empty() || p - unique.back() > 1e-14) unique.push_back(p);
  }

  DimensionResult r;
  r.a = a_input;
  bool have = false;
  for (double p : unique) {
    DimensionCandidate c;
    c.p = p;
    double tail = 0.0;
    for (std::size_t i : order) {
      const bool k1 = a_input[i] >= p;
      const bool k2 = a_input[i] + shift <= p;
      require(!(k1 && k2), ErrorKind::Consistency, "K1 and K2 overlap");
      if (k1) {
        c.K1.push_back(i);
      } else if (k2) {
        c.K2.push_back(i);
      } else {
        c.K3.push_back(i);
        tail += std::log(in.lambdas[i]);
      }
    }
    require(c.K1.size() + c.K2.size() + c.K3.size() == dn, ErrorKind::Consistency, "K sets do not partition");
    c.value = static_cast<double>(c.K1.size()) + static_cast<double>(c.K2.size()) * (1.0 - (in.s - 1.0) / (d * p)) +
              static_cast<double>(c.K3.size()) / (d * p) + tail / (p * log_inv);
    for (auto* k : {&c.K1, &c.K2, &c.K3}) std::sort(k->begin(), k->end());
    if (!have || c.value < r.value) {
      r.value = c.value;
      r.p_star = c.p;
      r.K1 = c.K1;
      r.K2 = c.K2;
      r.K3 = c.K3;
      have = true;
    }
    r.candidates.push_back(std::move(c));
  }
  require(r.value >= -1e-12 && r.value <= d + 1e-12, ErrorKind::Consistency,
          "dimension bound " + format_double(r.value) + " outside [0, d]");
  return r;
}

double isotropic_dimension(int d, double lambda, double lambda_a, double s) {
  const double dd = static_cast<double>(d);
  const double a = std::log(lambda) / std::log(1.0 / lambda_a) + 1.0 / dd;
  return dd - (s - 1.0) / (a + (s - 1.0) / dd);
}

Json DimensionResult::to_json() const {
  const auto idx = [](const std::vector<std::size_t>& v) {
    Json out = Json::array();
    for (auto i : v) out.push_back(i);
    return out;
  };
  Json cands = Json::array();
  for (const auto& c : candidates) cands.push_back({{"p", c.p}, {"value", c.value}});
  Json out;
  out["value"] = value;
  out["p_star"] = p_star;
  out["K1"] = idx(K1);
  out["K2"] = idx(K2);
  out["K3"] = idx(K3);
  out["a"] = a;
  out["candidates"] = cands;
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DichotomyVerdict v) {
  switch (v) {
    case DichotomyVerdict::ZeroMeasure: return "ZeroMeasure";
    case DichotomyVerdict::FullMeasure: return "FullMeasure";
    case DichotomyVerdict::Undecided: return "Undecided";
  }
  return "Undecided";
}

Json DichotomyResult::to_json() const {
  return {{"verdict", std::string(to_string(verdict))}, {"series", series}, {"note", note}};
}

DichotomyResult garsia_hausdorff_criterion(double s, const HFamily& h) {
  require(std::isfinite(s) && s > 0.0, ErrorKind::Domain, "s must be positive, got " + format_double(s));
  DichotomyResult r;
  if (s > 1.0) {
    r.series = "not evaluated";
    r.note = "for s > 1 every subset of the line has zero s-dimensional Hausdorff measure; the dichotomy is vacuous";
    return r;
  }
  if (!h.analytic()) {
    r.series = "not evaluated";
    r.note = "tabulated h has no closed-form convergence test";
    return r;
  }
  if (h.kind == HFamily::Kind::PowerLaw && h.c > 0.0 && h.alpha < 0.0) {
    fail(ErrorKind::Domain, "h must be bounded; power law with negative exponent is not");
  }
  const bool zero = h.c == 0.0;
  bool diverges = false;
  if (zero) {
    diverges = false;
    r.note = "h vanishes identically";
  } else if (s < 1.0) {
    diverges = true;
    r.note = "2^{n(1-s)} grows geometrically and h(n)^s decays at most polynomially";
  } else if (h.kind == HFamily::Kind::Constant) {
    diverges = true;
    r.note = "constant terms";
  } else {
    diverges = h.alpha <= 1.0;
    r.note = "p-series with exponent " + format_double(h.alpha);
  }
  r.series = diverges ? "diverges" : "converges";
  r.verdict = diverges ? DichotomyVerdict::FullMeasure : DichotomyVerdict::ZeroMeasure;
  return r;
}

}  // namespace ifsrecur
