#include "ifsrecur/garsia_algebra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/ifs_core.hpp"
#include "ifsrecur/parallel.hpp"

namespace ifsrecur {

std::string_view to_string(Irreducibility v) {
  return v == Irreducibility::Certified ? "Certified" : "NotCertified";
}

std::string_view to_string(GarsiaVerdict v) {
  switch (v) {
    case GarsiaVerdict::Garsia: return "Garsia";
    case GarsiaVerdict::NotGarsia: return "NotGarsia";
    case GarsiaVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Json GarsiaReport::to_json() const {
  Json roots_json = Json::array();
  for (const auto& r : roots) roots_json.push_back(Json::array({r.real(), r.imag()}));
  Json out;
  out["polynomial"] = polynomial.to_string();
  out["coefficients"] = polynomial.to_json();
  out["constant_term"] = bigint_to_json(constant_term);
  out["real_root_in_1_2"] = real_root_in_1_2 ? Json(*real_root_in_1_2) : Json(nullptr);
  out["conjugate_moduli"] = conjugate_moduli;
  out["min_conjugate_modulus"] = min_conjugate_modulus;
  out["irreducibility"] = std::string(to_string(irreducibility));
  out["factor"] = factor ? Json(factor->to_string()) : Json(nullptr);
  out["verdict"] = std::string(to_string(verdict));
  out["reasons"] = reasons;
  out["roots"] = roots_json;
  return out;
}

namespace {

struct FactorSearch {
  Irreducibility status = Irreducibility::Certified;
  std::optional<IntPolynomial> factor;
  bool near_miss = false;
};

// Every monic integer factor of p is a product of (x - r) over some subset of
// the roots, so trying all subsets of size <= k/2 either finds one or proves
// there is none, up to the rounding tolerance.
FactorSearch search_factors(const IntPolynomial& p, const std::vector<std::complex<double>>& roots) {
  FactorSearch out;
  const int k = static_cast<int>(roots.size());
  constexpr long double tol = 1e-6L;
  for (std::uint32_t mask = 1; mask < (1u << k) - 1; ++mask) {
    const int bits = std::popcount(mask);
    if (2 * bits > k) continue;
    std::vector<std::complex<double>> subset;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) subset.push_back(roots[static_cast<std::size_t>(i)]);
    }
    const auto c = monic_from_roots(subset);
    bool integral = true;
    std::vector<BigInt> rounded;
    for (const auto& v : c) {
      const long double re = std::round(v.real());
      if (std::abs(v.imag()) > tol || std::abs(v.real() - re) > tol) {
        integral = false;
        break;
      }
      rounded.emplace_back(static_cast<long long>(re));
    }
    if (!integral) continue;
    IntPolynomial candidate(std::move(rounded));
    if (p.divide_exact(candidate)) {
      out.status = Irreducibility::NotCertified;
      out.factor = candidate;
      return out;
    }
    out.near_miss = true;
    out.status = Irreducibility::NotCertified;
  }
  return out;
}

}  // namespace

GarsiaReport is_garsia(const IntPolynomial& p) {
  const int k = p.degree();
  require(k >= 1 && k <= 12, ErrorKind::Unsupported,
          "Garsia check supports degree 1..12, got " + std::to_string(k));
  require(p.is_monic(), ErrorKind::Domain, "Garsia check needs a monic polynomial, got " + p.to_string());

  GarsiaReport r;
  r.polynomial = p;
  r.constant_term = p.constant_term();
  r.roots = polynomial_roots(p);

  constexpr double m = kGarsiaMargin;
  std::vector<std::size_t> in_interval;
  bool near_interval_edge = false;
  for (std::size_t i = 0; i < r.roots.size(); ++i) {
    const auto z = r.roots[i];
    if (std::abs(z.imag()) > m) continue;
    if (z.real() > 1.0 + m && z.real() < 2.0 - m) in_interval.push_back(i);
    if (std::abs(z.real() - 1.0) <= m || std::abs(z.real() - 2.0) <= m) near_interval_edge = true;
  }
  const bool unique_root = in_interval.size() == 1;
  if (unique_root) r.real_root_in_1_2 = r.roots[in_interval.front()].real();
  for (std::size_t i = 0; i < r.roots.size(); ++i) {
    if (unique_root && i == in_interval.front()) continue;
    r.conjugate_moduli.push_back(std::abs(r.roots[i]));
  }
  r.min_conjugate_modulus = r.conjugate_moduli.empty()
                                ? std::numeric_limits<double>::infinity()
                                : *std::min_element(r.conjugate_moduli.begin(), r.conjugate_moduli.end());

  const FactorSearch fs = k == 1 ? FactorSearch{} : search_factors(p, r.roots);
  r.irreducibility = fs.status;
  r.factor = fs.factor;

  bool definite = false;
  bool doubtful = false;
  const BigInt abs_c = r.constant_term < 0 ? BigInt(-r.constant_term) : r.constant_term;
  if (abs_c != 2) {
    definite = true;
    r.reasons.push_back("constant term is " + r.constant_term.str() + ", not +-2");
  }
  bool near_circle = false;
  for (const auto& z : r.roots) {
    const double mod = std::abs(z);
    if (mod <= 1.0 - m) {
      definite = true;
      r.reasons.push_back("root of modulus " + format_double(mod) + " inside the unit disk");
      break;
    }
    if (std::abs(mod - 1.0) <= m) near_circle = true;
  }
  if (fs.factor) {
    definite = true;
    r.reasons.push_back("factor " + fs.factor->to_string() + " divides the polynomial");
  }
  if (in_interval.empty() && !near_interval_edge) {
    definite = true;
    r.reasons.push_back("no real root in (1,2)");
  }
  if (near_circle) {
    doubtful = true;
    r.reasons.push_back("a root modulus is within the margin of 1");
  }
  if (near_interval_edge) {
    doubtful = true;
    r.reasons.push_back("a real root is within the margin of 1 or 2");
  }
  if (in_interval.size() > 1) {
    doubtful = true;
    r.reasons.push_back("more than one real root in (1,2)");
  }
  if (fs.near_miss && !fs.factor) {
    doubtful = true;
    r.reasons.push_back("a root subset has near-integer coefficients but does not divide");
  }
  if (unique_root && r.min_conjugate_modulus <= 1.0 + m && !near_circle && !definite) {
    doubtful = true;
    r.reasons.push_back("a conjugate lies within the margin of the unit circle");
  }

  if (definite) {
    r.verdict = GarsiaVerdict::NotGarsia;
  } else if (doubtful || !unique_root || r.irreducibility != Irreducibility::Certified) {
    r.verdict = GarsiaVerdict::Inconclusive;
  } else {
    r.verdict = GarsiaVerdict::Garsia;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Separation

namespace {

std::uint64_t pow3(int n) {
  std::uint64_t v = 1;
  for (int i = 0; i < n; ++i) v *= 3;
  return v;
}

void check_lambda(double lambda) {
  require(lambda > 0.5 && lambda < 1.0, ErrorKind::Domain,
          "lambda must lie in (1/2, 1), got " + format_double(lambda));
}

struct ScanPartial {
  double min = std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
  std::uint64_t evaluated = 0;
};

}  // namespace

SeparationScan separation_scan(double lambda, int n) {
  check_lambda(lambda);
  require(n >= 1, ErrorKind::Domain, "separation length must be >= 1");
  require(n <= kMaxSeparationLength, ErrorKind::Budget,
          "separation length " + std::to_string(n) + " exceeds the budget of " +
              std::to_string(kMaxSeparationLength));

  std::vector<double> powers(static_cast<std::size_t>(n));
  powers[0] = 1.0;
  for (int i = 1; i < n; ++i) powers[static_cast<std::size_t>(i)] = powers[static_cast<std::size_t>(i - 1)] * lambda;

  // Flat index space: block f holds the 3^{n-1-f} vectors whose first nonzero
  // entry is at position f.
  std::vector<std::uint64_t> block_start(static_cast<std::size_t>(n) + 1, 0);
  for (int f = 0; f < n; ++f) block_start[static_cast<std::size_t>(f) + 1] = block_start[static_cast<std::size_t>(f)] + pow3(n - 1 - f);
  const std::uint64_t total = block_start.back();

  const auto decode = [&](std::uint64_t idx, std::vector<int>& c) {
    int f = 0;
    while (idx >= block_start[static_cast<std::size_t>(f) + 1]) ++f;
    std::uint64_t tail = idx - block_start[static_cast<std::size_t>(f)];
    std::fill(c.begin(), c.end(), 0);
    c[static_cast<std::size_t>(f)] = 1;
    for (int j = n - 1; j > f; --j) {
      c[static_cast<std::size_t>(j)] = static_cast<int>(tail % 3) - 1;
      tail /= 3;
    }
    return f;
  };

  const std::size_t grain = 1 << 16;
  const ScanPartial best = parallel_reduce(
      total, grain, ScanPartial{},
      [&](std::size_t begin, std::size_t end) {
        ScanPartial part;
        std::vector<int> c(static_cast<std::size_t>(n));
        int f = decode(begin, c);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += c[static_cast<std::size_t>(j)] * powers[static_cast<std::size_t>(j)];
        for (std::size_t idx = begin; idx < end; ++idx) {
          const double v = std::abs(sum);
          if (v < part.min) {
            part.min = v;
            part.index = idx;
          }
          ++part.evaluated;
          if (idx + 1 == end) break;
          if (idx + 1 == block_start[static_cast<std::size_t>(f) + 1]) {
            f = decode(idx + 1, c);
            sum = 0.0;
            for (int j = 0; j < n; ++j) sum += c[static_cast<std::size_t>(j)] * powers[static_cast<std::size_t>(j)];
            continue;
          }
          // Odometer on positions f+1..n-1, digits -1,0,1.
          for (int j = n - 1; j > f; --j) {
            auto& d = c[static_cast<std::size_t>(j)];
            if (d < 1) {
              ++d;
              sum += powers[static_cast<std::size_t>(j)];
              break;
            }
            d = -1;
            sum -= 2.0 * powers[static_cast<std::size_t>(j)];
          }
        }
        return part;
      },
      [](const ScanPartial& a, const ScanPartial& b) {
        ScanPartial out = b.min < a.min ? b : a;
        out.evaluated = a.evaluated + b.evaluated;
        return out;
      });

  SeparationScan scan;
  scan.lambda = lambda;
  scan.n = n;
  scan.evaluated = best.evaluated;
  scan.argmin.assign(static_cast<std::size_t>(n), 0);
  decode(best.index, scan.argmin);
  // Recompute from scratch so the reported value does not carry the
  // incremental rounding drift.
  double exact = 0.0;
  for (int j = 0; j < n; ++j) exact += scan.argmin[static_cast<std::size_t>(j)] * powers[static_cast<std::size_t>(j)];
  scan.min = std::abs(exact);
  return scan;
}

double separation_min(double lambda, int n) { return separation_scan(lambda, n).min; }

double periodic_separation(double lambda, int n) {
  return separation_min(lambda, n) / (1.0 - std::pow(lambda, n));
}

// ---------------------------------------------------------------------------
// Atoms

AtomMeasure bernoulli_atoms(double lambda, int n, std::uint64_t budget) {
  check_lambda(lambda);
  require(n >= 1 && n < 63, ErrorKind::Domain, "atom level must be in [1, 62]");
  const std::uint64_t count = checked_word_count(2, static_cast<std::uint32_t>(n), budget);
  AtomMeasure out;
  out.n = n;
  out.lambda = lambda;
  out.atoms.resize(count);
  const double denom = 1.0 - std::pow(lambda, n);
  const double weight = std::ldexp(1.0, -n);
  std::vector<double> powers(static_cast<std::size_t>(n));
  powers[0] = 1.0;
  for (int i = 1; i < n; ++i) powers[static_cast<std::size_t>(i)] = powers[static_cast<std::size_t>(i - 1)] * lambda;
  parallel_chunks(count, 1 << 14, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if ((idx >> (n - 1 - i)) & 1u) sum += powers[static_cast<std::size_t>(i)];
      }
      out.atoms[idx] = {sum / denom, weight};
    }
  });
  return out;
}

double Histogram::total_mass() const {
  double mass = 0.0;
  for (double d : density) mass += d * bin_width;
  return mass;
}

Histogram empirical_density(const AtomMeasure& atoms, int bins) {
  require(bins >= 1, ErrorKind::Domain, "histogram needs at least one bin");
  Histogram h;
  h.lo = 0.0;
  h.hi = atoms.support_end();
  h.bin_width = (h.hi - h.lo) / bins;
  std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
  for (const auto& a : atoms.atoms) {
    auto b = static_cast<long long>(std::floor((a.location - h.lo) / h.bin_width));
    b = std::clamp<long long>(b, 0, bins - 1);
    mass[static_cast<std::size_t>(b)] += a.weight;
  }
  h.density.resize(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) h.density[i] = mass[i] / h.bin_width;
  return h;
}

double min_atom_gap(const AtomMeasure& atoms) {
  std::vector<double> loc;
  loc.reserve(atoms.atoms.size());
  for (const auto& a : atoms.atoms) loc.push_back(a.location);
  std::sort(loc.begin(), loc.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < loc.size(); ++i) gap = std::min(gap, loc[i] - loc[i - 1]);
  return gap;
}

}  // namespace ifsrecur
