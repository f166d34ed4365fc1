#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ifsrecur/json_io.hpp"
#include "ifsrecur/polynomial.hpp"

namespace ifsrecur {

enum class Irreducibility { Certified, NotCertified };
enum class GarsiaVerdict { Garsia, NotGarsia, Inconclusive };

std::string_view to_string(Irreducibility v);
std::string_view to_string(GarsiaVerdict v);

inline constexpr double kGarsiaMargin = 1e-9;

struct GarsiaReport {
  IntPolynomial polynomial;
  BigInt constant_term;
  std::vector<std::complex<double>> roots;
  std::optional<double> real_root_in_1_2;
  /// Moduli of every root except the real root in (1,2), when that root is unique.
  std::vector<double> conjugate_moduli;
  double min_conjugate_modulus = 0.0;
  Irreducibility irreducibility = Irreducibility::NotCertified;
  std::optional<IntPolynomial> factor;  ///< proper factor, when one was found
  GarsiaVerdict verdict = GarsiaVerdict::Inconclusive;
  std::vector<std::string> reasons;

  Json to_json() const;
};

/// Monic, degree 1..12.
GarsiaReport is_garsia(const IntPolynomial& p);

struct SeparationScan {
  double lambda = 0.0;
  int n = 0;
  double min = 0.0;
  std::uint64_t evaluated = 0;          ///< always (3^n - 1) / 2
  std::vector<int> argmin;              ///< minimizing c in {-1,0,1}^n, first nonzero +1
};

inline constexpr int kMaxSeparationLength = 16;

/// min |Σ_{i<n} c_i λ^i| over nonzero c ∈ {-1,0,1}^n, by exhaustive scan
/// of the sign-canonical vectors (first nonzero entry +1).
SeparationScan separation_scan(double lambda, int n);
double separation_min(double lambda, int n);

/// separation_min / (1 - λ^n): least gap between distinct level-n periodic points.
double periodic_separation(double lambda, int n);

struct Atom {
  double location;
  double weight;
};

struct AtomMeasure {
  int n = 0;
  double lambda = 0.0;
  std::vector<Atom> atoms;  ///< lexicographic order of a ∈ {0,1}^n

  double support_end() const { return 1.0 / (1.0 - lambda); }
};

/// Atoms at (Σ a_i λ^{i-1}) / (1 - λ^n), weight 2^{-n}.
AtomMeasure bernoulli_atoms(double lambda, int n, std::uint64_t budget = std::uint64_t{1} << 24);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  double bin_width = 0.0;
  std::vector<double> density;

  double total_mass() const;
};

/// Atom mass per bin divided by bin width over [0, 1/(1-λ)].
Histogram empirical_density(const AtomMeasure& atoms, int bins);

/// Smallest gap between consecutive sorted atom locations (distinct atoms).
double min_atom_gap(const AtomMeasure& atoms);

}  // namespace ifsrecur
