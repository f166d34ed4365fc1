#pragma once

#include <string>
#include <vector>

#include "ifsrecur/bodies.hpp"
#include "ifsrecur/json_io.hpp"

namespace ifsrecur {

struct DimensionInput {
  std::vector<double> lambdas;  ///< diagonal entries, each in (0, 1/2)
  double lambda_a = 0.0;        ///< λ(A) > 1
  double s = 0.0;               ///< > 1

  void validate() const;
};

struct DimensionCandidate {
  double p = 0.0;
  double value = 0.0;
  std::vector<std::size_t> K1;
  std::vector<std::size_t> K2;
  std::vector<std::size_t> K3;
};

struct DimensionResult {
  double value = 0.0;
  double p_star = 0.0;
  std::vector<std::size_t> K1;  ///< 0-based indices into the input order
  std::vector<std::size_t> K2;
  std::vector<std::size_t> K3;
  std::vector<double> a;
  std::vector<DimensionCandidate> candidates;

  Json to_json() const;
};

/// a_i = log λ_i / log λ(A)^{-1} + 1/d.
std::vector<double> dimension_exponents(const DimensionInput& in);

/// Minimum over p ∈ {a_i, a_i + (s-1)/d} of
/// #K1 + #K2 (1 - (s-1)/(dp)) + #K3/(dp) + Σ_{K3} log λ_i / (p log λ(A)^{-1}).
DimensionResult dim_lower_bound(const DimensionInput& in);

/// d - (s-1) / (a + (s-1)/d) with a = log λ / log λ(A)^{-1} + 1/d.
double isotropic_dimension(int d, double lambda, double lambda_a, double s);

enum class DichotomyVerdict { ZeroMeasure, FullMeasure, Undecided };
std::string_view to_string(DichotomyVerdict v);

struct DichotomyResult {
  DichotomyVerdict verdict = DichotomyVerdict::Undecided;
  std::string series;  ///< behaviour of Σ 2^{n(1-s)} h(n)^s
  std::string note;

  Json to_json() const;
};

/// Convergence of Σ 2^{n(1-s)} h(n)^s decides H^s(B ∩ R) = 0 or H^s(B).
DichotomyResult garsia_hausdorff_criterion(double s, const HFamily& h);

}  // namespace ifsrecur
