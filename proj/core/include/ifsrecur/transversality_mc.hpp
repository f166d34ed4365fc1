#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifsrecur/ifs_core.hpp"
#include "ifsrecur/json_io.hpp"
#include "ifsrecur/pixel_mask.hpp"

namespace ifsrecur {

/// Translation tuple T = (t_1, ..., t_m) flattened to m·d coordinates.
struct ParameterSample {
  std::vector<double> T;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Coordinate k of sample i is uniform01(seed, i, k) mapped to [-R, R].
std::vector<ParameterSample> sample_translations(int m, int d, double R, std::size_t count, std::uint64_t seed);

struct McBudget {
  int max_n = 8;
  std::size_t max_samples = 500;
  std::uint64_t word_budget = kDefaultWordBudget;
  std::uint64_t cell_budget = kDefaultCellBudget;
};

inline const std::vector<double> kDefaultScaleGrid{0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4};

/// The common diagonal of m equal positive diagonal matrices; Unsupported otherwise.
Vec common_positive_diagonal(const std::vector<Mat>& matrices);

/// AffineIFS with the given matrices and translation tuple.
AffineIFS ifs_at(const std::vector<Mat>& matrices, const std::vector<double>& T,
                 ContractionMode mode = ContractionMode::General);

/// S_w(π_T(tail)) for w ∈ I^n in lexicographic order.
std::vector<Vec> orbit_centers(const AffineIFS& ifs, const SymbolicSequence& tail, int n,
                               std::uint64_t budget = kDefaultWordBudget);

/// Semi-axes of E_n = A^n B(0, s / λ(A)^{n/d}) for A = diag(a).
Vec ellipse_semi_axes(const Vec& diagonal, int m, int n, double s);

/// Unordered pairs {j, k} with x_j - x_k in the axis-aligned ellipse with
/// the given semi-axes (closed, relative slack 1e-12).
std::uint64_t count_pairs_in_ellipse(const std::vector<Vec>& points, const Vec& semi_axes);

/// Unordered pairs of level-n words whose translated copies of E_n meet.
std::uint64_t pair_overlap_statistic(const std::vector<Mat>& matrices, const ParameterSample& sample,
                                     const SymbolicSequence& tail, int n, double s,
                                     const McBudget& budget = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingReport {
  std::vector<double> grid;
  std::vector<double> means;
  std::vector<double> stderrs;
  std::vector<bool> fitted;          ///< false where the mean was zero
  std::vector<double> mean_per_word;       ///< mean / m^n
  std::vector<double> empirical_constant;  ///< mean / (m^n s^d)
  double slope = 0.0;
  double intercept = 0.0;
  bool fit_ok = false;
  int n = 0;
  int m = 0;
  int d = 0;
  double R = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<std::vector<std::uint64_t>> per_sample;  ///< [grid index][sample]

  Json to_json() const;
  /// Long format: s,sample_index,statistic.
  std::string to_csv() const;
};

ScalingReport mc_scaling(const std::vector<Mat>& matrices, const SymbolicSequence& tail, int n, double R,
                         const std::vector<double>& s_grid, std::size_t samples, std::uint64_t seed,
                         const McBudget& budget = {});

struct UnionSample {
  double measure = 0.0;
  double boundary_error = 0.0;
  double bound = 0.0;   ///< analytic upper bound on the true union measure
  std::size_t bodies = 0;
};

/// Rasterized measure of ∪_w S_w(π_T(tail) + s E_n), E_n the ball of volume
/// λ(A)^{-n}. Throws Consistency if measure > s^d + boundary error.
UnionSample union_measure_statistic(const AffineIFS& ifs, const SymbolicSequence& tail, int n, double s,
                                    std::uint32_t resolution, const McBudget& budget = {});

/// Rasterized measure of ∪_w π_T(w^∞) + Σ_{k>=1} A_w^k (s E_n), strict
/// contractions only. Throws Consistency if measure exceeds
/// s^d Σ_w |det Σ_k A_w^k| / λ(A)^n + boundary error.
UnionSample recurrence_union_statistic(const AffineIFS& ifs, int n, double s, std::uint32_t resolution,
                                       const McBudget& budget = {});

}  // namespace ifsrecur
