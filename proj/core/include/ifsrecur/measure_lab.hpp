#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ifsrecur/bodies.hpp"
#include "ifsrecur/ifs_core.hpp"
#include "ifsrecur/pixel_mask.hpp"

namespace ifsrecur {

/// One body per w ∈ I^n: S_w(x_n + E_n), lexicographic in w.
std::vector<PlacedBody> stage_target_bodies(const AffineIFS& ifs, const TargetSpec& spec, int n,
                                            std::uint64_t budget = kDefaultWordBudget);

/// One body per w ∈ I^n, lexicographic in w: the set of x with T_w(x) ∈ x + E_n,
/// i.e. π(w̄^∞) + (A_w̄⁻¹ - I)⁻¹ E_n.
std::vector<PlacedBody> stage_recurrence_bodies(const AffineIFS& ifs, const TargetSpec& spec, int n,
                                                std::uint64_t budget = kDefaultWordBudget);

/// Dispatches on the target mode.
std::vector<PlacedBody> stage_bodies(const AffineIFS& ifs, const TargetSpec& spec, int n,
                                     std::uint64_t budget = kDefaultWordBudget);

double measure_union(const PixelMask& mask);

/// Σ of body volumes: an upper bound for the union in any dimension.
double analytic_volume_sum(const std::vector<PlacedBody>& bodies);

/// Exact Lebesgue measure of a union of 1D bodies, optionally restricted to [lo, hi].
double interval_union_measure(const std::vector<PlacedBody>& bodies,
                              std::optional<std::pair<double, double>> clip = std::nullopt);

/// Cell counts c_nm = #(mask_n ∧ mask_m); measures are counts × cell volume.
struct IntersectionTable {
  std::vector<std::uint64_t> counts;
  std::size_t size = 0;
  double cell_volume = 0.0;

  std::uint64_t count(std::size_t i, std::size_t j) const { return counts[i * size + j]; }
  double at(std::size_t i, std::size_t j) const { return static_cast<double>(count(i, j)) * cell_volume; }
  Eigen::MatrixXd measures() const;
};

IntersectionTable pairwise_intersection_table(const std::vector<PixelMask>& masks);
/// Cellwise or of all masks.
PixelMask union_mask(const std::vector<PixelMask>& masks);

/// (Σ μ(E_n))² / Σ_{n,m} μ(E_n ∩ E_m).
double kochen_stone_bound(const Eigen::MatrixXd& table);
double kochen_stone_bound(const IntersectionTable& table);
/// Σ μ(E_n) - Σ_{n<m} μ(E_n ∩ E_m); may be negative.
double bonferroni_bound(const Eigen::MatrixXd& table);
double bonferroni_bound(const IntersectionTable& table);

/// The two bounds checked against the union in integer cell arithmetic.
bool kochen_stone_holds_exactly(const IntersectionTable& table, std::uint64_t union_cells);
bool bonferroni_holds_exactly(const IntersectionTable& table, std::uint64_t union_cells);

/// 1 - |det A_w| / λ(A)^{|w|}.
double exact_overlap_gamma(const AffineIFS& ifs, const Word& w);

struct OverlapPair {
  Word u;
  Word v;
  /// Equality re-verified in exact rational arithmetic on the binary values
  /// of the coefficients.
  bool exact = false;
};

inline constexpr double kOverlapTolerance = 1e-9;

/// Pairs u < v of equal length <= max_len with S_u = S_v coefficientwise
/// within 1e-9.
std::vector<OverlapPair> detect_exact_overlaps(const AffineIFS& ifs, int max_len,
                                               std::uint64_t budget = kDefaultWordBudget);

/// min_l #I_l λ_l / (Π_l #I_l λ_l)^{1/d}.
double product_ifs_criterion(const std::vector<int>& factor_sizes, const std::vector<double>& factor_ratios);

enum class SeriesHint { ConvergesAnalytically, DivergesAnalytically, Numeric };
std::string_view to_string(SeriesHint h);

struct OverlapWitness {
  int k = 0;        ///< length of the overlapping words
  double gamma = 0.0;
};

struct BorelCantelliReport {
  std::vector<double> level_bounds;   ///< upper bound on the level-n hit-set measure, n = 1..N
  std::vector<double> partial_sums;
  SeriesHint hint = SeriesHint::Numeric;
  std::optional<OverlapWitness> overlap;
  std::vector<double> overlap_level_bounds;  ///< γ^{⌊n/k⌋} · level bound
  std::vector<double> overlap_partial_sums;
  double overlap_series_bound = 0.0;        ///< Σ_{n>=0} γ^{⌊n/k⌋} = k / (1 - γ)
  SeriesHint overlap_hint = SeriesHint::Numeric;
};

BorelCantelliReport borel_cantelli_report(const AffineIFS& ifs, const TargetSpec& spec, int N,
                                          std::optional<OverlapWitness> overlap = std::nullopt);

/// Fraction of the ball's cells covered by the level-n bodies.
double restricted_coverage(const AffineIFS& ifs, const TargetSpec& spec, int n, const PlacedBody& ball,
                           std::uint32_t resolution);

struct CoverageStage {
  int n = 0;
  double raster_fraction = 0.0;
  std::optional<double> exact_fraction;  ///< d = 1 only
};

/// Coverage of the ball by the union of levels first_level..N for each N in
/// `levels` (ascending).
std::vector<CoverageStage> cumulative_coverage(const AffineIFS& ifs, const TargetSpec& spec,
                                               const std::vector<int>& levels, const PlacedBody& ball,
                                               std::uint32_t resolution, int first_level = 1);

/// max over n in [⌈N/2⌉, N] of #{j <= n : indicator[j-1]} / n.
double upper_density_estimate(const std::vector<bool>& indicator);

}  // namespace ifsrecur
