#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ifsrecur/bodies.hpp"
#include "ifsrecur/json_io.hpp"

namespace ifsrecur {

/// Boxes y_n + Π[-δ_{i,n}, δ_{i,n}] with every δ_{i,·} nonincreasing in n.
struct ShrinkingRectangleFamily {
  std::vector<Vec> centers;
  std::vector<Vec> halfwidths;

  std::size_t size() const { return centers.size(); }
  int dim() const { return centers.empty() ? 0 : static_cast<int>(centers.front().size()); }
  /// Throws Domain when shapes mismatch or a side length increases.
  void validate() const;
};

/// Closed boxes intersect iff they overlap on every axis.
bool boxes_intersect(const Vec& c1, const Vec& h1, const Vec& c2, const Vec& h2);

/// Walks the family in order and keeps each rectangle disjoint from all kept
/// so far. Returns 0-based indices.
std::vector<std::size_t> greedy_disjoint_cover(const ShrinkingRectangleFamily& family);

/// Input cells (center-sampled at `resolution` per axis over the family's
/// bounding window) not covered by the 3-dilates of the selection.
std::uint64_t uncovered_cells(const ShrinkingRectangleFamily& family, const std::vector<std::size_t>& selected,
                              std::uint32_t resolution);

/// x - x' ∈ 2sE, the closed-body intersection test for a symmetric convex E,
/// with relative slack 1e-12.
bool translates_intersect(const Vec& x, const Vec& y, const Shape& shape, double s);

/// First-fit maximal (s,E)-separated subset, in input order.
std::vector<std::size_t> max_separated_subset(const std::vector<Vec>& points, const Shape& shape, double s);

inline constexpr std::size_t kMaxExactSeparatedPoints = 20;

/// A largest (s,E)-separated subset by exhaustive search, at most 20 points.
std::vector<std::size_t> max_separated_subset_exact(const std::vector<Vec>& points, const Shape& shape, double s);

/// Ordered pairs (l, l'), l ≠ l', whose s-scaled translates intersect.
std::uint64_t count_overlap_pairs(const std::vector<Vec>& points, const Shape& shape, double s);

/// Rows of a numeric CSV; a non-numeric first row is taken as a header.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path);

/// One point per CSV row; a non-numeric first row is taken as a header.
std::vector<Vec> read_points_csv(const std::filesystem::path& path);

Json indices_to_json(const std::vector<std::size_t>& indices);

}  // namespace ifsrecur
