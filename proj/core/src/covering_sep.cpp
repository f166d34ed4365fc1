#include "ifsrecur/covering_sep.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/parallel.hpp"
#include "ifsrecur/pixel_mask.hpp"

namespace ifsrecur {

void ShrinkingRectangleFamily::validate() const {
  require(centers.size() == halfwidths.size(), ErrorKind::Domain, "centers and halfwidths differ in length");
  const int d = dim();
  for (std::size_t n = 0; n < size(); ++n) {
    require(centers[n].size() == d && halfwidths[n].size() == d, ErrorKind::Domain,
            "rectangle " + std::to_string(n) + " has the wrong dimension");
    require((halfwidths[n].array() > 0.0).all(), ErrorKind::Domain,
            "rectangle " + std::to_string(n) + " has a nonpositive side");
    if (n > 0) {
      for (int i = 0; i < d; ++i) {
        require(halfwidths[n](i) <= halfwidths[n - 1](i), ErrorKind::Domain,
                "side lengths must be nonincreasing: axis " + std::to_string(i) + " grows at rectangle " +
                    std::to_string(n));
      }
    }
  }
}

bool boxes_intersect(const Vec& c1, const Vec& h1, const Vec& c2, const Vec& h2) {
  for (Eigen::Index i = 0; i < c1.size(); ++i) {
    if (std::abs(c1(i) - c2(i)) > h1(i) + h2(i)) return false;
  }
  return true;
}

std::vector<std::size_t> greedy_disjoint_cover(const ShrinkingRectangleFamily& family) {
  family.validate();
  std::vector<std::size_t> selected;
  for (std::size_t n = 0; n < family.size(); ++n) {
    const bool free = std::none_of(selected.begin(), selected.end(), [&](std::size_t k) {
      return boxes_intersect(family.centers[n], family.halfwidths[n], family.centers[k], family.halfwidths[k]);
    });
    if (free) selected.push_back(n);
  }
  return selected;
}

std::uint64_t uncovered_cells(const ShrinkingRectangleFamily& family, const std::vector<std::size_t>& selected,
                              std::uint32_t resolution) {
  std::vector<PlacedBody> inputs;
  std::vector<PlacedBody> dilates;
  for (std::size_t n = 0; n < family.size(); ++n) inputs.push_back({family.centers[n], Box{family.halfwidths[n]}});
  for (std::size_t k : selected) dilates.push_back({family.centers[k], Box{3.0 * family.halfwidths[k]}});
  if (inputs.empty()) return 0;
  const Window w = bounding_window(inputs);
  const std::vector<std::uint32_t> res(static_cast<std::size_t>(family.dim()), resolution);
  const PixelMask in = rasterize(inputs, w, res);
  const PixelMask cover = rasterize(dilates, w, res);
  return in.occupied_count() - intersection_count(in, cover);
}

bool translates_intersect(const Vec& x, const Vec& y, const Shape& shape, double s) {
  return shape_contains(scale_shape(shape, 2.0 * s), x - y, 1e-12);
}

namespace {

void check_points(const std::vector<Vec>& points, const Shape& shape, double s) {
  require(s > 0.0, ErrorKind::Domain, "s must be positive");
  if (points.empty()) return;
  const int d = static_cast<int>(points.front().size());
  for (const auto& p : points) require(p.size() == d, ErrorKind::Domain, "points have mixed dimensions");
  validate_shape(shape, d);
}

}  // namespace

std::vector<std::size_t> max_separated_subset(const std::vector<Vec>& points, const Shape& shape, double s) {
  check_points(points, shape, s);
  const Shape twice = scale_shape(shape, 2.0 * s);
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool free = std::none_of(selected.begin(), selected.end(), [&](std::size_t k) {
      return shape_contains(twice, points[i] - points[k], 1e-12);
    });
    if (free) selected.push_back(i);
  }
  return selected;
}

std::vector<std::size_t> max_separated_subset_exact(const std::vector<Vec>& points, const Shape& shape, double s) {
  check_points(points, shape, s);
  const std::size_t n = points.size();
  require(n <= kMaxExactSeparatedPoints, ErrorKind::Budget,
          "exact separated subset supports at most " + std::to_string(kMaxExactSeparatedPoints) + " points");
  std::vector<std::uint32_t> conflict(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && translates_intersect(points[i], points[j], shape, s)) conflict[i] |= 1u << j;
    }
  }
  std::uint32_t best = 0;
  // Branch on the lowest remaining vertex; prune with the popcount bound.
  const auto search = [&](auto&& self, std::uint32_t chosen, std::uint32_t candidates) -> void {
    if (std::popcount(chosen) + std::popcount(candidates) <= std::popcount(best)) return;
    if (candidates == 0) {
      best = chosen;
      return;
    }
    const int v = std::countr_zero(candidates);
    const std::uint32_t bit = 1u << v;
    self(self, chosen | bit, candidates & ~bit & ~conflict[static_cast<std::size_t>(v)]);
    self(self, chosen, candidates & ~bit);
  };
  search(search, 0u, n == 32 ? ~0u : (1u << n) - 1u);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (best & (1u << i)) out.push_back(i);
  }
  return out;
}

std::uint64_t count_overlap_pairs(const std::vector<Vec>& points, const Shape& shape, double s) {
  check_points(points, shape, s);
  if (points.size() < 2) return 0;
  const int d = static_cast<int>(points.front().size());
  const Shape twice = scale_shape(shape, 2.0 * s);
  const double reach = shape_halfwidths(twice, d)(0) * (1.0 + 1e-12);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a](0) < points[b](0); });
  const std::uint64_t unordered = parallel_reduce(
      order.size(), 256, std::uint64_t{0},
      [&](std::size_t begin, std::size_t end) {
        std::uint64_t c = 0;
        for (std::size_t i = begin; i < end; ++i) {
          const Vec& p = points[order[i]];
          for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Vec& q = points[order[j]];
            if (q(0) - p(0) > reach) break;
            if (shape_contains(twice, q - p, 1e-12)) ++c;
          }
        }
        return c;
      },
      [](std::uint64_t a, std::uint64_t b) { return a + b; });
  return 2 * unordered;
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Config, "cannot read CSV file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::logic_error&) {
        numeric = false;
      }
    }
    if (!numeric) {
      require(rows.empty() && row == 1, ErrorKind::Config,
              "non-numeric value on row " + std::to_string(row) + " of " + path.string());
      continue;
    }
    require(rows.empty() || rows.front().size() == values.size(), ErrorKind::Config,
            "row " + std::to_string(row) + " has a different number of columns");
    rows.push_back(std::move(values));
  }
  return rows;
}

std::vector<Vec> read_points_csv(const std::filesystem::path& path) {
  std::vector<Vec> points;
  for (const auto& values : read_numeric_csv(path)) {
    require(values.size() <= static_cast<std::size_t>(kMaxDim), ErrorKind::Config,
            "points must have 1.." + std::to_string(kMaxDim) + " coordinates");
    Vec p(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) p(static_cast<Eigen::Index>(i)) = values[i];
    points.push_back(p);
  }
  return points;
}

Json indices_to_json(const std::vector<std::size_t>& indices) {
  Json out = Json::array();
  for (auto i : indices) out.push_back(i);
  return out;
}

}  // namespace ifsrecur
