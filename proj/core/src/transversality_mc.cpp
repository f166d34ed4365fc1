#include "ifsrecur/transversality_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ifsrecur/bodies.hpp"
#include "ifsrecur/errors.hpp"
#include "ifsrecur/measure_lab.hpp"
#include "ifsrecur/parallel.hpp"
#include "ifsrecur/rng.hpp"

namespace ifsrecur {

std::vector<ParameterSample> sample_translations(int m, int d, double R, std::size_t count, std::uint64_t seed) {
  require(m >= 1 && d >= 1 && d <= kMaxDim, ErrorKind::Domain, "sample_translations needs m >= 1, 1 <= d <= 4");
  require(count >= 1, ErrorKind::Domain, "sample count must be >= 1");
  require(std::isfinite(R) && R >= 0.0, ErrorKind::Domain, "R must be >= 0");
  const std::size_t width = static_cast<std::size_t>(m) * static_cast<std::size_t>(d);
  std::vector<ParameterSample> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].seed = seed;
    out[i].index = i;
    out[i].T.resize(width);
    for (std::size_t k = 0; k < width; ++k) out[i].T[k] = R == 0.0 ? 0.0 : uniform_symmetric(seed, i, k, R);
  }
  return out;
}

Vec common_positive_diagonal(const std::vector<Mat>& matrices) {
  require(!matrices.empty(), ErrorKind::Domain, "need at least one matrix");
  const Mat& a = matrices.front();
  for (const auto& b : matrices) {
    require(b.rows() == a.rows() && b.cols() == a.cols() && (b - a).cwiseAbs().maxCoeff() <= 1e-12,
            ErrorKind::Unsupported, "pair statistics need all matrices equal");
  }
  Mat off = a;
  off.diagonal().setZero();
  require(off.cwiseAbs().maxCoeff() <= 1e-12 && (a.diagonal().array() > 0.0).all(), ErrorKind::Unsupported,
          "pair statistics need a positive diagonal matrix");
  return a.diagonal();
}

AffineIFS ifs_at(const std::vector<Mat>& matrices, const std::vector<double>& T, ContractionMode mode) {
  require(!matrices.empty(), ErrorKind::Domain, "need at least one matrix");
  const int d = static_cast<int>(matrices.front().rows());
  require(T.size() == matrices.size() * static_cast<std::size_t>(d), ErrorKind::Domain,
          "translation tuple must have m*d entries");
  std::vector<AffineMap> maps;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    Vec t(d);
    for (int k = 0; k < d; ++k) t(k) = T[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
    maps.push_back({matrices[i], t});
  }
  return AffineIFS(std::move(maps), mode);
}

std::vector<Vec> orbit_centers(const AffineIFS& ifs, const SymbolicSequence& tail, int n, std::uint64_t budget) {
  const Vec x = project(ifs, tail);
  std::vector<Vec> out;
  out.reserve(checked_word_count(static_cast<std::uint32_t>(ifs.size()), static_cast<std::uint32_t>(n), budget));
  for_each_composed(ifs, static_cast<std::uint32_t>(n), budget,
                    [&](const Word&, const AffineMap& f) { out.push_back(f(x)); });
  return out;
}

Vec ellipse_semi_axes(const Vec& diagonal, int m, int n, double s) {
  const int d = static_cast<int>(diagonal.size());
  const double lambda = m * diagonal.prod();
  const double radius = s / std::pow(lambda, static_cast<double>(n) / d);
  Vec out(d);
  for (int i = 0; i < d; ++i) out(i) = std::pow(diagonal(i), n) * radius;
  return out;
}

std::uint64_t count_pairs_in_ellipse(const std::vector<Vec>& points, const Vec& semi_axes) {
  if (points.size() < 2) return 0;
  const Eigen::Index d = semi_axes.size();
  const double grow = 1.0 + 1e-12;
  const double reach = semi_axes(0) * grow;
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a](0) < points[b](0); });
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Vec& p = points[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Vec& q = points[order[j]];
      if (q(0) - p(0) > reach) break;
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double z = (q(k) - p(k)) / semi_axes(k);
        r2 += z * z;
      }
      if (r2 <= grow * grow) ++count;
    }
  }
  return count;
}

namespace {

void check_budget(int n, std::size_t samples, const McBudget& budget) {
  require(n >= 1, ErrorKind::Domain, "level must be >= 1");
  require(n <= budget.max_n, ErrorKind::Budget,
          "level " + std::to_string(n) + " exceeds the Monte Carlo depth budget of " + std::to_string(budget.max_n));
  require(samples <= budget.max_samples, ErrorKind::Budget,
          std::to_string(samples) + " samples exceed the budget of " + std::to_string(budget.max_samples));
}

}  // namespace

std::uint64_t pair_overlap_statistic(const std::vector<Mat>& matrices, const ParameterSample& sample,
                                     const SymbolicSequence& tail, int n, double s, const McBudget& budget) {
  check_budget(n, 1, budget);
  require(s > 0.0, ErrorKind::Domain, "s must be positive");
  const Vec diag = common_positive_diagonal(matrices);
  const AffineIFS ifs = ifs_at(matrices, sample.T);
  const auto centers = orbit_centers(ifs, tail, n, budget.word_budget);
  // Translates of E_n meet iff the center difference lies in 2E_n.
  return count_pairs_in_ellipse(centers, 2.0 * ellipse_semi_axes(diag, static_cast<int>(matrices.size()), n, s));
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::Domain, "fit needs equal-length data");
  LinearFit f;
  f.points = x.size();
  if (x.size() < 2) {
    f.slope = std::numeric_limits<double>::quiet_NaN();
    f.intercept = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

ScalingReport mc_scaling(const std::vector<Mat>& matrices, const SymbolicSequence& tail, int n, double R,
                         const std::vector<double>& s_grid, std::size_t samples, std::uint64_t seed,
                         const McBudget& budget) {
  check_budget(n, samples, budget);
  require(samples >= 1, ErrorKind::Domain, "need at least one sample");
  require(!s_grid.empty(), ErrorKind::Domain, "scale grid is empty");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    require(s_grid[i] > 0.0 && (i == 0 || s_grid[i] > s_grid[i - 1]), ErrorKind::Domain,
            "scale grid must be positive and strictly increasing");
  }
  const Vec diag = common_positive_diagonal(matrices);
  const int m = static_cast<int>(matrices.size());
  const int d = static_cast<int>(diag.size());
  const auto params = sample_translations(m, d, R, samples, seed);

  ScalingReport r;
  r.grid = s_grid;
  r.n = n;
  r.m = m;
  r.d = d;
  r.R = R;
  r.seed = seed;
  r.samples = samples;
  r.per_sample.assign(s_grid.size(), std::vector<std::uint64_t>(samples, 0));

  std::vector<Vec> axes;
  for (double s : s_grid) axes.push_back(2.0 * ellipse_semi_axes(diag, m, n, s));

  parallel_chunks(samples, 1, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const AffineIFS ifs = ifs_at(matrices, params[i].T);
      const auto centers = orbit_centers(ifs, tail, n, budget.word_budget);
      for (std::size_t g = 0; g < s_grid.size(); ++g) r.per_sample[g][i] = count_pairs_in_ellipse(centers, axes[g]);
    }
  });

  const double words = std::pow(static_cast<double>(m), n);
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t g = 0; g < s_grid.size(); ++g) {
    double sum = 0.0;
    for (auto v : r.per_sample[g]) sum += static_cast<double>(v);
    const double mean = sum / static_cast<double>(samples);
    double ss = 0.0;
    for (auto v : r.per_sample[g]) ss += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    const double se = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
    r.means.push_back(mean);
    r.stderrs.push_back(se);
    r.mean_per_word.push_back(mean / words);
    r.empirical_constant.push_back(mean / (words * std::pow(s_grid[g], d)));
    r.fitted.push_back(mean > 0.0);
    if (mean > 0.0) {
      lx.push_back(std::log(s_grid[g]));
      ly.push_back(std::log(mean));
    }
  }
  const LinearFit fit = least_squares(lx, ly);
  r.fit_ok = fit.points >= 2;
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  return r;
}

Json ScalingReport::to_json() const {
  Json out;
  out["grid"] = grid;
  out["means"] = means;
  out["stderrs"] = stderrs;
  out["slope"] = fit_ok ? Json(slope) : Json(nullptr);
  out["intercept"] = fit_ok ? Json(intercept) : Json(nullptr);
  out["n"] = n;
  out["m"] = m;
  out["d"] = d;
  out["R"] = R;
  out["seed"] = seed;
  out["samples"] = samples;
  out["fitted"] = fitted;
  out["mean_per_word"] = mean_per_word;
  out["empirical_constant"] = empirical_constant;
  return out;
}

std::string ScalingReport::to_csv() const {
  std::string out = "s,sample_index,statistic\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < per_sample[g].size(); ++i) {
      out += format_double(grid[g]) + "," + std::to_string(i) + "," + std::to_string(per_sample[g][i]) + "\n";
    }
  }
  return out;
}

namespace {

// Radius of the ball with volume λ(A)^{-n}.
double unit_volume_radius(const AffineIFS& ifs, int n) {
  const int d = ifs.dim();
  return std::pow(std::pow(ifs.lambda_value(), -n) / unit_ball_volume(d), 1.0 / d);
}

UnionSample measure_bodies(const std::vector<PlacedBody>& bodies, int d, std::uint32_t resolution,
                           const McBudget& budget) {
  const Window w = bounding_window(bodies, 1e-3);
  const PixelMask mask =
      rasterize(bodies, w, std::vector<std::uint32_t>(static_cast<std::size_t>(d), resolution), budget.cell_budget);
  UnionSample u;
  u.measure = mask.measure();
  u.boundary_error = mask.boundary_error();
  u.bodies = bodies.size();
  return u;
}

}  // namespace

UnionSample union_measure_statistic(const AffineIFS& ifs, const SymbolicSequence& tail, int n, double s,
                                    std::uint32_t resolution, const McBudget& budget) {
  check_budget(n, 1, budget);
  require(s > 0.0, ErrorKind::Domain, "s must be positive");
  TargetSpec spec;
  spec.mode = TargetMode::ShrinkingGeneral;
  const double radius = s * unit_volume_radius(ifs, n);
  spec.body = [radius](int) { return Shape{Ball{radius}}; };
  spec.center = tail;
  const auto bodies = stage_target_bodies(ifs, spec, n, budget.word_budget);
  UnionSample u = measure_bodies(bodies, ifs.dim(), resolution, budget);
  u.bound = std::pow(s, ifs.dim());
  if (u.measure > u.bound + u.boundary_error + 1e-12 * u.bound) {
    fail(ErrorKind::Consistency, "union measure " + format_double(u.measure) + " exceeds s^d = " +
                                     format_double(u.bound) + " plus boundary error " +
                                     format_double(u.boundary_error));
  }
  return u;
}

UnionSample recurrence_union_statistic(const AffineIFS& ifs, int n, double s, std::uint32_t resolution,
                                       const McBudget& budget) {
  check_budget(n, 1, budget);
  require(s > 0.0, ErrorKind::Domain, "s must be positive");
  ifs.require_strict("recurrence_union_statistic");
  TargetSpec spec;
  spec.mode = TargetMode::RecurrenceGeneral;
  const double radius = s * unit_volume_radius(ifs, n);
  spec.body = [radius](int) { return Shape{Ball{radius}}; };
  const auto bodies = stage_recurrence_bodies(ifs, spec, n, budget.word_budget);
  UnionSample u = measure_bodies(bodies, ifs.dim(), resolution, budget);
  // Σ_w |det M_w| vol(s E_n) = s^d Σ_w |det M_w| / λ^n
  u.bound = analytic_volume_sum(bodies);
  if (u.measure > u.bound + u.boundary_error + 1e-12 * u.bound) {
    fail(ErrorKind::Consistency, "recurrence union measure " + format_double(u.measure) + " exceeds its bound " +
                                     format_double(u.bound) + " plus boundary error " +
                                     format_double(u.boundary_error));
  }
  return u;
}

}  // namespace ifsrecur
