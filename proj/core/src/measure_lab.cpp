#include "ifsrecur/measure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/parallel.hpp"

namespace ifsrecur {

std::vector<PlacedBody> stage_target_bodies(const AffineIFS& ifs, const TargetSpec& spec, int n,
                                            std::uint64_t budget) {
  require(!spec.is_recurrence(), ErrorKind::Domain, "stage_target_bodies needs a shrinking-target spec");
  require(n >= 1, ErrorKind::Domain, "level must be >= 1");
  const PlacedBody base{spec.target_center(ifs, n), spec.target_shape(ifs, n)};
  std::vector<PlacedBody> bodies;
  bodies.reserve(checked_word_count(static_cast<std::uint32_t>(ifs.size()), static_cast<std::uint32_t>(n), budget));
  for_each_composed(ifs, static_cast<std::uint32_t>(n), budget,
                    [&](const Word&, const AffineMap& f) { bodies.push_back(base.transformed(f)); });
  return bodies;
}

std::vector<PlacedBody> stage_recurrence_bodies(const AffineIFS& ifs, const TargetSpec& spec, int n,
                                                std::uint64_t budget) {
  require(spec.is_recurrence(), ErrorKind::Domain, "stage_recurrence_bodies needs a recurrence spec");
  require(n >= 1, ErrorKind::Domain, "level must be >= 1");
  const Shape e = spec.target_shape(ifs, n);
  const int d = ifs.dim();
  const std::uint64_t m = ifs.size();
  std::vector<PlacedBody> bodies(
      checked_word_count(static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n), budget));
  // Visiting u with S_u in hand produces the body of w = reverse(u), whose
  // lexicographic index reads u's digits least significant first.
  for_each_composed(ifs, static_cast<std::uint32_t>(n), budget, [&](const Word& u, const AffineMap& f) {
    std::uint64_t index = 0;
    for (std::size_t k = u.size(); k-- > 0;) index = index * m + u[k];
    const Mat system = Mat::Identity(d, d) - f.matrix;
    const auto qr = system.colPivHouseholderQr();
    require(qr.isInvertible(), ErrorKind::Numeric, "I - A_w is numerically singular");
    const Vec center = qr.solve(f.translation);
    const Mat resolvent = qr.solve(f.matrix);
    bodies[index] = PlacedBody{center, map_shape(resolvent, e)};
  });
  return bodies;
}

std::vector<PlacedBody> stage_bodies(const AffineIFS& ifs, const TargetSpec& spec, int n, std::uint64_t budget) {
  return spec.is_recurrence() ? stage_recurrence_bodies(ifs, spec, n, budget)
                              : stage_target_bodies(ifs, spec, n, budget);
}

double measure_union(const PixelMask& mask) { return mask.measure(); }

double analytic_volume_sum(const std::vector<PlacedBody>& bodies) {
  double v = 0.0;
  for (const auto& b : bodies) v += b.volume();
  return v;
}

double interval_union_measure(const std::vector<PlacedBody>& bodies, std::optional<std::pair<double, double>> clip) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(bodies.size());
  for (const auto& b : bodies) {
    require(b.dim() == 1, ErrorKind::Domain, "interval_union_measure needs 1D bodies");
    const double h = b.halfwidths()(0);
    double a = b.center(0) - h;
    double z = b.center(0) + h;
    if (clip) {
      a = std::max(a, clip->first);
      z = std::min(z, clip->second);
    }
    if (z > a) iv.emplace_back(a, z);
  }
  std::sort(iv.begin(), iv.end());
  double total = 0.0;
  double cur_a = 0.0;
  double cur_z = 0.0;
  bool open = false;
  for (const auto& [a, z] : iv) {
    if (open && a <= cur_z) {
      cur_z = std::max(cur_z, z);
      continue;
    }
    if (open) total += cur_z - cur_a;
    cur_a = a;
    cur_z = z;
    open = true;
  }
  if (open) total += cur_z - cur_a;
  return total;
}

// ---------------------------------------------------------------------------
// Intersection tables and bounds

Eigen::MatrixXd IntersectionTable::measures() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j);
  }
  return out;
}

IntersectionTable pairwise_intersection_table(const std::vector<PixelMask>& masks) {
  require(!masks.empty(), ErrorKind::Domain, "intersection table needs at least one mask");
  for (const auto& m : masks) {
    require(m.same_grid(masks.front()), ErrorKind::Domain, "masks do not share window and resolution");
  }
  IntersectionTable t;
  t.size = masks.size();
  t.cell_volume = masks.front().cell_volume();
  t.counts.assign(t.size * t.size, 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < t.size; ++i) {
    for (std::size_t j = i; j < t.size; ++j) pairs.emplace_back(i, j);
  }
  parallel_chunks(pairs.size(), 1, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto [i, j] = pairs[p];
      const std::uint64_t c = i == j ? masks[i].occupied_count() : intersection_count(masks[i], masks[j]);
      t.counts[i * t.size + j] = c;
      t.counts[j * t.size + i] = c;
    }
  });
  return t;
}

PixelMask union_mask(const std::vector<PixelMask>& masks) {
  require(!masks.empty(), ErrorKind::Domain, "union of an empty mask list");
  PixelMask out = masks.front();
  for (std::size_t i = 1; i < masks.size(); ++i) out |= masks[i];
  return out;
}

namespace {

void check_table(const Eigen::MatrixXd& t) {
  require(t.rows() == t.cols() && t.rows() > 0, ErrorKind::Domain, "intersection table must be square and nonempty");
  require(t.allFinite() && (t.array() >= 0.0).all(), ErrorKind::Domain, "intersection table must be nonnegative");
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  require((t - t.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::Domain,
          "intersection table must be symmetric");
}

}  // namespace

double kochen_stone_bound(const Eigen::MatrixXd& table) {
  check_table(table);
  const double diag = table.diagonal().sum();
  require(diag > 0.0, ErrorKind::Domain, "Kochen-Stone bound is undefined when every set is null");
  return diag * diag / table.sum();
}

double kochen_stone_bound(const IntersectionTable& table) {
  std::uint64_t diag = 0;
  std::uint64_t all = 0;
  for (std::size_t i = 0; i < table.size; ++i) {
    diag += table.count(i, i);
    for (std::size_t j = 0; j < table.size; ++j) all += table.count(i, j);
  }
  require(diag > 0, ErrorKind::Domain, "Kochen-Stone bound is undefined when every set is null");
  const double d = static_cast<double>(diag);
  return d * d / static_cast<double>(all) * table.cell_volume;
}

double bonferroni_bound(const Eigen::MatrixXd& table) {
  check_table(table);
  double value = table.diagonal().sum();
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < table.cols(); ++j) value -= table(i, j);
  }
  return value;
}

double bonferroni_bound(const IntersectionTable& table) {
  __int128 v = 0;
  for (std::size_t i = 0; i < table.size; ++i) {
    v += table.count(i, i);
    for (std::size_t j = i + 1; j < table.size; ++j) v -= table.count(i, j);
  }
  return static_cast<double>(v) * table.cell_volume;
}

bool kochen_stone_holds_exactly(const IntersectionTable& table, std::uint64_t union_cells) {
  unsigned __int128 diag = 0;
  unsigned __int128 all = 0;
  for (std::size_t i = 0; i < table.size; ++i) {
    diag += table.count(i, i);
    for (std::size_t j = 0; j < table.size; ++j) all += table.count(i, j);
  }
  return diag * diag <= static_cast<unsigned __int128>(union_cells) * all;
}

bool bonferroni_holds_exactly(const IntersectionTable& table, std::uint64_t union_cells) {
  __int128 v = 0;
  for (std::size_t i = 0; i < table.size; ++i) {
    v += table.count(i, i);
    for (std::size_t j = i + 1; j < table.size; ++j) v -= table.count(i, j);
  }
  return v <= static_cast<__int128>(union_cells);
}

// ---------------------------------------------------------------------------
// Exact overlaps

double exact_overlap_gamma(const AffineIFS& ifs, const Word& w) {
  require(!w.empty(), ErrorKind::Domain, "exact_overlap_gamma needs a nonempty word");
  ifs.check_word(w);
  double ratio = 1.0;
  for (Symbol s : w) ratio *= ifs.map(s).abs_det() / ifs.lambda_value();
  return 1.0 - ratio;
}

namespace {

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = std::vector<std::vector<Rational>>;

struct RationalMap {
  RationalMatrix a;
  std::vector<Rational> t;
};

RationalMap rational_compose(const AffineIFS& ifs, const Word& w) {
  const int d = ifs.dim();
  RationalMap out;
  out.a.assign(static_cast<std::size_t>(d), std::vector<Rational>(static_cast<std::size_t>(d), Rational(0)));
  out.t.assign(static_cast<std::size_t>(d), Rational(0));
  for (int i = 0; i < d; ++i) out.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  // out = out ∘ S_s, applied left to right.
  for (Symbol s : w) {
    const AffineMap& f = ifs.map(s);
    RationalMap next = out;
    for (int r = 0; r < d; ++r) {
      Rational shift = out.t[static_cast<std::size_t>(r)];
      for (int c = 0; c < d; ++c) {
        Rational acc = 0;
        for (int k = 0; k < d; ++k) acc += out.a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] * Rational(f.matrix(k, c));
        next.a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = acc;
        shift += out.a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * Rational(f.translation(c));
      }
      next.t[static_cast<std::size_t>(r)] = shift;
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<OverlapPair> detect_exact_overlaps(const AffineIFS& ifs, int max_len, std::uint64_t budget) {
  require(max_len >= 1, ErrorKind::Domain, "max_len must be >= 1");
  const int d = ifs.dim();
  const std::size_t width = static_cast<std::size_t>(d * d + d);
  std::uint64_t total = 0;
  for (int k = 1; k <= max_len; ++k)
    total += checked_word_count(static_cast<std::uint32_t>(ifs.size()), static_cast<std::uint32_t>(k), budget - total);
  std::vector<OverlapPair> out;
  for (int k = 1; k <= max_len; ++k) {
    const std::uint64_t count =
        checked_word_count(static_cast<std::uint32_t>(ifs.size()), static_cast<std::uint32_t>(k), budget);
    std::vector<Word> words;
    std::vector<double> coeffs;
    words.reserve(count);
    coeffs.reserve(count * width);
    for_each_composed(ifs, static_cast<std::uint32_t>(k), budget, [&](const Word& w, const AffineMap& f) {
      words.push_back(w);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) coeffs.push_back(f.matrix(r, c));
      }
      for (int r = 0; r < d; ++r) coeffs.push_back(f.translation(r));
    });
    // Sweep along the coefficient with the widest spread.
    std::size_t key = 0;
    double best_spread = -1.0;
    for (std::size_t c = 0; c < width; ++c) {
      double lo = coeffs[c];
      double hi = coeffs[c];
      for (std::size_t i = 0; i < count; ++i) {
        lo = std::min(lo, coeffs[i * width + c]);
        hi = std::max(hi, coeffs[i * width + c]);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        key = c;
      }
    }
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return coeffs[a * width + key] < coeffs[b * width + key]; });
    std::vector<std::pair<std::size_t, std::size_t>> hits;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t a = order[i];
      for (std::size_t j = i + 1; j < count; ++j) {
        const std::size_t b = order[j];
        if (coeffs[b * width + key] - coeffs[a * width + key] > kOverlapTolerance) break;
        bool same = true;
        for (std::size_t c = 0; c < width && same; ++c) {
          same = std::abs(coeffs[a * width + c] - coeffs[b * width + c]) <= kOverlapTolerance;
        }
        if (same) hits.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(hits.begin(), hits.end());
    for (const auto& [a, b] : hits) {
      OverlapPair p{words[a], words[b], false};
      const RationalMap x = rational_compose(ifs, p.u);
      const RationalMap y = rational_compose(ifs, p.v);
      p.exact = x.a == y.a && x.t == y.t;
      out.push_back(std::move(p));
    }
  }
  return out;
}

double product_ifs_criterion(const std::vector<int>& factor_sizes, const std::vector<double>& factor_ratios) {
  require(factor_sizes.size() == factor_ratios.size() && factor_sizes.size() >= 2, ErrorKind::Domain,
          "product criterion needs equal-length lists with at least two factors");
  const double d = static_cast<double>(factor_sizes.size());
  double min_term = std::numeric_limits<double>::infinity();
  double log_sum = 0.0;
  for (std::size_t l = 0; l < factor_sizes.size(); ++l) {
    require(factor_sizes[l] >= 1, ErrorKind::Domain, "factor alphabet sizes must be >= 1");
    require(factor_ratios[l] > 0.0 && factor_ratios[l] < 1.0, ErrorKind::Domain,
            "factor contraction ratios must lie in (0,1)");
    const double term = factor_sizes[l] * factor_ratios[l];
    min_term = std::min(min_term, term);
    log_sum += std::log(term);
  }
  return min_term / std::exp(log_sum / d);
}

// ---------------------------------------------------------------------------

std::string_view to_string(SeriesHint h) {
  switch (h) {
    case SeriesHint::ConvergesAnalytically: return "ConvergesAnalytically";
    case SeriesHint::DivergesAnalytically: return "DivergesAnalytically";
    case SeriesHint::Numeric: return "Numeric";
  }
  return "Numeric";
}

BorelCantelliReport borel_cantelli_report(const AffineIFS& ifs, const TargetSpec& spec, int N,
                                          std::optional<OverlapWitness> overlap) {
  require(N >= 1 && N <= 1'000'000, ErrorKind::Budget, "Borel-Cantelli depth must lie in [1, 10^6]");
  const int d = ifs.dim();
  const double lam = ifs.lambda_value();
  const double rho = ifs.max_norm();
  BorelCantelliReport r;
  double sum = 0.0;
  for (int n = 1; n <= N; ++n) {
    double level = 0.0;
    if (spec.is_ball()) {
      // Σ_w |det A_w| · vol(B(0, r_n)) = λ^n · h(n)/λ^n · vol(B1)
      level = spec.h(n) * unit_ball_volume(d);
    } else {
      level = std::pow(lam, n) * shape_volume(spec.target_shape(ifs, n), d);
    }
    if (spec.is_recurrence()) {
      // |det (A_w⁻¹ - I)⁻¹| = |det A_w| / |det(I - A_w)| <= |det A_w| / (1 - ρ^n)^d
      level /= std::pow(1.0 - std::pow(rho, n), d);
    }
    sum += level;
    r.level_bounds.push_back(level);
    r.partial_sums.push_back(sum);
  }
  if (spec.is_ball() && spec.h.analytic()) {
    r.hint = spec.h.summable().value() ? SeriesHint::ConvergesAnalytically : SeriesHint::DivergesAnalytically;
  }
  if (overlap) {
    require(overlap->k >= 1 && overlap->gamma > 0.0 && overlap->gamma < 1.0, ErrorKind::Domain,
            "overlap witness needs k >= 1 and gamma in (0,1)");
    r.overlap = overlap;
    double osum = 0.0;
    for (int n = 1; n <= N; ++n) {
      const double v = std::pow(overlap->gamma, n / overlap->k) * r.level_bounds[static_cast<std::size_t>(n) - 1];
      osum += v;
      r.overlap_level_bounds.push_back(v);
      r.overlap_partial_sums.push_back(osum);
    }
    r.overlap_series_bound = overlap->k / (1.0 - overlap->gamma);
    if (spec.is_ball() && spec.h.sup().has_value()) r.overlap_hint = SeriesHint::ConvergesAnalytically;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Coverage

namespace {

Window body_window(const PlacedBody& ball) {
  const Vec h = ball.halfwidths();
  return {ball.center - h, ball.center + h};
}

std::vector<PlacedBody> within(const std::vector<PlacedBody>& bodies, const Window& w) {
  std::vector<PlacedBody> out;
  for (const auto& b : bodies) {
    const Vec h = b.halfwidths();
    if (((b.center + h).array() >= w.lo.array()).all() && ((b.center - h).array() <= w.hi.array()).all()) {
      out.push_back(b);
    }
  }
  return out;
}

}  // namespace

double restricted_coverage(const AffineIFS& ifs, const TargetSpec& spec, int n, const PlacedBody& ball,
                           std::uint32_t resolution) {
  const Window w = body_window(ball);
  const std::vector<std::uint32_t> res(static_cast<std::size_t>(ifs.dim()), resolution);
  const PixelMask ball_mask = rasterize({ball}, w, res);
  const PixelMask cover = rasterize(within(stage_bodies(ifs, spec, n), w), w, res);
  const std::uint64_t inside = ball_mask.occupied_count();
  require(inside > 0, ErrorKind::Domain, "the ball covers no cell at this resolution");
  return static_cast<double>(intersection_count(ball_mask, cover)) / static_cast<double>(inside);
}

std::vector<CoverageStage> cumulative_coverage(const AffineIFS& ifs, const TargetSpec& spec,
                                               const std::vector<int>& levels, const PlacedBody& ball,
                                               std::uint32_t resolution, int first_level) {
  require(first_level >= 1, ErrorKind::Domain, "first level must be >= 1");
  require(!levels.empty() && std::is_sorted(levels.begin(), levels.end()) && levels.front() >= first_level,
          ErrorKind::Domain, "levels must be ascending and >= the first level");
  const Window w = body_window(ball);
  const std::vector<std::uint32_t> res(static_cast<std::size_t>(ifs.dim()), resolution);
  const PixelMask ball_mask = rasterize({ball}, w, res);
  const std::uint64_t inside = ball_mask.occupied_count();
  require(inside > 0, ErrorKind::Domain, "the ball covers no cell at this resolution");

  PixelMask cover(w, res);
  std::vector<PlacedBody> kept;
  std::vector<CoverageStage> out;
  std::size_t next = 0;
  for (int n = first_level; n <= levels.back(); ++n) {
    const auto bodies = within(stage_bodies(ifs, spec, n), w);
    cover |= rasterize(bodies, w, res);
    if (ifs.dim() == 1) kept.insert(kept.end(), bodies.begin(), bodies.end());
    while (next < levels.size() && levels[next] == n) {
      CoverageStage s;
      s.n = n;
      s.raster_fraction = static_cast<double>(intersection_count(ball_mask, cover)) / static_cast<double>(inside);
      if (ifs.dim() == 1) {
        s.exact_fraction = interval_union_measure(kept, std::make_pair(w.lo(0), w.hi(0))) / (w.hi(0) - w.lo(0));
      }
      out.push_back(s);
      ++next;
    }
  }
  return out;
}

double upper_density_estimate(const std::vector<bool>& indicator) {
  const std::size_t N = indicator.size();
  require(N >= 1, ErrorKind::Domain, "upper density needs a nonempty sequence");
  std::size_t count = 0;
  double best = 0.0;
  const std::size_t start = (N + 1) / 2;
  for (std::size_t n = 1; n <= N; ++n) {
    count += indicator[n - 1] ? 1 : 0;
    if (n >= start) best = std::max(best, static_cast<double>(count) / static_cast<double>(n));
  }
  return best;
}

}  // namespace ifsrecur
