#include "ifsrecur/pixel_mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ifsrecur/errors.hpp"
#include "ifsrecur/parallel.hpp"

namespace ifsrecur {

bool Window::contains(const Window& other) const {
  return dim() == other.dim() && (other.lo.array() >= lo.array()).all() && (other.hi.array() <= hi.array()).all();
}

Window bounding_window(const std::vector<PlacedBody>& bodies, double pad) {
  require(!bodies.empty(), ErrorKind::Domain, "cannot bound an empty body list");
  const int d = bodies.front().dim();
  Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(d, -std::numeric_limits<double>::infinity());
  for (const auto& b : bodies) {
    const Vec h = b.halfwidths();
    lo = lo.cwiseMin(b.center - h);
    hi = hi.cwiseMax(b.center + h);
  }
  Vec extent = hi - lo;
  for (int i = 0; i < d; ++i) {
    if (extent(i) <= 0.0) extent(i) = std::max(1.0, std::abs(lo(i)));
  }
  return {lo - pad * extent, hi + pad * extent};
}

PixelMask::PixelMask(Window window, std::vector<std::uint32_t> resolution, std::uint64_t cell_budget)
    : window_(std::move(window)), resolution_(std::move(resolution)) {
  const int d = window_.dim();
  require(d == 1 || d == 2, ErrorKind::Unsupported,
          "rasterization supports d = 1 or 2; use analytic volume sums for d = " + std::to_string(d));
  require(window_.hi.size() == d && (window_.hi.array() > window_.lo.array()).all(), ErrorKind::Domain,
          "window must have lo < hi on every axis");
  require(resolution_.size() == static_cast<std::size_t>(d), ErrorKind::Domain,
          "resolution needs one entry per axis");
  std::uint64_t cells = 1;
  for (auto r : resolution_) {
    require(r >= 2 && r <= kMaxResolution, ErrorKind::Domain,
            "resolution per axis must lie in [2, 2^20], got " + std::to_string(r));
    cells *= r;
  }
  require(cells <= cell_budget, ErrorKind::Budget,
          std::to_string(cells) + " cells exceed the raster budget of " + std::to_string(cell_budget));
  bits_.assign(cells, 0);
}

double PixelMask::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= cell_size(a);
  return v;
}

Vec PixelMask::cell_center(std::uint32_t ix, std::uint32_t iy) const {
  Vec c(dim());
  c(0) = window_.lo(0) + (ix + 0.5) * cell_size(0);
  if (dim() == 2) c(1) = window_.lo(1) + (iy + 0.5) * cell_size(1);
  return c;
}

std::uint64_t PixelMask::occupied_count() const {
  return static_cast<std::uint64_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool PixelMask::same_grid(const PixelMask& other) const {
  return resolution_ == other.resolution_ && window_.lo == other.window_.lo && window_.hi == other.window_.hi;
}

PixelMask& PixelMask::operator|=(const PixelMask& other) {
  require(same_grid(other), ErrorKind::Domain, "masks do not share window and resolution");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  boundary_cells_ = 0;
  return *this;
}

PixelMask& PixelMask::operator&=(const PixelMask& other) {
  require(same_grid(other), ErrorKind::Domain, "masks do not share window and resolution");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  boundary_cells_ = 0;
  return *this;
}

PixelMask operator|(PixelMask a, const PixelMask& b) { return a |= b; }
PixelMask operator&(PixelMask a, const PixelMask& b) { return a &= b; }

std::uint64_t intersection_count(const PixelMask& a, const PixelMask& b) {
  require(a.same_grid(b), ErrorKind::Domain, "masks do not share window and resolution");
  const std::uint8_t* x = a.data();
  const std::uint8_t* y = b.data();
  std::uint64_t n = 0;
  for (std::uint64_t i = 0; i < a.cell_count(); ++i) n += x[i] & y[i];
  return n;
}

namespace {

constexpr std::uint8_t kOccupied = 1;
constexpr std::uint8_t kTouched = 2;
constexpr std::uint8_t kFull = 4;

// Inclusive cell-index range [first, last] clamped to [0, n-1]; empty when first > last.
struct Span {
  long long first;
  long long last;
};

// Saturating cast of a cell coordinate into [-1, n].
long long to_index(double v, long long n) {
  return static_cast<long long>(std::clamp(v, -1.0, static_cast<double>(n)));
}

Span clamp_span(double first, double last, long long n) {
  return {std::max<long long>(0, to_index(first, n)), std::min<long long>(n - 1, to_index(last, n))};
}

// Cells overlapping [a, b] along one axis.
Span touched_span(double a, double b, double lo, double cell, long long n) {
  return clamp_span(std::floor((a - lo) / cell - 1e-9), std::floor((b - lo) / cell + 1e-9), n);
}

void rasterize_1d(const std::vector<PlacedBody>& bodies, PixelMask& mask) {
  const long long n = mask.nx();
  const double lo = mask.window().lo(0);
  const double cell = mask.cell_size(0);
  std::vector<int> occ(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> touch(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> full(static_cast<std::size_t>(n) + 1, 0);
  const auto center_in = [&](const PlacedBody& b, long long i) {
    return b.contains(mask.cell_center(static_cast<std::uint32_t>(i)));
  };
  const auto edge_in = [&](const PlacedBody& b, long long i) {
    Vec x(1);
    x(0) = lo + static_cast<double>(i) * cell;
    return b.contains(x);
  };
  const auto mark = [](std::vector<int>& diff, long long first, long long last) {
    if (first > last) return;
    ++diff[static_cast<std::size_t>(first)];
    --diff[static_cast<std::size_t>(last) + 1];
  };
  for (const auto& b : bodies) {
    const double c = b.center(0);
    const double h = b.halfwidths()(0);
    const double a = c - h;
    const double z = c + h;
    if (z < lo || a > mask.window().hi(0)) continue;

    const Span t = touched_span(a, z, lo, cell, n);
    mark(touch, t.first, t.last);

    // Centers in [a, b], then snapped to the exact membership predicate.
    long long first = std::max<long long>(t.first, to_index(std::ceil((a - lo) / cell - 0.5), n));
    long long last = std::min<long long>(t.last, to_index(std::floor((z - lo) / cell - 0.5), n));
    while (first <= last && !center_in(b, first)) ++first;
    while (first - 1 >= t.first && center_in(b, first - 1)) --first;
    while (last >= first && !center_in(b, last)) --last;
    while (last + 1 <= t.last && last + 1 >= first && center_in(b, last + 1)) ++last;
    mark(occ, first, last);

    // Cells with both edges inside.
    long long ff = std::max<long long>(0, to_index(std::ceil((a - lo) / cell), n));
    long long fl = std::min<long long>(n - 1, to_index(std::floor((z - lo) / cell), n) - 1);
    while (ff <= fl && !(edge_in(b, ff) && edge_in(b, ff + 1))) ++ff;
    while (fl >= ff && !(edge_in(b, fl) && edge_in(b, fl + 1))) --fl;
    mark(full, ff, fl);
  }
  int o = 0;
  int t = 0;
  int f = 0;
  std::uint64_t boundary = 0;
  for (long long i = 0; i < n; ++i) {
    o += occ[static_cast<std::size_t>(i)];
    t += touch[static_cast<std::size_t>(i)];
    f += full[static_cast<std::size_t>(i)];
    mask.set(static_cast<std::uint64_t>(i), o > 0);
    if ((t > 0 || o > 0) && f == 0) ++boundary;
  }
  mask.set_boundary_cells(boundary);
}

void rasterize_2d(const std::vector<PlacedBody>& bodies, PixelMask& mask) {
  const long long nx = mask.nx();
  const long long ny = mask.ny();
  const Window& w = mask.window();
  const double cx = mask.cell_size(0);
  const double cy = mask.cell_size(1);

  struct Extent {
    Span x;
    Span y;
  };
  std::vector<Extent> extents;
  extents.reserve(bodies.size());
  for (const auto& b : bodies) {
    const Vec h = b.halfwidths();
    extents.push_back({touched_span(b.center(0) - h(0), b.center(0) + h(0), w.lo(0), cx, nx),
                       touched_span(b.center(1) - h(1), b.center(1) + h(1), w.lo(1), cy, ny)});
  }

  std::vector<std::uint8_t> flags(static_cast<std::size_t>(nx * ny), 0);
  const std::size_t grain = 16;
  parallel_chunks(static_cast<std::size_t>(ny), grain, [&](std::size_t, std::size_t row_begin, std::size_t row_end) {
    std::vector<char> below;
    std::vector<char> above;
    Vec p(2);
    for (std::size_t k = 0; k < bodies.size(); ++k) {
      const auto& b = bodies[k];
      const Extent& e = extents[k];
      if (e.x.first > e.x.last) continue;
      const long long y0 = std::max<long long>(e.y.first, static_cast<long long>(row_begin));
      const long long y1 = std::min<long long>(e.y.last, static_cast<long long>(row_end) - 1);
      if (y0 > y1) continue;
      const std::size_t cols = static_cast<std::size_t>(e.x.last - e.x.first + 1);
      const auto corner_row = [&](long long iy_edge, std::vector<char>& out) {
        out.assign(cols + 1, 0);
        p(1) = w.lo(1) + static_cast<double>(iy_edge) * cy;
        for (std::size_t j = 0; j <= cols; ++j) {
          p(0) = w.lo(0) + static_cast<double>(e.x.first + static_cast<long long>(j)) * cx;
          out[j] = b.contains(p) ? 1 : 0;
        }
      };
      corner_row(y0, below);
      for (long long iy = y0; iy <= y1; ++iy) {
        corner_row(iy + 1, above);
        std::uint8_t* row = flags.data() + iy * nx;
        for (std::size_t j = 0; j < cols; ++j) {
          const long long ix = e.x.first + static_cast<long long>(j);
          std::uint8_t f = kTouched;
          if (b.contains(mask.cell_center(static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)))) f |= kOccupied;
          if (below[j] && below[j + 1] && above[j] && above[j + 1]) f |= kFull;
          row[ix] |= f;
        }
        std::swap(below, above);
      }
    }
  });

  std::uint64_t boundary = 0;
  std::uint8_t* bits = mask.data();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    bits[i] = flags[i] & kOccupied;
    if ((flags[i] & (kTouched | kOccupied)) && !(flags[i] & kFull)) ++boundary;
  }
  mask.set_boundary_cells(boundary);
}

}  // namespace

PixelMask rasterize(const std::vector<PlacedBody>& bodies, const Window& window,
                    const std::vector<std::uint32_t>& resolution, std::uint64_t cell_budget) {
  PixelMask mask(window, resolution, cell_budget);
  for (const auto& b : bodies) {
    require(b.dim() == window.dim(), ErrorKind::Domain, "body and window dimensions differ");
  }
  if (window.dim() == 1) {
    rasterize_1d(bodies, mask);
  } else {
    rasterize_2d(bodies, mask);
  }
  return mask;
}

void write_pgm(const PixelMask& mask, const std::filesystem::path& path) {
  require(mask.dim() == 2, ErrorKind::Unsupported, "PGM export needs a 2D mask");
  std::string out = "P5\n" + std::to_string(mask.nx()) + " " + std::to_string(mask.ny()) + "\n255\n";
  out.reserve(out.size() + mask.cell_count());
  for (std::uint32_t r = mask.ny(); r-- > 0;) {
    for (std::uint32_t c = 0; c < mask.nx(); ++c) {
      out.push_back(mask.at(std::uint64_t{r} * mask.nx() + c) ? '\xff' : '\0');
    }
  }
  write_text_file(path, out);
}

void write_run_length_csv(const PixelMask& mask, const std::filesystem::path& path) {
  require(mask.dim() == 1, ErrorKind::Unsupported, "run-length CSV export needs a 1D mask");
  std::string out = "start_cell,length,start_x,end_x\n";
  const double lo = mask.window().lo(0);
  const double cell = mask.cell_size(0);
  std::uint64_t i = 0;
  while (i < mask.cell_count()) {
    if (!mask.at(i)) {
      ++i;
      continue;
    }
    std::uint64_t j = i;
    while (j < mask.cell_count() && mask.at(j)) ++j;
    out += std::to_string(i) + "," + std::to_string(j - i) + "," + format_double(lo + static_cast<double>(i) * cell) +
           "," + format_double(lo + static_cast<double>(j) * cell) + "\n";
    i = j;
  }
  write_text_file(path, out);
}

}  // namespace ifsrecur
