#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "ifsrecur/bodies.hpp"
#include "ifsrecur/errors.hpp"
#include "ifsrecur/pixel_mask.hpp"

using namespace ifsrecur;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}
Window window1(double lo, double hi) { return {v1(lo), v1(hi)}; }

}  // namespace

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}

TEST_CASE("shape membership and images") {
  const Shape ball = Ball{1.0};
  CHECK(shape_contains(ball, v2(0.6, 0.8)));
  CHECK_FALSE(shape_contains(ball, v2(0.6, 0.81)));
  Mat a(2, 2);
  a << 2.0, 0.0, 0.0, 0.5;
  const Shape e = map_shape(a, ball);
  CHECK(shape_contains(e, v2(2.0, 0.0)));
  CHECK(shape_contains(e, v2(0.0, 0.5)));
  CHECK_FALSE(shape_contains(e, v2(0.0, 0.6)));
  CHECK(shape_volume(e, 2) == doctest::Approx(M_PI));
  CHECK(shape_halfwidths(e, 2)(0) == doctest::Approx(2.0));
  const Shape box = map_shape(a, Box{v2(1.0, 1.0)});
  CHECK(std::holds_alternative<Box>(box));
  Mat rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  CHECK_THROWS_AS(map_shape(rot, Box{v2(1.0, 1.0)}), Error);
  CHECK(shape_volume(scale_shape(Box{v2(1.0, 2.0)}, 0.5), 2) == doctest::Approx(2.0));
}

TEST_CASE("h families") {
  const HFamily p = HFamily::parse("power:2,1");
  CHECK(p(4) == doctest::Approx(0.5));
  CHECK(p.membership() == HMembership::InH);
  CHECK(*p.summable() == false);
  const HFamily q = HFamily::parse("power:1,2");
  CHECK(*q.summable() == true);
  CHECK(q.membership() == HMembership::NotInH);
  const HFamily c = HFamily::parse("const:3");
  CHECK(c(100) == 3.0);
  CHECK(c.membership() == HMembership::Unknown);
  const HFamily t = HFamily::parse("table:1,0.5,0.25");
  CHECK(t(2) == 0.5);
  CHECK_FALSE(t.summable().has_value());
  CHECK_THROWS_AS(t(4), Error);
  CHECK_THROWS_AS(HFamily::parse("power:1"), Error);
  CHECK_THROWS_AS(HFamily::parse("bogus:1"), Error);
  CHECK(HFamily::parse(p.to_string())(3) == p(3));
}

TEST_CASE("interval covering half the window") {
  const PixelMask m = rasterize({{v1(0.25), Ball{0.25}}}, window1(0.0, 1.0), {1024});
  CHECK(std::abs(m.measure() - 0.5) <= 2.0 / 1024.0);
  CHECK(m.boundary_error() <= 2.0 / 1024.0 + 1e-15);
}

TEST_CASE("empty body list") {
  const PixelMask m = rasterize({}, window1(0.0, 1.0), {64});
  CHECK(m.measure() == 0.0);
  CHECK(m.occupied_count() == 0);
}

TEST_CASE("disjoint intervals add") {
  const Window w = window1(0.0, 1.0);
  const PlacedBody a{v1(0.2), Ball{0.1}};
  const PlacedBody b{v1(0.7), Ball{0.15}};
  const double sum = rasterize({a}, w, {4096}).measure() + rasterize({b}, w, {4096}).measure();
  CHECK(rasterize({a, b}, w, {4096}).measure() == doctest::Approx(sum).epsilon(1e-15));
}

TEST_CASE("full, empty and checkerboard masks") {
  Window w{v2(0.0, 0.0), v2(2.0, 1.0)};
  PixelMask m(w, {8, 8});
  CHECK(m.measure() == 0.0);
  for (std::uint64_t i = 0; i < m.cell_count(); ++i) m.set(i, true);
  CHECK(m.measure() == doctest::Approx(2.0));
  for (std::uint32_t y = 0; y < 8; ++y)
    for (std::uint32_t x = 0; x < 8; ++x) m.set(y * 8ULL + x, (x + y) % 2 == 0);
  CHECK(m.measure() == doctest::Approx(1.0));
}

TEST_CASE("raster agrees with exact membership at cell centers") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat a(2, 2);
  a << 0.3, 0.1, -0.2, 0.25;
  std::vector<PlacedBody> bodies;
  for (int k = 0; k < 12; ++k) {
    bodies.push_back({v2(u(rng), u(rng)), k % 3 == 0   ? Shape(Ball{0.1 * u(rng)})
                                          : k % 3 == 1 ? Shape(Box{v2(0.1 * u(rng), 0.05)})
                                                       : map_shape(a, Ball{0.5 * u(rng)})});
  }
  const Window w{v2(-0.1, -0.1), v2(1.1, 1.1)};
  const PixelMask m = rasterize(bodies, w, {97, 131});
  std::uint64_t disagreements = 0;
  for (std::uint32_t iy = 0; iy < 131; ++iy) {
    for (std::uint32_t ix = 0; ix < 97; ++ix) {
      const Vec c = m.cell_center(ix, iy);
      const bool inside = std::any_of(bodies.begin(), bodies.end(), [&](const PlacedBody& b) { return b.contains(c); });
      if (inside != m.at(iy * 97ULL + ix)) ++disagreements;
    }
  }
  CHECK(disagreements == 0);
  // The raster measure is within the boundary error of the analytic one for a single body.
  const PixelMask one = rasterize({bodies[0]}, w, {2048, 2048});
  CHECK(std::abs(one.measure() - bodies[0].volume()) <= one.boundary_error());
}

TEST_CASE("three dimensions are not rasterized") {
  Vec c = Vec::Zero(3);
  Window w{Vec::Zero(3), Vec::Ones(3)};
  CHECK_THROWS_AS(rasterize({{c, Ball{0.1}}}, w, {4, 4, 4}), Error);
}

TEST_CASE("cell budget is enforced") {
  Window w{v2(0, 0), v2(1, 1)};
  try {
    rasterize({}, w, {4096, 4096}, 1000);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
  }
}

TEST_CASE("PGM and run-length output") {
  const auto dir = std::filesystem::temp_directory_path() / "ifsrecur_pixel_test";
  std::filesystem::create_directories(dir);
  Window w{v2(0, 0), v2(1, 1)};
  const PixelMask m = rasterize({{v2(0.25, 0.75), Box{v2(0.25, 0.25)}}}, w, {4, 4});
  write_pgm(m, dir / "m.pgm");
  std::ifstream in(dir / "m.pgm", std::ios::binary);
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  in.get();
  std::vector<unsigned char> px(16);
  in.read(reinterpret_cast<char*>(px.data()), 16);
  CHECK(magic == "P5");
  CHECK(width == 4);
  CHECK(maxval == 255);
  // Top-left quadrant of the image is the high-y, low-x corner.
  CHECK(px[0] == 255);
  CHECK(px[1] == 255);
  CHECK(px[4 * 3] == 0);

  const PixelMask l = rasterize({{v1(0.25), Ball{0.125}}, {v1(0.8), Ball{0.1}}}, window1(0, 1), {8});
  write_run_length_csv(l, dir / "m.csv");
  std::ifstream csv(dir / "m.csv");
  std::string header, row1, row2;
  std::getline(csv, header);
  std::getline(csv, row1);
  std::getline(csv, row2);
  CHECK(header == "start_cell,length,start_x,end_x");
  CHECK(row1.rfind("1,2,", 0) == 0);
  CHECK(row2.rfind("6,1,", 0) == 0);
  std::filesystem::remove_all(dir);
}
