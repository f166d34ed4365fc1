#include "ifsrecur/bodies.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ifsrecur/errors.hpp"

namespace ifsrecur {

LinearImageBall LinearImageBall::make(const Mat& matrix, double radius) {
  require(std::abs(matrix.determinant()) > 1e-300, ErrorKind::Unsupported,
          "linear image of a ball needs an invertible matrix");
  return {matrix, matrix.inverse(), radius};
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_diagonal(const Mat& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

int shape_dim(const Shape& shape, int fallback) {
  return std::visit(Overloaded{
                        [&](const Ball&) { return fallback; },
                        [](const Box& b) { return static_cast<int>(b.halfwidths.size()); },
                        [](const LinearImageBall& e) { return static_cast<int>(e.matrix.rows()); },
                    },
                    shape);
}

double shape_volume(const Shape& shape, int d) {
  return std::visit(Overloaded{
                        [&](const Ball& b) { return std::pow(b.radius, d) * unit_ball_volume(d); },
                        [&](const Box& b) { return std::ldexp(b.halfwidths.prod(), d); },
                        [&](const LinearImageBall& e) {
                          return std::abs(e.matrix.determinant()) * std::pow(e.radius, d) * unit_ball_volume(d);
                        },
                    },
                    shape);
}

Vec shape_halfwidths(const Shape& shape, int d) {
  return std::visit(Overloaded{
                        [&](const Ball& b) -> Vec { return Vec::Constant(d, b.radius); },
                        [](const Box& b) -> Vec { return b.halfwidths; },
                        [](const LinearImageBall& e) -> Vec {
                          Vec h(e.matrix.rows());
                          for (Eigen::Index i = 0; i < e.matrix.rows(); ++i) h(i) = e.radius * e.matrix.row(i).norm();
                          return h;
                        },
                    },
                    shape);
}

bool shape_contains(const Shape& shape, const Vec& y, double tol) {
  const double grow = 1.0 + tol;
  return std::visit(Overloaded{
                        [&](const Ball& b) { return y.norm() <= b.radius * grow; },
                        [&](const Box& b) {
                          for (Eigen::Index i = 0; i < y.size(); ++i) {
                            if (std::abs(y(i)) > b.halfwidths(i) * grow) return false;
                          }
                          return true;
                        },
                        [&](const LinearImageBall& e) { return (e.inverse * y).norm() <= e.radius * grow; },
                    },
                    shape);
}

Shape scale_shape(const Shape& shape, double factor) {
  return std::visit(Overloaded{
                        [&](const Ball& b) -> Shape { return Ball{b.radius * factor}; },
                        [&](const Box& b) -> Shape { return Box{b.halfwidths * factor}; },
                        [&](const LinearImageBall& e) -> Shape {
                          return LinearImageBall{e.matrix, e.inverse, e.radius * factor};
                        },
                    },
                    shape);
}

Shape map_shape(const Mat& a, const Shape& shape) {
  return std::visit(Overloaded{
                        [&](const Ball& b) -> Shape { return LinearImageBall::make(a, b.radius); },
                        [&](const Box& b) -> Shape {
                          require(is_diagonal(a), ErrorKind::Unsupported,
                                  "a box maps to a box only under a diagonal matrix");
                          return Box{a.diagonal().cwiseAbs().cwiseProduct(b.halfwidths)};
                        },
                        [&](const LinearImageBall& e) -> Shape {
                          return LinearImageBall::make(a * e.matrix, e.radius);
                        },
                    },
                    shape);
}

std::string shape_name(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Ball&) { return std::string("ball"); },
                        [](const Box&) { return std::string("box"); },
                        [](const LinearImageBall&) { return std::string("linear_image_ball"); },
                    },
                    shape);
}

void validate_shape(const Shape& shape, int d) {
  require(shape_dim(shape, d) == d, ErrorKind::Domain, "shape dimension does not match");
  std::visit(Overloaded{
                 [](const Ball& b) {
                   require(std::isfinite(b.radius) && b.radius >= 0.0, ErrorKind::Domain, "ball radius must be >= 0");
                 },
                 [](const Box& b) {
                   require(b.halfwidths.allFinite() && (b.halfwidths.array() >= 0.0).all(), ErrorKind::Domain,
                           "box halfwidths must be >= 0");
                 },
                 [](const LinearImageBall& e) {
                   require(std::isfinite(e.radius) && e.radius >= 0.0, ErrorKind::Domain,
                           "ellipse radius must be >= 0");
                   require(std::abs(e.matrix.determinant()) > 1e-300, ErrorKind::Unsupported,
                           "ellipse matrix must be invertible");
                 },
             },
             shape);
}

// ---------------------------------------------------------------------------

std::string_view to_string(HMembership m) {
  switch (m) {
    case HMembership::InH: return "InH";
    case HMembership::NotInH: return "NotInH";
    case HMembership::Unknown: return "Unknown";
  }
  return "Unknown";
}

HFamily HFamily::power_law(double c, double alpha) {
  require(std::isfinite(c) && c >= 0.0 && std::isfinite(alpha), ErrorKind::Domain,
          "power law needs c >= 0 and finite alpha");
  HFamily h;
  h.kind = Kind::PowerLaw;
  h.c = c;
  h.alpha = alpha;
  return h;
}

HFamily HFamily::constant(double c) {
  require(std::isfinite(c) && c >= 0.0, ErrorKind::Domain, "constant h needs C >= 0");
  HFamily h;
  h.kind = Kind::Constant;
  h.c = c;
  return h;
}

HFamily HFamily::custom(std::vector<double> table) {
  require(!table.empty(), ErrorKind::Domain, "tabulated h needs at least one value");
  for (double v : table) require(std::isfinite(v) && v >= 0.0, ErrorKind::Domain, "tabulated h values must be >= 0");
  HFamily h;
  h.kind = Kind::Custom;
  h.table = std::move(table);
  return h;
}

namespace {

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(item.find_first_not_of(" \t", used) == std::string::npos, ErrorKind::Config,
              "bad number \"" + item + "\"");
    } catch (const std::logic_error&) {
      fail(ErrorKind::Config, "bad number \"" + item + "\"");
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

HFamily HFamily::parse(std::string_view text) {
  const auto colon = text.find(':');
  require(colon != std::string_view::npos, ErrorKind::Config,
          "h family \"" + std::string(text) + "\" must look like power:c,alpha, const:C or table:v1,v2,...");
  const auto kind = text.substr(0, colon);
  const auto values = parse_numbers(text.substr(colon + 1));
  if (kind == "power") {
    require(values.size() == 2, ErrorKind::Config, "power:c,alpha takes two numbers");
    return power_law(values[0], values[1]);
  }
  if (kind == "const") {
    require(values.size() == 1, ErrorKind::Config, "const:C takes one number");
    return constant(values[0]);
  }
  if (kind == "table") return custom(values);
  fail(ErrorKind::Config, "unknown h family kind \"" + std::string(kind) + "\"");
}

std::string HFamily::to_string() const {
  switch (kind) {
    case Kind::PowerLaw: return "power:" + format_double(c) + "," + format_double(alpha);
    case Kind::Constant: return "const:" + format_double(c);
    case Kind::Custom: {
      std::string out = "table:";
      for (std::size_t i = 0; i < table.size(); ++i) out += (i ? "," : "") + format_double(table[i]);
      return out;
    }
  }
  return {};
}

double HFamily::operator()(int n) const {
  require(n >= 1, ErrorKind::Domain, "h is defined for n >= 1");
  switch (kind) {
    case Kind::PowerLaw: return c * std::pow(static_cast<double>(n), -alpha);
    case Kind::Constant: return c;
    case Kind::Custom:
      require(static_cast<std::size_t>(n) <= table.size(), ErrorKind::Domain,
              "tabulated h has no value at n = " + std::to_string(n));
      return table[static_cast<std::size_t>(n) - 1];
  }
  return 0.0;
}

std::optional<bool> HFamily::summable() const {
  switch (kind) {
    case Kind::PowerLaw: return c == 0.0 || alpha > 1.0;
    case Kind::Constant: return c == 0.0;
    case Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> HFamily::sup() const {
  switch (kind) {
    case Kind::PowerLaw:
      if (c == 0.0) return 0.0;
      if (alpha < 0.0) return std::nullopt;
      return c;
    case Kind::Constant: return c;
    case Kind::Custom: return *std::max_element(table.begin(), table.end());
  }
  return std::nullopt;
}

HMembership HFamily::membership() const {
  if (kind == Kind::PowerLaw && c > 0.0 && alpha == 1.0) return HMembership::InH;
  if (summable().value_or(false)) return HMembership::NotInH;
  return HMembership::Unknown;
}

// ---------------------------------------------------------------------------

std::string_view to_string(TargetMode m) {
  switch (m) {
    case TargetMode::ShrinkingBall: return "shrinking_ball";
    case TargetMode::ShrinkingGeneral: return "shrinking_general";
    case TargetMode::Recurrence: return "recurrence";
    case TargetMode::RecurrenceGeneral: return "recurrence_general";
  }
  return "shrinking_ball";
}

TargetSpec TargetSpec::shrinking_ball(HFamily h, SymbolicSequence center) {
  TargetSpec t;
  t.mode = TargetMode::ShrinkingBall;
  t.h = std::move(h);
  t.center = std::move(center);
  return t;
}

TargetSpec TargetSpec::recurrence_ball(HFamily h) {
  TargetSpec t;
  t.mode = TargetMode::Recurrence;
  t.h = std::move(h);
  return t;
}

double TargetSpec::ball_radius(const AffineIFS& ifs, int n) const {
  const double lam = ifs.lambda_value();
  return std::pow(h(n) / std::pow(lam, n), 1.0 / ifs.dim());
}

Shape TargetSpec::target_shape(const AffineIFS& ifs, int n) const {
  if (is_ball()) return Ball{ball_radius(ifs, n)};
  require(static_cast<bool>(body), ErrorKind::Config, "general target mode needs a body generator");
  Shape s = body(n);
  validate_shape(s, ifs.dim());
  return s;
}

Vec TargetSpec::target_center(const AffineIFS& ifs, int n) const {
  if (center_at) {
    Vec x = center_at(n);
    require(x.size() == ifs.dim(), ErrorKind::Domain, "target center has the wrong dimension");
    return x;
  }
  require(center.has_value(), ErrorKind::Config, "shrinking target needs a center");
  return project(ifs, *center);
}

}  // namespace ifsrecur
