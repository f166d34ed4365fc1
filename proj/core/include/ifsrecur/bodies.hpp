#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ifsrecur/ifs_core.hpp"

namespace ifsrecur {

/// Euclidean ball of the given radius.
struct Ball {
  double radius;
};

/// Axis-aligned box Π [-h_i, h_i].
struct Box {
  Vec halfwidths;
};

/// M · B(0, r). The inverse is cached for membership tests.
struct LinearImageBall {
  Mat matrix;
  Mat inverse;
  double radius;

  static LinearImageBall make(const Mat& matrix, double radius);
};

using Shape = std::variant<Ball, Box, LinearImageBall>;

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

int shape_dim(const Shape& shape, int fallback);
double shape_volume(const Shape& shape, int d);
/// Per-axis half extent of the shape's bounding box.
Vec shape_halfwidths(const Shape& shape, int d);
/// Membership of a displacement y (relative to the center) in the closed
/// shape enlarged by the relative slack `tol`.
bool shape_contains(const Shape& shape, const Vec& y, double tol = 0.0);
/// The shape scaled by a positive factor.
Shape scale_shape(const Shape& shape, double factor);
/// Image of the shape under the linear map A. Boxes only map to boxes
/// under diagonal A.
Shape map_shape(const Mat& a, const Shape& shape);
std::string shape_name(const Shape& shape);

/// A convex body symmetric about its center.
struct PlacedBody {
  Vec center;
  Shape shape;

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Vec& x, double tol = 0.0) const { return shape_contains(shape, x - center, tol); }
  Vec halfwidths() const { return shape_halfwidths(shape, dim()); }
  double volume() const { return shape_volume(shape, dim()); }
  /// f(body), an affine image.
  PlacedBody transformed(const AffineMap& f) const { return {f(center), map_shape(f.matrix, shape)}; }
};

void validate_shape(const Shape& shape, int d);

// ---------------------------------------------------------------------------

enum class HMembership { InH, NotInH, Unknown };
std::string_view to_string(HMembership m);

/// h : N -> [0, ∞).
struct HFamily {
  enum class Kind { PowerLaw, Constant, Custom };

  Kind kind = Kind::Constant;
  double c = 1.0;       ///< PowerLaw coefficient or the constant
  double alpha = 0.0;   ///< PowerLaw exponent, h(n) = c n^{-alpha}
  std::vector<double> table;  ///< Custom values h(1), h(2), ...

  static HFamily power_law(double c, double alpha);
  static HFamily constant(double c);
  static HFamily custom(std::vector<double> table);
  /// "power:c,alpha", "const:C" or "table:v1,v2,...".
  static HFamily parse(std::string_view text);
  std::string to_string() const;

  double operator()(int n) const;
  bool analytic() const { return kind != Kind::Custom; }
  /// Σ h(n) < ∞, when decidable in closed form.
  std::optional<bool> summable() const;
  /// sup h, when finite and known.
  std::optional<double> sup() const;
  HMembership membership() const;
};

// ---------------------------------------------------------------------------

enum class TargetMode { ShrinkingBall, ShrinkingGeneral, Recurrence, RecurrenceGeneral };
std::string_view to_string(TargetMode m);

/// Level-n target geometry. Ball modes use E_n = B(0, (h(n)/λ(A)^n)^{1/d});
/// general modes take E_n from `body`. Shrinking modes also need centers
/// x_n, either one symbolic point or a per-level generator.
struct TargetSpec {
  TargetMode mode = TargetMode::ShrinkingBall;
  HFamily h;
  std::function<Shape(int n)> body;
  std::optional<SymbolicSequence> center;
  std::function<Vec(int n)> center_at;

  static TargetSpec shrinking_ball(HFamily h, SymbolicSequence center);
  static TargetSpec recurrence_ball(HFamily h);

  bool is_recurrence() const {
    return mode == TargetMode::Recurrence || mode == TargetMode::RecurrenceGeneral;
  }
  bool is_ball() const { return mode == TargetMode::ShrinkingBall || mode == TargetMode::Recurrence; }

  /// (h(n) / λ^n)^{1/d}.
  double ball_radius(const AffineIFS& ifs, int n) const;
  /// E_n centered at the origin.
  Shape target_shape(const AffineIFS& ifs, int n) const;
  /// x_n for shrinking modes.
  Vec target_center(const AffineIFS& ifs, int n) const;
};

}  // namespace ifsrecur
