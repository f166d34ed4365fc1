#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ifsrecur/json_io.hpp"

namespace ifsrecur {

/// Largest ambient dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Symbol = std::uint32_t;

inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 24;

/// Finite string over {0, ..., m-1}. The alphabet size is checked where the
/// word meets an IFS, not here.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

  /// Accepts "0,1,2", "0 1 2" or, for single-digit symbols, "012".
  static Word parse(std::string_view text);

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  auto begin() const noexcept { return symbols_.begin(); }
  auto end() const noexcept { return symbols_.end(); }
  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }

  Word reversed() const;
  Word operator+(const Word& tail) const;
  void push_back(Symbol s) { symbols_.push_back(s); }

  std::string to_string() const;

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> symbols_;
};

/// The infinite string preperiod · period · period · ...
struct SymbolicSequence {
  Word preperiod;
  Word period;

  SymbolicSequence(Word pre, Word per);

  static SymbolicSequence periodic(Word per) { return {Word{}, std::move(per)}; }
  /// Notation "pre(per)", e.g. "(0)" for 0^inf or "1(01)".
  static SymbolicSequence parse(std::string_view text);
  std::string to_string() const;

  /// Symbol at 0-based position k.
  Symbol at(std::size_t k) const;
};

struct AffineMap {
  Mat matrix;
  Vec translation;

  static AffineMap identity(int d);

  int dim() const { return static_cast<int>(translation.size()); }
  Vec operator()(const Vec& x) const { return matrix * x + translation; }

  /// (*this) ∘ inner.
  AffineMap after(const AffineMap& inner) const {
    return {matrix * inner.matrix, matrix * inner.translation + translation};
  }
  AffineMap inverse() const;
  double abs_det() const { return std::abs(matrix.determinant()); }
};

enum class ContractionMode {
  General,  ///< operator norm < 1
  Strict,   ///< operator norm < 1/2, needed by the transversality arguments
};

/// Finite family of invertible contracting affine maps on R^d.
class AffineIFS {
 public:
  explicit AffineIFS(std::vector<AffineMap> maps, ContractionMode mode = ContractionMode::General);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return maps_.size(); }
  const AffineMap& map(std::size_t i) const { return maps_.at(i); }
  const std::vector<AffineMap>& maps() const noexcept { return maps_; }

  /// Σ_i |det A_i|.
  double lambda_value() const noexcept { return lambda_; }
  /// max_i ‖A_i‖₂.
  double max_norm() const noexcept { return max_norm_; }
  bool is_strict() const noexcept { return max_norm_ < 0.5; }
  /// Throws InvalidIfs unless every generator has norm < 1/2.
  void require_strict(std::string_view operation) const;

  /// {"d": int, "maps": [{"A": [[row], ...], "t": [...]}, ...]}
  static AffineIFS from_json(const Json& j, ContractionMode mode = ContractionMode::General);
  Json to_json() const;

  /// Same matrices with the translation tuple replaced; T holds m·d values.
  AffineIFS with_translations(const std::vector<double>& translations) const;

  /// Bound on |x| over the attractor: max|t_i| / (1 - max‖A_i‖).
  double attractor_radius() const;

  void check_word(const Word& w) const;

 private:
  std::vector<AffineMap> maps_;
  int dim_ = 0;
  double lambda_ = 0.0;
  double max_norm_ = 0.0;
};

/// Largest singular value by power iteration on AᵀA.
double operator_norm(const Mat& a);

double lambda_value(const AffineIFS& ifs);

/// S_w = S_{w1} ∘ ... ∘ S_{wn}; the empty word gives the identity.
AffineMap compose_word(const AffineIFS& ifs, const Word& w);

/// T_w = T_{w1} ∘ ... ∘ T_{wn} with T_i = S_i⁻¹; equals compose_word(reverse(w))⁻¹.
AffineMap inverse_map(const AffineIFS& ifs, const Word& w);

/// Unique fixed point of S_w, i.e. the projection of w^∞.
Vec periodic_fixed_point(const AffineIFS& ifs, const Word& w);

/// Projection of an eventually periodic sequence: S_prefix(fixed point of S_period).
Vec project(const AffineIFS& ifs, const SymbolicSequence& s);

struct TruncatedPoint {
  Vec point;
  double error_bound;  ///< ‖A‖^depth · attractor radius
};

/// S_prefix(0) for an arbitrary finite prefix, with the distance to the
/// projection of any infinite continuation bounded by error_bound.
TruncatedPoint project_truncated(const AffineIFS& ifs, const Word& prefix);

/// (A_w⁻¹ - I)⁻¹ = Σ_{l≥1} A_w^l, by a direct linear solve.
Mat neumann_resolvent(const AffineIFS& ifs, const Word& w);
Mat neumann_resolvent(const Mat& a);

/// Truncated series Σ_{l=1}^{terms} A^l, used as an independent check.
Mat neumann_series(const Mat& a, int terms);

/// 1-based index of the first differing symbol. Words must differ and have equal length.
std::size_t common_prefix_length(const Word& a, const Word& b);

/// Lexicographic enumeration of I^n for an alphabet of size m.
class WordSpace {
 public:
  WordSpace(std::uint32_t m, std::uint32_t n, std::uint64_t budget = kDefaultWordBudget);

  std::uint64_t size() const noexcept { return size_; }
  std::uint32_t alphabet() const noexcept { return m_; }
  std::uint32_t length() const noexcept { return n_; }

  /// The index-th word in lexicographic order.
  Word at(std::uint64_t index) const;

  /// Calls fn on words with lexicographic index in [begin, end).
  void for_each(std::uint64_t begin, std::uint64_t end,
                const std::function<void(const Word&)>& fn) const;
  void for_each(const std::function<void(const Word&)>& fn) const { for_each(0, size_, fn); }

  std::vector<Word> collect() const;

 private:
  std::uint32_t m_;
  std::uint32_t n_;
  std::uint64_t size_;
};

/// m^n, or an error naming the budget when it exceeds it.
std::uint64_t checked_word_count(std::uint32_t m, std::uint32_t n, std::uint64_t budget);

/// Depth-first visit of every (w, S_w), w ∈ I^n, in lexicographic order.
/// Prefix compositions are shared, so the cost is O(m^n) map products.
void for_each_composed(const AffineIFS& ifs, std::uint32_t n, std::uint64_t budget,
                       const std::function<void(const Word&, const AffineMap&)>& fn);

enum class ShmerkinVerdict { AllEqual2D, SimultaneouslyDiagonalizable, Unknown };
std::string_view to_string(ShmerkinVerdict v);

/// Checks the two cheap sufficient conditions for differentiation regularity.
/// Unknown means "not certified", not "irregular".
ShmerkinVerdict shmerkin_sufficient(const AffineIFS& ifs);

}  // namespace ifsrecur
