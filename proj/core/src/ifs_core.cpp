#include "ifsrecur/ifs_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifsrecur/errors.hpp"

namespace ifsrecur {

// ---------------------------------------------------------------------------
// Word / SymbolicSequence

Word Word::parse(std::string_view text) {
  std::vector<Symbol> out;
  const bool separated = text.find_first_of(", \t") != std::string_view::npos;
  if (!separated) {
    for (char c : text) {
      require(std::isdigit(static_cast<unsigned char>(c)) != 0, ErrorKind::Config,
              "bad symbol '" + std::string(1, c) + "' in word \"" + std::string(text) + "\"");
      out.push_back(static_cast<Symbol>(c - '0'));
    }
    return Word(std::move(out));
  }
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(token, &used);
      require(used == token.size(), ErrorKind::Config, "bad symbol \"" + token + "\"");
      out.push_back(static_cast<Symbol>(v));
    } catch (const std::logic_error&) {
      fail(ErrorKind::Config, "bad symbol \"" + token + "\"");
    }
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return Word(std::move(out));
}

Word Word::reversed() const {
  return Word(std::vector<Symbol>(symbols_.rbegin(), symbols_.rend()));
}

Word Word::operator+(const Word& tail) const {
  std::vector<Symbol> out = symbols_;
  out.insert(out.end(), tail.begin(), tail.end());
  return Word(std::move(out));
}

std::string Word::to_string() const {
  const bool wide = std::any_of(begin(), end(), [](Symbol s) { return s > 9; });
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (wide && i > 0) out.push_back(',');
    out += std::to_string(symbols_[i]);
  }
  return out;
}

SymbolicSequence::SymbolicSequence(Word pre, Word per)
    : preperiod(std::move(pre)), period(std::move(per)) {
  require(!period.empty(), ErrorKind::Domain, "symbolic sequence needs a nonempty period");
}

SymbolicSequence SymbolicSequence::parse(std::string_view text) {
  const auto open = text.find('(');
  require(open != std::string_view::npos && !text.empty() && text.back() == ')',
          ErrorKind::Config,
          "sequence \"" + std::string(text) + "\" must look like pre(period), e.g. \"(0)\"");
  return {Word::parse(text.substr(0, open)),
          Word::parse(text.substr(open + 1, text.size() - open - 2))};
}

std::string SymbolicSequence::to_string() const {
  return preperiod.to_string() + "(" + period.to_string() + ")";
}

Symbol SymbolicSequence::at(std::size_t k) const {
  if (k < preperiod.size()) return preperiod[k];
  return period[(k - preperiod.size()) % period.size()];
}

// ---------------------------------------------------------------------------
// AffineMap / AffineIFS

AffineMap AffineMap::identity(int d) {
  return {Mat::Identity(d, d), Vec::Zero(d)};
}

AffineMap AffineMap::inverse() const {
  const double det = matrix.determinant();
  require(std::abs(det) > 1e-300, ErrorKind::Numeric, "cannot invert a singular affine map");
  const Mat inv = matrix.inverse();
  return {inv, -(inv * translation)};
}

double operator_norm(const Mat& a) {
  const int d = static_cast<int>(a.cols());
  if (d == 0) return 0.0;
  const Mat gram = a.transpose() * a;
  Vec v(d);
  // Fixed non-symmetric start so no eigenvector of a diagonal or rotation
  // matrix is orthogonal to it.
  for (int i = 0; i < d; ++i) v(i) = 1.0 / (1.0 + 0.6180339887 * i);
  v.normalize();
  double estimate = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    Vec w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - estimate) <= 1e-10 * std::max(1.0, std::abs(next))) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  // Rayleigh quotient on the converged vector.
  estimate = std::max(estimate, v.dot(gram * v));
  return std::sqrt(std::max(0.0, estimate));
}

AffineIFS::AffineIFS(std::vector<AffineMap> maps, ContractionMode mode) : maps_(std::move(maps)) {
  require(!maps_.empty(), ErrorKind::InvalidIfs, "an IFS needs at least one map");
  dim_ = maps_.front().dim();
  require(dim_ >= 1 && dim_ <= kMaxDim, ErrorKind::InvalidIfs,
          "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  double lambda = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    const AffineMap& f = maps_[i];
    const std::string tag = "map " + std::to_string(i);
    require(f.dim() == dim_ && f.matrix.rows() == dim_ && f.matrix.cols() == dim_,
            ErrorKind::InvalidIfs, tag + ": dimension mismatch");
    require(f.matrix.allFinite() && f.translation.allFinite(), ErrorKind::InvalidIfs,
            tag + ": non-finite coefficient");
    const double det = std::abs(f.matrix.determinant());
    require(det > 1e-14, ErrorKind::InvalidIfs, tag + ": singular matrix");
    const double norm = operator_norm(f.matrix);
    require(norm < 1.0, ErrorKind::InvalidIfs, tag + ": operator norm " + format_double(norm) + " >= 1");
    if (mode == ContractionMode::Strict) {
      require(norm < 0.5, ErrorKind::InvalidIfs,
              tag + ": operator norm " + format_double(norm) + " >= 1/2 (strict mode)");
    }
    max_norm_ = std::max(max_norm_, norm);
    lambda += det;
  }
  lambda_ = lambda;
}

void AffineIFS::require_strict(std::string_view operation) const {
  require(is_strict(), ErrorKind::InvalidIfs,
          std::string(operation) + " needs every generator to have operator norm < 1/2, got " +
              format_double(max_norm_));
}

void AffineIFS::check_word(const Word& w) const {
  for (Symbol s : w) {
    require(s < maps_.size(), ErrorKind::Index,
            "symbol " + std::to_string(s) + " outside alphabet of size " + std::to_string(maps_.size()));
  }
}

AffineIFS AffineIFS::from_json(const Json& j, ContractionMode mode) {
  try {
    require(j.is_object(), ErrorKind::Config, "IFS description must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      require(it.key() == "d" || it.key() == "maps", ErrorKind::Config,
              "unknown IFS key \"" + it.key() + "\"");
    }
    const int d = j.at("d").get<int>();
    require(d >= 1 && d <= kMaxDim, ErrorKind::Config, "IFS dimension out of range");
    std::vector<AffineMap> maps;
    for (const auto& jm : j.at("maps")) {
      const auto& rows = jm.at("A");
      const auto& t = jm.at("t");
      require(rows.size() == static_cast<std::size_t>(d) && t.size() == static_cast<std::size_t>(d),
              ErrorKind::Config, "map shape does not match d");
      AffineMap f{Mat(d, d), Vec(d)};
      for (int r = 0; r < d; ++r) {
        require(rows[r].size() == static_cast<std::size_t>(d), ErrorKind::Config, "matrix row length != d");
        for (int c = 0; c < d; ++c) f.matrix(r, c) = rows[r][c].get<double>();
        f.translation(r) = t[r].get<double>();
      }
      maps.push_back(std::move(f));
    }
    return AffineIFS(std::move(maps), mode);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed IFS JSON: ") + e.what());
  }
}

Json AffineIFS::to_json() const {
  Json maps = Json::array();
  for (const auto& f : maps_) {
    Json rows = Json::array();
    for (int r = 0; r < dim_; ++r) {
      Json row = Json::array();
      for (int c = 0; c < dim_; ++c) row.push_back(f.matrix(r, c));
      rows.push_back(row);
    }
    Json t = Json::array();
    for (int r = 0; r < dim_; ++r) t.push_back(f.translation(r));
    maps.push_back({{"A", rows}, {"t", t}});
  }
  return {{"d", dim_}, {"maps", maps}};
}

AffineIFS AffineIFS::with_translations(const std::vector<double>& translations) const {
  require(translations.size() == maps_.size() * static_cast<std::size_t>(dim_), ErrorKind::Domain,
          "translation tuple must have m*d entries");
  std::vector<AffineMap> maps = maps_;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (int k = 0; k < dim_; ++k) maps[i].translation(k) = translations[i * dim_ + k];
  }
  AffineIFS out = *this;
  out.maps_ = std::move(maps);
  return out;
}

double AffineIFS::attractor_radius() const {
  double t = 0.0;
  for (const auto& f : maps_) t = std::max(t, f.translation.norm());
  return t / (1.0 - max_norm_);
}

// ---------------------------------------------------------------------------
// Operations

double lambda_value(const AffineIFS& ifs) { return ifs.lambda_value(); }

AffineMap compose_word(const AffineIFS& ifs, const Word& w) {
  ifs.check_word(w);
  if (w.empty()) return AffineMap::identity(ifs.dim());
  AffineMap out = ifs.map(w[0]);
  for (std::size_t k = 1; k < w.size(); ++k) out = out.after(ifs.map(w[k]));
  return out;
}

AffineMap inverse_map(const AffineIFS& ifs, const Word& w) {
  ifs.check_word(w);
  if (w.empty()) return AffineMap::identity(ifs.dim());
  AffineMap out = ifs.map(w[0]).inverse();
  for (std::size_t k = 1; k < w.size(); ++k) out = out.after(ifs.map(w[k]).inverse());
  return out;
}

Vec periodic_fixed_point(const AffineIFS& ifs, const Word& w) {
  require(!w.empty(), ErrorKind::Domain, "a periodic point needs a nonempty period");
  const AffineMap f = compose_word(ifs, w);
  const int d = ifs.dim();
  const Mat system = Mat::Identity(d, d) - f.matrix;
  require(std::abs(system.determinant()) > 1e-14, ErrorKind::Numeric,
          "I - A_w is numerically singular for w = " + w.to_string());
  return system.colPivHouseholderQr().solve(f.translation);
}

Vec project(const AffineIFS& ifs, const SymbolicSequence& s) {
  const Vec p = periodic_fixed_point(ifs, s.period);
  if (s.preperiod.empty()) return p;
  return compose_word(ifs, s.preperiod)(p);
}

TruncatedPoint project_truncated(const AffineIFS& ifs, const Word& prefix) {
  if (prefix.empty()) return {Vec::Zero(ifs.dim()), ifs.attractor_radius()};
  const AffineMap f = compose_word(ifs, prefix);
  const double bound = std::pow(ifs.max_norm(), static_cast<double>(prefix.size())) *
                       ifs.attractor_radius();
  return {f.translation, bound};
}

Mat neumann_resolvent(const Mat& a) {
  const int d = static_cast<int>(a.rows());
  const Mat system = Mat::Identity(d, d) - a;
  require(std::abs(system.determinant()) > 1e-14, ErrorKind::Numeric, "I - A is numerically singular");
  // (A⁻¹ - I)⁻¹ = (I - A)⁻¹ A
  return system.colPivHouseholderQr().solve(a);
}

Mat neumann_resolvent(const AffineIFS& ifs, const Word& w) {
  return neumann_resolvent(compose_word(ifs, w).matrix);
}

Mat neumann_series(const Mat& a, int terms) {
  const int d = static_cast<int>(a.rows());
  Mat power = Mat::Identity(d, d);
  Mat sum = Mat::Zero(d, d);
  for (int l = 1; l <= terms; ++l) {
    power = power * a;
    sum += power;
  }
  return sum;
}

std::size_t common_prefix_length(const Word& a, const Word& b) {
  require(a.size() == b.size(), ErrorKind::Domain, "common_prefix_length needs equal-length words");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return k + 1;
  }
  fail(ErrorKind::Domain, "common_prefix_length is undefined for equal words");
}

std::uint64_t checked_word_count(std::uint32_t m, std::uint32_t n, std::uint64_t budget) {
  require(m >= 1 && n >= 1, ErrorKind::Domain, "word enumeration needs m >= 1 and n >= 1");
  std::uint64_t count = 1;
  for (std::uint32_t k = 0; k < n; ++k) {
    if (count > budget / m) {
      fail(ErrorKind::Budget, std::to_string(m) + "^" + std::to_string(n) +
                                  " words exceed the word budget of " + std::to_string(budget));
    }
    count *= m;
  }
  require(count <= budget, ErrorKind::Budget,
          std::to_string(count) + " words exceed the word budget of " + std::to_string(budget));
  return count;
}

WordSpace::WordSpace(std::uint32_t m, std::uint32_t n, std::uint64_t budget)
    : m_(m), n_(n), size_(checked_word_count(m, n, budget)) {}

Word WordSpace::at(std::uint64_t index) const {
  require(index < size_, ErrorKind::Index, "word index out of range");
  std::vector<Symbol> digits(n_);
  for (std::uint32_t k = n_; k-- > 0;) {
    digits[k] = static_cast<Symbol>(index % m_);
    index /= m_;
  }
  return Word(std::move(digits));
}

void WordSpace::for_each(std::uint64_t begin, std::uint64_t end,
                         const std::function<void(const Word&)>& fn) const {
  end = std::min(end, size_);
  if (begin >= end) return;
  std::vector<Symbol> digits = at(begin).symbols();
  for (std::uint64_t idx = begin; idx < end; ++idx) {
    fn(Word(digits));
    for (std::uint32_t k = n_; k-- > 0;) {
      if (++digits[k] < m_) break;
      digits[k] = 0;
    }
  }
}

std::vector<Word> WordSpace::collect() const {
  std::vector<Word> out;
  out.reserve(size_);
  for_each([&](const Word& w) { out.push_back(w); });
  return out;
}

void for_each_composed(const AffineIFS& ifs, std::uint32_t n, std::uint64_t budget,
                       const std::function<void(const Word&, const AffineMap&)>& fn) {
  checked_word_count(static_cast<std::uint32_t>(ifs.size()), n, budget);
  std::vector<AffineMap> stack(n + 1);
  stack[0] = AffineMap::identity(ifs.dim());
  std::vector<Symbol> digits(n, 0);
  const auto m = static_cast<Symbol>(ifs.size());
  for (std::uint32_t k = 0; k < n; ++k) stack[k + 1] = stack[k].after(ifs.map(0));
  while (true) {
    fn(Word(digits), stack[n]);
    std::uint32_t k = n;
    while (k > 0) {
      --k;
      if (++digits[k] < m) break;
      digits[k] = 0;
      if (k == 0) return;
    }
    for (std::uint32_t j = k; j < n; ++j) stack[j + 1] = stack[j].after(ifs.map(digits[j]));
  }
}

std::string_view to_string(ShmerkinVerdict v) {
  switch (v) {
    case ShmerkinVerdict::AllEqual2D: return "AllEqual2D";
    case ShmerkinVerdict::SimultaneouslyDiagonalizable: return "SimultaneouslyDiagonalizable";
    case ShmerkinVerdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

ShmerkinVerdict shmerkin_sufficient(const AffineIFS& ifs) {
  constexpr double tol = 1e-12;
  const Mat& first = ifs.map(0).matrix;
  if (ifs.dim() == 2) {
    const bool all_equal = std::all_of(ifs.maps().begin(), ifs.maps().end(), [&](const AffineMap& f) {
      return (f.matrix - first).cwiseAbs().maxCoeff() <= tol;
    });
    if (all_equal) return ShmerkinVerdict::AllEqual2D;
  }
  const bool all_diagonal = std::all_of(ifs.maps().begin(), ifs.maps().end(), [&](const AffineMap& f) {
    Mat off = f.matrix;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() <= tol;
  });
  return all_diagonal ? ShmerkinVerdict::SimultaneouslyDiagonalizable : ShmerkinVerdict::Unknown;
}

}  // namespace ifsrecur
