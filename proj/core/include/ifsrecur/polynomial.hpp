#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ifsrecur/json_io.hpp"

namespace ifsrecur {

using BigInt = boost::multiprecision::cpp_int;

/// Integer polynomial, coefficients stored leading first.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> coefficients);
  IntPolynomial(std::initializer_list<long long> coefficients);

  /// "x^6+x^5-x-2", "2*x^3 - x + 1", or a JSON list "[1,1,0,0,0,-1,-2]".
  static IntPolynomial parse(std::string_view text);
  static IntPolynomial from_json(const Json& j);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<BigInt>& coefficients() const noexcept { return coeffs_; }
  const BigInt& leading() const { return coeffs_.front(); }
  const BigInt& constant_term() const { return coeffs_.back(); }
  bool is_monic() const { return !coeffs_.empty() && coeffs_.front() == 1; }

  std::complex<long double> evaluate(std::complex<long double> z) const;
  IntPolynomial derivative() const;

  IntPolynomial operator*(const IntPolynomial& other) const;
  friend bool operator==(const IntPolynomial&, const IntPolynomial&) = default;

  /// Exact quotient when `divisor` (monic) divides *this, otherwise nullopt.
  std::optional<IntPolynomial> divide_exact(const IntPolynomial& divisor) const;

  std::string to_string() const;
  Json to_json() const;

 private:
  void trim();
  std::vector<BigInt> coeffs_;
};

/// Roots of a polynomial with nonzero leading coefficient: balanced companion
/// matrix eigenvalues, then Newton steps on the exact coefficients.
std::vector<std::complex<double>> polynomial_roots(const IntPolynomial& p);

/// Monic product Π (x - r) over the given roots, in extended precision.
std::vector<std::complex<long double>> monic_from_roots(const std::vector<std::complex<double>>& roots);

/// JSON number when it fits in int64, decimal string otherwise.
Json bigint_to_json(const BigInt& v);

}  // namespace ifsrecur
