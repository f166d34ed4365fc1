#include "ifsrecur/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ifsrecur/errors.hpp"

namespace ifsrecur {

IntPolynomial::IntPolynomial(std::vector<BigInt> coefficients) : coeffs_(std::move(coefficients)) {
  trim();
}

IntPolynomial::IntPolynomial(std::initializer_list<long long> coefficients) {
  for (long long c : coefficients) coeffs_.emplace_back(c);
  trim();
}

void IntPolynomial::trim() {
  auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [](const BigInt& c) { return c != 0; });
  coeffs_.erase(coeffs_.begin(), first);
  if (coeffs_.empty()) coeffs_.emplace_back(0);
}

IntPolynomial IntPolynomial::from_json(const Json& j) {
  require(j.is_array() && !j.empty(), ErrorKind::Config, "polynomial must be a nonempty coefficient list");
  std::vector<BigInt> c;
  for (const auto& v : j) {
    if (v.is_number_integer()) {
      c.emplace_back(v.get<long long>());
    } else if (v.is_string()) {
      try {
        c.emplace_back(v.get<std::string>());
      } catch (const std::exception&) {
        fail(ErrorKind::Config, "bad coefficient \"" + v.get<std::string>() + "\"");
      }
    } else {
      fail(ErrorKind::Config, "polynomial coefficients must be integers");
    }
  }
  return IntPolynomial(std::move(c));
}

namespace {

struct Term {
  BigInt coeff;
  int power;
};

// Terms like "-3*x^2", "+x", "7", "x^10".
std::vector<Term> parse_terms(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  require(!s.empty(), ErrorKind::Config, "empty polynomial");
  std::vector<Term> terms;
  std::size_t i = 0;
  const auto bad = [&] { fail(ErrorKind::Config, "cannot parse polynomial \"" + std::string(text) + "\""); };
  while (i < s.size()) {
    int sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    } else if (!terms.empty()) {
      bad();
    }
    std::string digits;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits.push_back(s[i++]);
    BigInt coeff = digits.empty() ? BigInt(1) : BigInt(digits);
    int power = 0;
    if (i < s.size() && s[i] == '*') {
      if (digits.empty()) bad();
      ++i;
    }
    if (i < s.size() && s[i] == 'x') {
      ++i;
      power = 1;
      if (i < s.size() && (s[i] == '^')) {
        ++i;
        std::string exp;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) exp.push_back(s[i++]);
        if (exp.empty() || exp.size() > 4) bad();
        power = std::stoi(exp);
      }
    } else if (digits.empty()) {
      bad();
    }
    terms.push_back({sign * coeff, power});
  }
  return terms;
}

}  // namespace

IntPolynomial IntPolynomial::parse(std::string_view text) {
  const auto start = text.find_first_not_of(" \t");
  if (start != std::string_view::npos && text[start] == '[') {
    try {
      return from_json(Json::parse(text));
    } catch (const Json::exception& e) {
      fail(ErrorKind::Config, std::string("bad coefficient list: ") + e.what());
    }
  }
  const auto terms = parse_terms(text);
  int top = 0;
  for (const auto& t : terms) top = std::max(top, t.power);
  std::vector<BigInt> c(static_cast<std::size_t>(top) + 1, BigInt(0));
  for (const auto& t : terms) c[static_cast<std::size_t>(top - t.power)] += t.coeff;
  return IntPolynomial(std::move(c));
}

std::complex<long double> IntPolynomial::evaluate(std::complex<long double> z) const {
  std::complex<long double> acc = 0;
  for (const auto& c : coeffs_) acc = acc * z + c.convert_to<long double>();
  return acc;
}

IntPolynomial IntPolynomial::derivative() const {
  const int k = degree();
  if (k == 0) return IntPolynomial({0});
  std::vector<BigInt> out;
  for (int i = 0; i < k; ++i) out.push_back(coeffs_[static_cast<std::size_t>(i)] * (k - i));
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator*(const IntPolynomial& other) const {
  std::vector<BigInt> out(coeffs_.size() + other.coeffs_.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * other.coeffs_[j];
  }
  return IntPolynomial(std::move(out));
}

std::optional<IntPolynomial> IntPolynomial::divide_exact(const IntPolynomial& divisor) const {
  require(divisor.is_monic(), ErrorKind::Domain, "divide_exact needs a monic divisor");
  const int dk = divisor.degree();
  if (dk > degree()) return std::nullopt;
  std::vector<BigInt> rem = coeffs_;
  std::vector<BigInt> quot(static_cast<std::size_t>(degree() - dk) + 1, BigInt(0));
  for (std::size_t i = 0; i < quot.size(); ++i) {
    const BigInt q = rem[i];
    quot[i] = q;
    if (q == 0) continue;
    for (std::size_t j = 0; j < divisor.coeffs_.size(); ++j) rem[i + j] -= q * divisor.coeffs_[j];
  }
  for (std::size_t i = quot.size(); i < rem.size(); ++i) {
    if (rem[i] != 0) return std::nullopt;
  }
  return IntPolynomial(std::move(quot));
}

std::string IntPolynomial::to_string() const {
  std::string out;
  const int k = degree();
  for (int i = 0; i <= k; ++i) {
    const BigInt& c = coeffs_[static_cast<std::size_t>(i)];
    if (c == 0 && k > 0) continue;
    const int power = k - i;
    BigInt mag = c < 0 ? BigInt(-c) : c;
    if (out.empty()) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? "-" : "+";
    }
    if (mag != 1 || power == 0) out += mag.str();
    if (power > 0 && mag != 1) out += "*";
    if (power >= 1) out += "x";
    if (power >= 2) out += "^" + std::to_string(power);
  }
  return out;
}

Json bigint_to_json(const BigInt& v) {
  if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max()) {
    return v.convert_to<long long>();
  }
  return v.str();
}

Json IntPolynomial::to_json() const {
  Json out = Json::array();
  for (const auto& c : coeffs_) out.push_back(bigint_to_json(c));
  return out;
}

namespace {

// Parlett-Reinsch balancing with radix 2; scaling is exact, eigenvalues unchanged.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / 2.0;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c > g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(const IntPolynomial& p) {
  const int k = p.degree();
  require(k >= 1, ErrorKind::Domain, "constant polynomial has no roots");
  const long double lead = p.leading().convert_to<long double>();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    companion(0, j) = static_cast<double>(-p.coefficients()[static_cast<std::size_t>(j + 1)].convert_to<long double>() / lead);
  }
  for (int i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
  balance(companion);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  require(solver.info() == Eigen::Success, ErrorKind::Numeric, "companion eigenvalue iteration failed");

  const IntPolynomial dp = p.derivative();
  std::vector<std::complex<double>> roots;
  roots.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const std::complex<double> z0 = solver.eigenvalues()(i);
    std::complex<long double> z(z0.real(), z0.imag());
    for (int iter = 0; iter < 60; ++iter) {
      const auto fz = p.evaluate(z);
      const auto dz = dp.evaluate(z);
      if (std::abs(dz) == 0.0L) break;
      const auto step = fz / dz;
      z -= step;
      if (std::abs(step) <= 1e-18L * std::max(1.0L, std::abs(z))) break;
    }
    // Keep the eigenvalue when Newton wandered off (clustered roots).
    const std::complex<double> polished(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    if (std::abs(polished - z0) > 1e-6 * std::max(1.0, std::abs(z0))) {
      roots.push_back(z0);
    } else {
      roots.push_back(polished);
    }
  }
  // Snap conjugate noise on real roots.
  for (auto& r : roots) {
    if (std::abs(r.imag()) <= 1e-14 * std::max(1.0, std::abs(r.real()))) r = {r.real(), 0.0};
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

std::vector<std::complex<long double>> monic_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<long double>> c{1.0L};
  for (const auto& r : roots) {
    const std::complex<long double> rl(r.real(), r.imag());
    c.push_back(0.0L);
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= rl * c[i - 1];
  }
  return c;
}

}  // namespace ifsrecur
