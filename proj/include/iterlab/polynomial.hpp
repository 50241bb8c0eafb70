#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iterlab {

using Rational = boost::multiprecision::cpp_rational;

/// Exponent vector. Length is n (number of variables) for monomials and
/// derivatives, N (number of operators) for iterates.
using MultiIndex = std::vector<unsigned>;

unsigned total_order(const MultiIndex& index);
MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);

/// Degree reported for the zero polynomial.
inline constexpr int kZeroPolyDegree = std::numeric_limits<int>::min();

/// Multivariate polynomial with exact rational coefficients.
///
/// Terms are kept in a sparse map keyed by exponent vectors; zero
/// coefficients are never stored, so the empty map is the zero polynomial.
class MultiPoly {
 public:
  using TermMap = std::map<MultiIndex, Rational>;

  explicit MultiPoly(std::size_t num_vars);
  MultiPoly(std::size_t num_vars, TermMap terms);

  static MultiPoly constant(std::size_t num_vars, const Rational& c);
  static MultiPoly monomial(const Rational& c, MultiIndex exponents);
  /// The coordinate polynomial xi_k (0-based k).
  static MultiPoly variable(std::size_t num_vars, std::size_t k);

  std::size_t num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Max |alpha| over stored terms; kZeroPolyDegree for the zero polynomial.
  int degree() const;
  Rational coefficient(const MultiIndex& exponents) const;

  double eval(std::span<const double> xi) const;
  Rational eval(std::span<const Rational> xi) const;

  MultiPoly derivative(const MultiIndex& alpha) const;
  /// Terms of total degree exactly m.
  MultiPoly principal_part(int m) const;

  MultiPoly operator-() const;
  MultiPoly& operator+=(const MultiPoly& other);
  MultiPoly& operator-=(const MultiPoly& other);
  MultiPoly& operator*=(const Rational& c);

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator*(MultiPoly a, const Rational& c) { return a *= c; }
  friend MultiPoly operator*(const Rational& c, MultiPoly a) { return a *= c; }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
  friend bool operator==(const MultiPoly& a, const MultiPoly& b) = default;

 private:
  void check_dims(std::size_t len, const char* what) const;
  void add_term(const MultiIndex& exponents, const Rational& c);

  std::size_t num_vars_;
  TermMap terms_;
};

MultiPoly poly_derivative(const MultiPoly& p, const MultiIndex& alpha);
double poly_eval(const MultiPoly& p, std::span<const double> xi);
MultiPoly principal_part(const MultiPoly& p, int m);

/// Parses the plain-text term list: one term per line, `coeff e1 ... en`,
/// where coeff is an integer or `p/q`. Lines may also be separated by ';'.
/// Blank lines and `#` comments are ignored. Repeated exponents are summed.
MultiPoly parse_term_list(std::string_view text, std::size_t num_vars);
/// Same, inferring n from the first term line.
MultiPoly parse_term_list(std::string_view text);
/// Canonical term list: exponent-sorted lines `coeff e1 ... en\n`.
/// The zero polynomial formats as the empty string.
std::string format_term_list(const MultiPoly& p);

std::string to_string(const Rational& q);
Rational parse_rational(std::string_view text);

/// Ordered list of symbols P_1..P_N of common declared order m.
class OperatorSystem {
 public:
  OperatorSystem(std::vector<MultiPoly> polys, int order);

  std::size_t size() const { return polys_.size(); }
  std::size_t num_vars() const { return polys_.front().num_vars(); }
  int order() const { return order_; }
  const std::vector<MultiPoly>& polys() const { return polys_; }
  const MultiPoly& operator[](std::size_t j) const { return polys_[j]; }

  /// attains_order()[j] is true when deg P_j == m.
  const std::vector<bool>& attains_order() const { return attains_order_; }
  /// True when some member has degree below the declared order.
  bool has_deficient_member() const;

 private:
  std::vector<MultiPoly> polys_;
  int order_;
  std::vector<bool> attains_order_;
};

/// sum_j |P_j(xi)|
double system_symbol_sum(const OperatorSystem& system, std::span<const double> xi);

/// prod_j P_j(xi)^{beta_j}; 1 when beta = 0.
double iterate_symbol(const OperatorSystem& system, const MultiIndex& beta,
                      std::span<const double> xi);
Rational iterate_symbol(const OperatorSystem& system, const MultiIndex& beta,
                        std::span<const Rational> xi);
/// log |prod_j P_j(xi)^{beta_j}|, -inf when the product vanishes.
double log_abs_iterate_symbol(const OperatorSystem& system, const MultiIndex& beta,
                              std::span<const double> xi);

}  // namespace iterlab
