#include "iterlab/polynomial.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace iterlab {
namespace {

MultiPoly P(std::string_view text) { return parse_term_list(text); }

// Random sparse polynomial with small integer-ratio coefficients.
MultiPoly random_poly(std::mt19937_64& rng, std::size_t n, unsigned max_deg, int terms) {
  std::uniform_int_distribution<int> coeff(-9, 9), den(1, 4);
  std::uniform_int_distribution<unsigned> exp(0, max_deg);
  MultiPoly p(n);
  for (int k = 0; k < terms; ++k) {
    MultiIndex e(n);
    for (auto& c : e) c = exp(rng);
    p += MultiPoly::monomial(Rational(coeff(rng), den(rng)), e);
  }
  return p;
}

OperatorSystem diag_squares() { return OperatorSystem({P("1 2 0"), P("1 0 2")}, 2); }

TEST(PolyDerivative, PowerRule) {
  EXPECT_EQ(poly_derivative(P("1 2 0"), {1, 0}), P("2 1 0"));
  EXPECT_TRUE(poly_derivative(P("1 2 0"), {0, 1}).is_zero());
}

TEST(PolyDerivative, MixedTermwiseOracle) {
  // d/dxi1 d/dxi2 (xi1^2 xi2 + xi2^3) = 2 xi1
  EXPECT_EQ(poly_derivative(P("1 2 1\n1 0 3"), {1, 1}), P("2 1 0"));
}

TEST(PolyDerivative, DimensionMismatchThrows) {
  EXPECT_THROW(poly_derivative(P("1 2 0"), {1}), std::invalid_argument);
}

TEST(PolyDerivative, ZeroPolynomialDegreeSentinel) {
  const auto zero = poly_derivative(P("1 1 0"), {2, 0});
  EXPECT_TRUE(zero.is_zero());
  EXPECT_EQ(zero.degree(), kZeroPolyDegree);
  EXPECT_TRUE(poly_derivative(zero, {1, 1}).is_zero());
}

TEST(PolyEval, Examples) {
  const std::vector<double> p34{3.0, 4.0};
  EXPECT_DOUBLE_EQ(poly_eval(P("1 2 0\n1 0 2"), p34), 25.0);
  const std::vector<double> origin{0.0, 0.0};
  EXPECT_DOUBLE_EQ(poly_eval(P("7 0 0\n3 1 1\n-2 0 4"), origin), 7.0);
  const std::vector<double> pt{2.0, -1.0};
  EXPECT_DOUBLE_EQ(poly_eval(P("1 2 1"), pt), -4.0);
}

TEST(PolyEval, ExactRationalMode) {
  const auto p = P("1/3 2 0\n-5/7 1 1\n2 0 0");
  const std::vector<Rational> xi{Rational(3, 2), Rational(-2, 5)};
  // 1/3 * 9/4 - 5/7 * (3/2)(-2/5) + 2 = 3/4 + 3/7 + 2
  EXPECT_EQ(p.eval(std::span<const Rational>(xi)), Rational(3, 4) + Rational(3, 7) + 2);
}

TEST(PolyEval, DimensionMismatchThrows) {
  const std::vector<double> xi{1.0};
  EXPECT_THROW(poly_eval(P("1 2 0"), xi), std::invalid_argument);
}

TEST(SystemSymbolSum, Examples) {
  const auto sys = diag_squares();
  const std::vector<double> a{1.0, 2.0}, b{-3.0, 1.0}, zero{0.0, 0.0};
  EXPECT_DOUBLE_EQ(system_symbol_sum(sys, a), 5.0);
  EXPECT_DOUBLE_EQ(system_symbol_sum(sys, b), 10.0);
  EXPECT_DOUBLE_EQ(system_symbol_sum(sys, zero), 0.0);
}

TEST(IterateSymbol, Examples) {
  const auto sys = diag_squares();
  const std::vector<double> xi{1.0, 2.0};
  EXPECT_DOUBLE_EQ(iterate_symbol(sys, {0, 0}, xi), 1.0);
  EXPECT_DOUBLE_EQ(iterate_symbol(sys, {2, 1}, xi), 4.0);
  EXPECT_THROW(iterate_symbol(sys, {1}, xi), std::invalid_argument);
}

TEST(PrincipalPart, Examples) {
  EXPECT_EQ(principal_part(P("1 2 0\n1 1 0"), 2), P("1 2 0"));
  EXPECT_EQ(principal_part(P("1 2 0\n1 0 2"), 2), P("1 2 0\n1 0 2"));
  EXPECT_EQ(principal_part(P("1 2 1\n1 1 0\n7 0 0"), 3), P("1 2 1"));
  EXPECT_TRUE(principal_part(P("1 1 0"), 2).is_zero());
}

TEST(TermList, CanonicalRoundTrip) {
  const std::string text = "7 0 0\n-1/3 0 2\n5/2 1 1\n1 2 0\n";
  const auto p = parse_term_list(text, 2);
  EXPECT_EQ(format_term_list(p), text);
  EXPECT_EQ(parse_term_list(format_term_list(p), 2), p);
}

TEST(TermList, AcceptsSeparatorsAndMergesDuplicates) {
  const auto p = parse_term_list("1 2 0; 2 2 0  # comment\n\n-1 0 1", 2);
  EXPECT_EQ(p, P("3 2 0\n-1 0 1"));
}

TEST(TermList, RejectsMalformedInput) {
  EXPECT_THROW(parse_term_list("1 2", 2), std::invalid_argument);
  EXPECT_THROW(parse_term_list("x 2 0", 2), std::invalid_argument);
  EXPECT_THROW(parse_term_list("1/0 2 0", 2), std::invalid_argument);
  EXPECT_THROW(parse_term_list("1 -2 0", 2), std::invalid_argument);
}

TEST(OperatorSystem, ValidationFlagsDeficientMembers) {
  const OperatorSystem sys({P("1 2 0"), P("1 1 0")}, 2);
  EXPECT_TRUE(sys.has_deficient_member());
  EXPECT_EQ(sys.attains_order(), (std::vector<bool>{true, false}));
  EXPECT_FALSE(diag_squares().has_deficient_member());
  EXPECT_THROW(OperatorSystem({P("1 3 0")}, 2), std::invalid_argument);
  EXPECT_THROW(OperatorSystem({P("1 1 0")}, 2), std::invalid_argument);
  EXPECT_THROW(OperatorSystem({P("1 2 0"), P("1 2 0 0")}, 2), std::invalid_argument);
  EXPECT_THROW(OperatorSystem({}, 2), std::invalid_argument);
}

TEST(PolyProperties, DerivativeIsLinear) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> small(-5, 5);
  std::uniform_int_distribution<unsigned> order(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_poly(rng, 3, 4, 6);
    const auto q = random_poly(rng, 3, 4, 6);
    const Rational a(small(rng), 3), b(small(rng), 2);
    const MultiIndex alpha{order(rng), order(rng), order(rng)};
    EXPECT_EQ(poly_derivative(a * p + b * q, alpha),
              a * poly_derivative(p, alpha) + b * poly_derivative(q, alpha));
  }
}

TEST(PolyProperties, MixedPartialsCompose) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<unsigned> order(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_poly(rng, 2, 5, 8);
    const MultiIndex a{order(rng), order(rng)}, b{order(rng), order(rng)};
    EXPECT_EQ(poly_derivative(poly_derivative(p, a), b), poly_derivative(p, a + b));
    const int deg = p.degree();
    const auto d = poly_derivative(p, a);
    if (!d.is_zero()) {
      EXPECT_LE(d.degree(), deg - static_cast<int>(total_order(a)));
    }
  }
}

TEST(PolyProperties, IterateSymbolSemigroup) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_int_distribution<unsigned> exps(0, 4);
  const OperatorSystem sys({P("1 2 0\n-1 0 1"), P("2 1 1\n1 0 0")}, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> xi{coord(rng), coord(rng)};
    const MultiIndex beta{exps(rng), exps(rng)}, gamma{exps(rng), exps(rng)};
    const double joint = iterate_symbol(sys, beta + gamma, xi);
    const double split = iterate_symbol(sys, beta, xi) * iterate_symbol(sys, gamma, xi);
    EXPECT_NEAR(joint, split, 1e-12 * (1.0 + std::abs(joint)));
  }
  // Exact in rational arithmetic.
  const std::vector<Rational> xq{Rational(1, 3), Rational(-5, 2)};
  EXPECT_EQ(iterate_symbol(sys, MultiIndex{5, 3}, std::span<const Rational>(xq)),
            iterate_symbol(sys, MultiIndex{2, 1}, std::span<const Rational>(xq)) *
                iterate_symbol(sys, MultiIndex{3, 2}, std::span<const Rational>(xq)));
}

TEST(PolyProperties, SymbolSumGrowthBound) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> radius(0.0, 1e3);
  const OperatorSystem sys({P("3 2 0\n-1 1 1\n5 0 0"), P("-2 0 2\n4 1 0")}, 2);
  double bound_const = 0.0;
  for (const auto& p : sys.polys()) {
    double max_coeff = 0.0;
    for (const auto& [e, c] : p.terms()) max_coeff = std::max(max_coeff, std::abs(static_cast<double>(c)));
    bound_const += max_coeff * static_cast<double>(p.terms().size());
  }
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> xi{gauss(rng), gauss(rng)};
    const double r = radius(rng) / std::hypot(xi[0], xi[1]);
    for (auto& c : xi) c *= r;
    const double norm1 = std::abs(xi[0]) + std::abs(xi[1]);
    EXPECT_LE(system_symbol_sum(sys, xi), bound_const * std::pow(1.0 + norm1, sys.order()));
  }
}

}  // namespace
}  // namespace iterlab
