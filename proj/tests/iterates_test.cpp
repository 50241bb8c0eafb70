#include "iterlab/iterates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace iterlab {
namespace {

OperatorSystem sys(std::vector<std::string> polys, int m) {
  std::vector<MultiPoly> ps;
  for (const auto& p : polys) ps.push_back(parse_term_list(p));
  return OperatorSystem(std::move(ps), m);
}

OperatorSystem diag_squares() { return sys({"1 2 0", "1 0 2"}, 2); }
OperatorSystem laplacian() { return sys({"-1 2 0\n-1 0 2"}, 2); }

TestFunction gaussian2() { return TestFunction::poly_gaussian(MultiPoly::constant(2, 1), 1.0); }

std::map<MultiIndex, Complex> expanded(const PolyGaussian& g) {
  std::map<MultiIndex, Complex> out;
  for (const auto& [e, c] : g.coeffs) out[e] = c * std::ldexp(1.0, static_cast<int>(g.exp2));
  return out;
}

TEST(BoxTest, VolumeAndValidation) {
  EXPECT_DOUBLE_EQ(Box({0.0, -1.0}, {2.0, 1.0}).volume(), 4.0);
  EXPECT_THROW(Box({0.0}, {0.0}), std::invalid_argument);
  EXPECT_THROW(Box({0.0, 1.0}, {1.0}), std::invalid_argument);
  EXPECT_TRUE(Box::cube(2, -2, 2).contains(Box::cube(2, -1, 1)));
}

TEST(ApplyOperator, PlaneWaveEigenvalue) {
  const auto u = TestFunction::plane_wave({3.0, 0.0});
  const auto v = apply_operator(parse_term_list("1 1 0"), u);
  ASSERT_EQ(v.waves().size(), 1u);
  const auto& w = v.waves().front();
  EXPECT_EQ(std::ldexp(w.mantissa.real(), static_cast<int>(w.exp2)), 3.0);
  EXPECT_EQ(w.mantissa.imag(), 0.0);
}

TEST(ApplyOperator, LaplacianOnGaussian) {
  // Symbol -xi1^2 - xi2^2 is the operator d1^2 + d2^2; on e^{-|x|^2} it gives (4|x|^2 - 4) e^{-|x|^2}.
  const auto v = apply_operator(laplacian()[0], gaussian2());
  ASSERT_EQ(v.gaussians().size(), 1u);
  const auto coeffs = expanded(v.gaussians().front());
  const std::map<MultiIndex, Complex> expected{{{0, 0}, -4.0}, {{2, 0}, 4.0}, {{0, 2}, 4.0}};
  EXPECT_EQ(coeffs, expected);
  EXPECT_EQ(v.gaussians().front().scale, 1.0);
}

TEST(ApplyOperator, OddSymbolsUseMinusI) {
  // D1 = -i d1; D1 e^{-x^2} = 2 i x e^{-x^2}.
  const auto u = TestFunction::poly_gaussian(MultiPoly::constant(1, 1), 1.0);
  const auto v = apply_operator(parse_term_list("1 1"), u);
  const auto coeffs = expanded(v.gaussians().front());
  ASSERT_EQ(coeffs.size(), 1u);
  EXPECT_EQ(coeffs.at({1}), Complex(0.0, 2.0));
}

TEST(ApplyOperator, Linearity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const auto op = parse_term_list("2 2 0\n-1 1 1\n3 0 1\n1/2 0 0");
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = TestFunction::poly_gaussian(parse_term_list("1 1 0\n-2 0 3"), 0.5);
    const auto v = TestFunction::poly_gaussian(parse_term_list("3 2 2\n1 0 0"), 0.5);
    const Complex a(coord(rng), coord(rng));
    const auto lhs = apply_operator(op, u.scaled(a) + v);
    const auto rhs = apply_operator(op, u).scaled(a) + apply_operator(op, v);
    for (int k = 0; k < 5; ++k) {
      const std::vector<double> x{coord(rng), coord(rng)};
      const Complex l = lhs.eval(x), r = rhs.eval(x);
      EXPECT_NEAR(std::abs(l - r), 0.0, 1e-12 * (1.0 + std::abs(l)));
    }
  }
}

TEST(ApplyOperator, PointwiseAgainstFiniteDifferences) {
  // P = D1^2 = -d1^2 on x1 x2 e^{-|x|^2}.
  const auto u = TestFunction::poly_gaussian(parse_term_list("1 1 1"), 1.0);
  const auto v = apply_operator(parse_term_list("1 2 0"), u);
  const double h = 1e-4;
  for (double x1 : {-0.7, 0.1, 0.9}) {
    const std::vector<double> xm{x1 - h, 0.4}, x0{x1, 0.4}, xp{x1 + h, 0.4};
    const Complex fd = -(u.eval(xp) - 2.0 * u.eval(x0) + u.eval(xm)) / (h * h);
    EXPECT_NEAR(std::abs(v.eval(x0) - fd), 0.0, 1e-6);
  }
}

TEST(ApplyOperator, MixedSumsRejected) {
  EXPECT_THROW(TestFunction::plane_wave({1.0, 0.0}) + gaussian2(), std::invalid_argument);
  EXPECT_THROW(apply_operator(parse_term_list("1 1"), gaussian2()), std::invalid_argument);
}

TEST(ApplyIterate, ZeroBetaAndSymbolCorrespondence) {
  const auto P = sys({"1 2 0\n-1 0 1", "2 1 1\n1 0 0"}, 2);
  const auto u = TestFunction::plane_wave({0.7, -1.3});
  const auto same = apply_iterate(P, {0, 0}, u);
  EXPECT_EQ(same.waves().front().mantissa, u.waves().front().mantissa);
  const std::vector<double> xi{0.7, -1.3};
  const auto v = apply_iterate(P, {3, 2}, u);
  const auto& w = v.waves().front();
  const double got = std::ldexp(w.mantissa.real(), static_cast<int>(w.exp2));
  const double want = iterate_symbol(P, {3, 2}, xi);
  EXPECT_NEAR(got, want, 1e-14 * std::abs(want));
}

TEST(ApplyIterate, SemigroupOnGaussians) {
  const auto P = sys({"1 2 0\n1 1 0", "-1 0 2\n1 1 1"}, 2);
  const auto u = TestFunction::poly_gaussian(parse_term_list("1 0 0\n1 1 1"), 0.75);
  const auto joint = apply_iterate(P, {2, 3}, u);
  const auto split = apply_iterate(P, {1, 2}, apply_iterate(P, {1, 1}, u));
  const auto a = expanded(joint.gaussians().front());
  const auto b = expanded(split.gaussians().front());
  ASSERT_EQ(a.size(), b.size());
  double scale = 0.0;
  for (const auto& [e, c] : a) scale = std::max(scale, std::abs(c));
  for (const auto& [e, c] : a) EXPECT_LE(std::abs(c - b.at(e)), 1e-10 * scale);
}

TEST(ApplyIterate, HighOrderDoesNotOverflow) {
  const auto P = sys({"1 2"}, 2);
  const auto u = TestFunction::poly_gaussian(MultiPoly::constant(1, 1), 1.0);
  const auto v = apply_iterate(P, {60}, u);
  EXPECT_GT(v.gaussians().front().exp2, 100);
  EXPECT_TRUE(std::isfinite(l2_norm_on_box(v, Box::cube(1, -1, 1))));
}

TEST(ApplyIterate, OverflowNamesBeta) {
  const auto big = sys({"1 2"}, 2);  // P(xi) = 1e600 is not representable
  const auto u = TestFunction::plane_wave({1e300});
  EXPECT_THROW(
      {
        try {
          apply_iterate(big, {3}, u);
        } catch (const std::overflow_error& e) {
          EXPECT_NE(std::string(e.what()).find("beta=(3)"), std::string::npos) << e.what();
          throw;
        }
      },
      std::overflow_error);
}

TEST(GaussianMoments, MatchQuadrature) {
  // int_{-1}^{1} e^{-2x^2} dx = sqrt(pi/2) erf(sqrt 2)
  EXPECT_NEAR(gaussian_moments(0, -1.0, 1.0, 2.0)[0], std::sqrt(std::numbers::pi / 2.0) * std::erf(std::sqrt(2.0)),
              1e-15);
  const TestFunction g = TestFunction::poly_gaussian(MultiPoly::constant(1, 1), 1.0);
  const double log_norm = l2_norm_on_box(g, Box::cube(1, -1, 1), {true, 1e-10});
  EXPECT_NEAR(2.0 * log_norm, std::log(std::sqrt(std::numbers::pi / 2.0) * std::erf(std::sqrt(2.0))), 1e-12);
}

TEST(GaussianMoments, RecurrenceAgainstDirectIntegration) {
  // Upward and incomplete-gamma branches against a fine composite Simpson rule.
  for (double c : {0.3, 2.0, 7.5}) {
    for (auto [a, b] : {std::pair{-1.0, 1.0}, std::pair{0.2, 1.7}, std::pair{-2.5, -0.5}}) {
      const auto M = gaussian_moments(40, a, b, c);
      for (int k : {0, 1, 5, 12, 25, 40}) {
        const int n = 200000;
        const double h = (b - a) / n;
        double s = 0.0, mass = 0.0;
        for (int i = 0; i <= n; ++i) {
          const double x = a + i * h;
          const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
          s += w * std::pow(x, k) * std::exp(-c * x * x);
          mass += w * std::pow(std::abs(x), k) * std::exp(-c * x * x);
        }
        s *= h / 3.0;
        mass *= h / 3.0;
        EXPECT_NEAR(M[k], s, 1e-10 * mass) << "c=" << c << " k=" << k;
      }
    }
  }
}

TEST(L2Norm, PlaneWaveExamples) {
  const auto u = TestFunction::plane_wave({5.0, -2.0});
  EXPECT_NEAR(l2_norm_on_box(u, Box::cube(2, 0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(l2_norm_on_box(u, Box({0.0, 0.0}, {2.0, 3.0})), 0.5 * std::log(6.0), 1e-15);
  EXPECT_EQ(l2_norm_on_box(TestFunction(2), Box::cube(2, 0, 1)), -INFINITY);
}

TEST(L2Norm, PlaneWaveSumsAgainstQuadrature) {
  const auto u = TestFunction::plane_wave({1.0, 2.0}, {0.5, 1.0}) + TestFunction::plane_wave({-3.0, 0.5}, 2.0) +
                 TestFunction::plane_wave({1.0, 2.000001}, -1.0);
  EXPECT_NO_THROW(l2_norm_on_box(u, Box({-1.0, 0.0}, {0.5, 2.0}), {true, 1e-8}));
}

TEST(L2Norm, GaussianAgainstQuadrature) {
  const auto P = laplacian();
  const auto K = Box({-1.0, -0.5}, {1.5, 1.0});
  const auto u = TestFunction::poly_gaussian(parse_term_list("1 0 0\n-2 1 1\n1/3 0 3"), 0.8) +
                 TestFunction::poly_gaussian(parse_term_list("1 2 0"), 1.7);
  for (unsigned j : {0u, 1u, 3u, 6u}) {
    EXPECT_NO_THROW(l2_norm_on_box(apply_iterate(P, {j}, u), K, {true, 1e-8})) << "j=" << j;
  }
}

TEST(L2Norm, Homogeneous) {
  const auto u = TestFunction::poly_gaussian(parse_term_list("1 1 0\n1 0 0"), 1.0);
  const auto K = Box::cube(2, -1, 1);
  const Complex c(-3.0, 4.0);
  EXPECT_NEAR(l2_norm_on_box(u.scaled(c), K), std::log(5.0) + l2_norm_on_box(u, K), 1e-13);
}

TEST(NormTableTest, GaussianUnderLaplacianMatchesFrozenOracle) {
  // log ||Delta^j e^{-|x|^2}||_{L2([-1,1]^2)}, mpmath tensor-Hermite quadrature at 30 digits.
  const std::vector<double> oracle{
      0.17922344035233728, 1.1965676761284196, 3.1081311706127353, 5.52601852750874,
      8.249103472965098,   11.192816147807616, 14.319363507776446, 17.606185078606423,
      21.035283815185114,  24.590378138028417, 28.256827779543567, 32.022088874247494,
      35.87587158380428,   39.80995322405211,  43.817828970966694, 47.894340178795446};
  const auto table = iterate_norm_table(laplacian(), gaussian2(), Box::cube(2, -1, 1), 15);
  for (unsigned j = 0; j <= 15; ++j) {
    EXPECT_NEAR(table.at({j}), oracle[j], 1e-9) << "j=" << j;
  }
}

TEST(NormTableTest, PlaneWaveEntriesAreSymbolValues) {
  const auto P = diag_squares();
  const std::vector<double> xi{1.5, -0.5};
  const auto K = Box({0.0, 0.0}, {2.0, 0.5});
  const auto table = iterate_norm_table(P, TestFunction::plane_wave(xi), K, 8);
  EXPECT_EQ(table.log_norms.size(), 45u);
  for (const auto& [beta, v] : table.log_norms) {
    EXPECT_NEAR(v, log_abs_iterate_symbol(P, beta, xi) + 0.5 * std::log(K.volume()), 1e-12);
  }
  EXPECT_NEAR(table.at({0, 0}), 0.0, 1e-15);
}

TEST(NormTableTest, PrefixStability) {
  const auto u = gaussian2();
  const auto K = Box::cube(2, -1, 1);
  const auto small = iterate_norm_table(diag_squares(), u, K, 10);
  const auto large = iterate_norm_table(diag_squares(), u, K, 13);
  for (const auto& [beta, v] : small.log_norms) EXPECT_EQ(v, large.at(beta));
}

TEST(NormTableTest, CsvLayout) {
  const auto table = iterate_norm_table(diag_squares(), TestFunction::plane_wave({1.0, 1.0}), Box::cube(2, 0, 1), 1);
  EXPECT_EQ(table.to_csv(), "beta_1,beta_2,log_norm\n0,0,0\n1,0,0\n0,1,0\n");
}

TEST(Seminorm, ZeroFunctionIsMinusInfinity) {
  const auto r = seminorm(laplacian(), TestFunction(2), Box::cube(2, -1, 1), 1.0, WeightFunction::gevrey(2.0), 5);
  EXPECT_EQ(r.log_value, -INFINITY);
  EXPECT_TRUE(r.plateau);
}

TEST(Seminorm, PlaneWaveFiniteForEveryLambda) {
  const auto w = WeightFunction::gevrey(2.0);
  const YoungConjugate conj(w);
  const auto table = iterate_norm_table(diag_squares(), TestFunction::plane_wave({3.0, 4.0}), Box::cube(2, 0, 1), 15);
  for (double lambda : kBeurlingLadder) {
    const auto r = seminorm(table, 2, lambda, conj);
    EXPECT_TRUE(r.plateau) << lambda;
    EXPECT_TRUE(std::isfinite(r.log_value));
  }
}

TEST(Seminorm, HomogeneousAndMonotoneInK) {
  const auto w = WeightFunction::gevrey(2.0);
  const auto P = laplacian();
  const auto u = TestFunction::poly_gaussian(parse_term_list("1 0 0\n1 1 0"), 1.0);
  const auto inner = Box::cube(2, -0.5, 0.5), outer = Box::cube(2, -1, 1.5);
  const auto a = seminorm(P, u, inner, 1.0, w, 12);
  const auto b = seminorm(P, u, outer, 1.0, w, 12);
  EXPECT_LE(a.log_value, b.log_value);
  const auto c = seminorm(P, u.scaled(7.0), inner, 1.0, w, 12);
  EXPECT_NEAR(c.log_value, a.log_value + std::log(7.0), 1e-12);
}

TEST(Classify, PlaneWaveIsBeurlingMember) {
  const auto table = iterate_norm_table(diag_squares(), TestFunction::plane_wave({2.0, -1.0}), Box::cube(2, 0, 1), 15);
  for (const auto& w : {WeightFunction::gevrey(2.0), WeightFunction::gevrey(3.0), WeightFunction::log_power(3.0)}) {
    const auto r = classify_membership(table, w, 2, ClassMode::kBeurling);
    EXPECT_EQ(r.verdict, Membership::kMember) << w.describe() << " " << r.hint;
  }
}

TEST(Classify, GaussianRoumieuGevreyTwo) {
  const auto table = iterate_norm_table(laplacian(), gaussian2(), Box::cube(2, -1, 1), 30);
  const auto roumieu = classify_membership(table, WeightFunction::gevrey(2.0), 2, ClassMode::kRoumieu);
  EXPECT_EQ(roumieu.verdict, Membership::kMember);
  const auto beurling = classify_membership(table, WeightFunction::gevrey(2.0), 2, ClassMode::kBeurling);
  if (beurling.verdict == Membership::kMember) EXPECT_EQ(roumieu.verdict, Membership::kMember);
}

TEST(Classify, FastGrowthIsNotMember) {
  // Plane wave with a large symbol value against a weak log-power weight.
  const auto P = sys({"1 1"}, 1);
  const auto table = iterate_norm_table(P, TestFunction::plane_wave({1e6}), Box::cube(1, 0, 1), 30);
  const auto r = classify_membership(table, WeightFunction::gevrey(1.0), 1, ClassMode::kRoumieu);
  EXPECT_EQ(r.verdict, Membership::kNonMember);
}

TEST(VerifyInclusion, ExampleSystemsBothWays) {
  const auto w = WeightFunction::gevrey(2.0);
  const auto K = Box::cube(2, -1, 1);
  const std::vector<NamedFunction> testset{
      {"pw1", TestFunction::plane_wave({1.0, 0.0})},
      {"gauss", gaussian2()},
      {"poly_gauss", TestFunction::poly_gaussian(parse_term_list("1 1 1\n-1 0 2"), 0.5)},
  };
  const auto forward = verify_inclusion(diag_squares(), laplacian(), w, 1.0, 1.0, testset, K);
  EXPECT_EQ(forward.violations, 0u);
  EXPECT_TRUE(forward.warnings.empty());
  EXPECT_NEAR(forward.gamma_p, 2.0, 1e-12);
  for (const auto& e : forward.entries) {
    EXPECT_EQ(e.p_class.verdict, Membership::kMember) << e.name;
    ASSERT_TRUE(e.q_class.has_value());
    EXPECT_EQ(e.q_class->verdict, Membership::kMember) << e.name;
  }
  const auto backward = verify_inclusion(laplacian(), diag_squares(), w, 1.0, 1.0, testset, K);
  EXPECT_EQ(backward.violations, 0u);
}

TEST(VerifyInclusion, EmptyTestsetAndSmallSWarning) {
  const auto w = WeightFunction::gevrey(2.0);
  const auto r = verify_inclusion(diag_squares(), laplacian(), w, 0.5, 1.0, {}, Box::cube(2, -1, 1));
  EXPECT_TRUE(r.entries.empty());
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(VerifyInclusion, GradientSigmaIsOmega) {
  // Elliptic Delta against (xi1, xi2) with h = 1/2: sigma'(t) = omega(t^{1/(2 * 1/2)}) = omega(t).
  const auto w = WeightFunction::gevrey(2.0);
  const auto r = verify_inclusion(laplacian(), sys({"1 1 0", "1 0 1"}, 1), w, 1.0, 0.5, {}, Box::cube(2, -1, 1),
                                  {ClassMode::kBeurling, 2.0});
  for (double t : {0.5, 3.0, 1e4}) EXPECT_NEAR(r.sigma_prime(t), w(t), 1e-12 * (1.0 + w(t)));
}

}  // namespace
}  // namespace iterlab
