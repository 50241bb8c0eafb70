// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "iterlab/iterates.hpp"
#include "iterlab/scenario.hpp"
#include "iterlab/symbol_analysis.hpp"
#include "iterlab/weight.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace iterlab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[miss] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream out;
  out.precision(digits);
  out << x;
  return out.str();
}

OperatorSystem system_of(std::initializer_list<const char*> polys, int order) {
  std::vector<MultiPoly> ps;
  for (const char* p : polys) ps.push_back(parse_term_list(p));
  return OperatorSystem(std::move(ps), order);
}

// Raw exponent within tol of the expected snapped rational.
void expect_exponent(Outcome& o, const std::string& label, const GrowthFit& fit, double expected,
                     double tol = 0.05) {
  const bool ok = !fit.snapped.infinite && fit.snapped.snapped && std::abs(fit.snapped.value() - expected) < 1e-12 &&
                  std::abs(fit.raw_exponent - expected) <= tol;
  o.require(ok, label + " = " + fit.snapped.to_string() + " (raw " + fmt(fit.raw_exponent) + ")");
}

const OperatorSystem kDiag = system_of({"1 2 0", "1 0 2"}, 2);
const OperatorSystem kLaplace = system_of({"1 2 0; 1 0 2"}, 2);
const OperatorSystem kGrad2 = system_of({"1 1 0", "1 0 1"}, 1);

Outcome criterion1() {
  Outcome o;
  const auto plan = SamplingPlan::make(2, 0);
  expect_exponent(o, "gamma_P", estimate_gamma(kDiag, plan, 2).fit, 2.0);
  expect_exponent(o, "gamma_Q", estimate_gamma(kLaplace, plan, 2).fit, 2.0);
  expect_exponent(o, "h(Q<P)", estimate_h(kLaplace, kDiag, plan), 1.0);
  expect_exponent(o, "h(P<Q)", estimate_h(kDiag, kLaplace, plan), 1.0);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto plan = SamplingPlan::make(2, 0);
  expect_exponent(o, "h(grad<Lap)", estimate_h(kGrad2, kLaplace, plan), 0.5);
  expect_exponent(o, "h(Lap<grad)", estimate_h(kLaplace, kGrad2, plan), 2.0);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto single = system_of({"1 2 0"}, 2);
  const auto plan2 = SamplingPlan::make(2, 0);
  expect_exponent(o, "gamma(xi1^2)", estimate_gamma(single, plan2, 2).fit, 2.0);
  const auto ell = check_elliptic(single, plan2);
  o.require(ell.elliptic == Verdict::kFail, "elliptic(xi1^2) = " + to_string(ell.elliptic));
  expect_exponent(o, "gamma(grad, n=2)", estimate_gamma(kGrad2, plan2, 1).fit, 1.0);
  const auto grad3 = system_of({"1 1 0 0", "1 0 1 0", "1 0 0 1"}, 1);
  expect_exponent(o, "gamma(grad, n=3)", estimate_gamma(grad3, SamplingPlan::make(3, 0), 1).fit, 1.0);
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 rng(4);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
  double worst = 0.0;
  int cases = 0;
  while (cases < 100) {
    const auto n = static_cast<std::size_t>(pick(1, 3));
    const auto N = static_cast<std::size_t>(pick(1, 3));
    const int m = pick(1, 3);
    std::vector<MultiPoly> polys;
    for (std::size_t j = 0; j < N; ++j) {
      MultiPoly p(n);
      const int terms = pick(1, 4);
      for (int k = 0; k < terms; ++k) {
        MultiIndex e(n, 0);
        int budget = pick(0, m);
        for (std::size_t i = 0; i < n && budget > 0; ++i) {
          const int take = i + 1 == n ? budget : pick(0, budget);
          e[i] = static_cast<unsigned>(take);
          budget -= take;
        }
        p += MultiPoly::monomial(Rational(pick(-5, 5)), e);
      }
      MultiIndex top(n, 0);
      top[static_cast<std::size_t>(pick(0, static_cast<int>(n) - 1))] = static_cast<unsigned>(m);
      p += MultiPoly::monomial(Rational(pick(1, 3)), top);
      polys.push_back(std::move(p));
    }
    const OperatorSystem P(std::move(polys), m);
    MultiIndex beta(N);
    for (auto& b : beta) b = static_cast<unsigned>(pick(0, 4));
    std::vector<double> xi(n), lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      xi[i] = uniform(-3.0, 3.0);
      lo[i] = uniform(-2.0, 1.0);
      hi[i] = lo[i] + uniform(0.1, 2.0);
    }
    const Box K(lo, hi);
    double expected = 0.5 * std::log(K.volume());
    for (std::size_t j = 0; j < N; ++j) expected += beta[j] * std::log(std::abs(P[j].eval(xi)));
    if (!std::isfinite(expected)) continue;  // symbol vanishes at xi; draw again
    const double got = l2_norm_on_box(apply_iterate(P, beta, TestFunction::plane_wave(xi)), K);
    worst = std::max(worst, std::abs(std::expm1(got - expected)));
    ++cases;
  }
  o.require(worst <= 1e-10, "100 cases, worst relative error " + fmt(worst, 3) + " (tol 1e-10)");
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937_64 rng(5);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  int passed = 0, failed = 0, inconclusive = 0;
  for (int k = 0; k < 500; ++k) {
    const double s = uniform(1.2, 4.0), h = uniform(0.5, 4.0), lambda = uniform(0.25, 4.0);
    const double t = std::exp(uniform(0.0, 10.0));
    const auto r = check_lemma_J(WeightFunction::gevrey(s), h, lambda, t, 100'000'000L, 1e-6);
    passed += r.verdict == Verdict::kPass;
    failed += r.verdict == Verdict::kFail;
    inconclusive += r.verdict == Verdict::kInconclusive;
  }
  o.require(passed == 500, std::to_string(passed) + "/500 pass, " + std::to_string(failed) + " fail, " +
                               std::to_string(inconclusive) + " inconclusive (slack 1e-6)");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto w = WeightFunction::gevrey(2.0);
  const YoungConjugate conj(w);
  std::vector<double> ys{0.0};
  for (int k = 0; k < 400; ++k) ys.push_back(1e-3 * std::pow(1e7, k / 399.0));
  const auto shape = check_conjugate_shape(conjugate_table(conj, ys));
  o.require(shape.convex, "convex");
  o.require(shape.zero_at_origin, "phi*(0) = 0");
  o.require(shape.ratio_nondecreasing, "phi*(y)/y nondecreasing");

  double worst_bi = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double x = 0.5 + 19.5 * k / 100.0;
    const double phi = w(std::exp(x));
    worst_bi = std::max(worst_bi, std::abs(biconjugate(conj, x) - phi) / std::max(1.0, std::abs(phi)));
  }
  o.require(worst_bi <= 1e-4, "biconjugation worst rel " + fmt(worst_bi, 3) + " (tol 1e-4)");

  double worst_scale = 0.0;
  for (double a : {1.0 / 3.0, 0.5, 2.0, 3.0}) {
    const YoungConjugate scaled(rescale_weight(w, a));
    for (int k = 0; k < 100; ++k) {
      const double y = 1e-2 * std::pow(1e5, k / 99.0);
      const double rhs = conj(y / a);
      worst_scale = std::max(worst_scale, std::abs(scaled(y) - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  o.require(worst_scale <= 1e-6, "rescaling identity worst rel " + fmt(worst_scale, 3) + " (tol 1e-6)");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto g2 = check_weight_axioms(WeightFunction::gevrey(2.0));
  for (const auto& [name, r] : {std::pair{"alpha", g2.alpha}, {"beta", g2.beta}, {"gamma", g2.gamma},
                                {"delta", g2.delta}, {"bmm", g2.bmm}}) {
    o.require(r.verdict == Verdict::kPass, std::string("gevrey(2) ") + name + " " + to_string(r.verdict));
  }
  o.require(std::isfinite(g2.alpha.value) && std::isfinite(g2.bmm.value),
            "L = " + fmt(g2.alpha.value) + ", H = " + fmt(g2.bmm.value));
  const auto g1 = check_weight_axioms(WeightFunction::gevrey(1.0));
  o.require(g1.beta.verdict == Verdict::kFail, "gevrey(1) beta " + to_string(g1.beta.verdict));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto u = TestFunction::poly_gaussian(parse_term_list("1 0 0"), 1.0);
  const auto table = iterate_norm_table(kLaplace, u, Box::cube(2, -1.0, 1.0), 15);
  // Least squares log||Q^j u|| = a + b j log j over j = 8..15.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (unsigned j = 8; j <= 15; ++j) {
    const double x = j * std::log(static_cast<double>(j));
    const double y = table.at(MultiIndex{j});
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  o.require(slope >= 1.8 && slope <= 2.2, "slope " + fmt(slope) + " (window [1.8, 2.2])");
  return o;
}

Outcome criterion9() {
  Outcome o;
  std::vector<NamedFunction> testset{
      {"wave_0", TestFunction::plane_wave({1.0, 0.0})},
      {"wave_1", TestFunction::plane_wave({0.0, -2.0})},
      {"wave_2", TestFunction::plane_wave({0.5, 1.5}, {0.0, 1.0})},
      {"wave_3", TestFunction::plane_wave({-3.0, 2.0}, 2.0)},
      {"wave_4", TestFunction::plane_wave({4.0, 4.0})},
      {"gauss", TestFunction::poly_gaussian(parse_term_list("1 0 0"), 1.0)},
      {"gauss_x1", TestFunction::poly_gaussian(parse_term_list("1 1 0"), 1.0)},
      {"gauss_wide", TestFunction::poly_gaussian(parse_term_list("1 0 0; -1 1 1"), 0.5)},
  };
  const auto w = WeightFunction::gevrey(2.0);
  const auto K = Box::cube(2, -1.0, 1.0);
  for (const auto& [label, P, Q] : {std::tuple{"P->Q", &kDiag, &kLaplace}, std::tuple{"Q->P", &kLaplace, &kDiag}}) {
    const auto r = verify_inclusion(*P, *Q, w, 1.0, 1.0, testset, K);
    std::size_t members = 0, preserved = 0;
    for (const auto& e : r.entries) {
      if (e.p_class.verdict != Membership::kMember) continue;
      ++members;
      preserved += e.q_class && e.q_class->verdict == Membership::kMember;
    }
    o.require(r.violations == 0 && members == preserved && members > 0,
              std::string(label) + ": " + std::to_string(preserved) + "/" + std::to_string(members) +
                  " members preserved, " + std::to_string(r.violations) + " violations, gamma_P " +
                  fmt(r.gamma_p));
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  const std::filesystem::path dir = ITERLAB_SCENARIO_DIR;
  for (const char* name : {"example_3_13", "gradient_vs_laplacian", "weight_axioms_gevrey", "lemma_4_7_sweep"}) {
    const auto s = load_config(dir / (std::string(name) + ".toml"));
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    o.require(dump_report(a.report) == dump_report(b.report) && a.files == b.files,
              std::string(name) + (a.exit_code == 0 ? "" : " (exit " + std::to_string(a.exit_code) + ")"));
  }
  return o;
}

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds; 0 = none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "diagonal vs Laplacian exponents", 10.0, criterion1},
      {2, "gradient vs Laplacian weakness", 0.0, criterion2},
      {3, "single operator and gradient gamma", 0.0, criterion3},
      {4, "plane-wave norm identity", 0.0, criterion4},
      {5, "conjugate sandwich sweep", 30.0, criterion5},
      {6, "conjugate machinery", 0.0, criterion6},
      {7, "weight axioms", 0.0, criterion7},
      {8, "iterate growth exponent", 60.0, criterion8},
      {9, "end-to-end inclusion", 0.0, criterion9},
      {10, "deterministic reports", 0.0, criterion10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0) o.require(seconds <= c.time_limit, "runtime limit " + fmt(c.time_limit) + " s");
    failures += !o.pass;
    std::printf("criterion %2d %s  %-36s %7.2f s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title.c_str(), seconds,
                o.detail.str().c_str());
  }
  std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
