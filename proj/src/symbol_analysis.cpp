#include "iterlab/symbol_analysis.hpp"

#include "iterlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace iterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log(1 + denominator) below this is too close to bounded for a slope.
constexpr double kMinLogDenominator = 2.0;
// Growth rates d log(.) / d log r separating "bounded" from "growing".
constexpr double kBoundedRate = 0.25;
constexpr double kGrowingRate = 0.5;

// Polynomial with double coefficients for fast repeated evaluation.
struct CompiledPoly {
  std::vector<double> coeffs;
  std::vector<MultiIndex> exps;

  explicit CompiledPoly(const MultiPoly& p) {
    for (const auto& [e, c] : p.terms()) {
      coeffs.push_back(static_cast<double>(c));
      exps.push_back(e);
    }
  }

  double operator()(std::span<const double> xi) const {
    double sum = 0.0;
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
      double term = coeffs[t];
      for (std::size_t i = 0; i < xi.size(); ++i) {
        for (unsigned k = 0; k < exps[t][i]; ++k) term *= xi[i];
      }
      sum += term;
    }
    return sum;
  }
};

struct CompiledSum {
  std::vector<CompiledPoly> polys;

  double operator()(std::span<const double> xi) const {
    double s = 0.0;
    for (const auto& p : polys) s += std::abs(p(xi));
    return s;
  }
  bool empty() const {
    for (const auto& p : polys) {
      if (!p.coeffs.empty()) return false;
    }
    return true;
  }
};

CompiledSum compile(const std::vector<MultiPoly>& polys) {
  CompiledSum out;
  for (const auto& p : polys) out.polys.emplace_back(p);
  return out;
}

CompiledSum compile(const OperatorSystem& sys) { return compile(sys.polys()); }

CompiledSum compile_derivative(const OperatorSystem& sys, const MultiIndex& alpha) {
  std::vector<MultiPoly> ds;
  for (const auto& p : sys.polys()) ds.push_back(p.derivative(alpha));
  return compile(ds);
}

double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<double> point(const std::vector<double>& dir, double r) {
  std::vector<double> xi(dir);
  for (auto& c : xi) c *= r;
  return xi;
}

std::size_t decile_start(std::size_t num_radii) {
  const std::size_t top = std::max<std::size_t>(2, (num_radii + 9) / 10);
  return num_radii > top ? num_radii - top : 0;
}

// Exponent along one direction: max local slope of log N against log(1+S)
// over the top decile; +inf for the bounded-denominator marker; NaN if unusable.
double direction_exponent(const SampleFn& numerator, const SampleFn& denominator, const std::vector<double>& dir,
                          const std::vector<double>& radii) {
  const std::size_t k0 = decile_start(radii.size());
  const std::size_t count = radii.size() - k0;
  std::vector<double> x(count), y(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto xi = point(dir, radii[k0 + k]);
    x[k] = std::log1p(denominator(xi));
    const double n = numerator(xi);
    y[k] = n > 0.0 ? std::log(n) : -kInf;
  }
  const double log_r_span = std::log(radii.back() / radii[k0]);
  if (log_r_span > 0.0) {
    const double den_rate = (x.back() - x.front()) / log_r_span;
    if (den_rate < kBoundedRate) {
      if (std::isfinite(y.front()) && std::isfinite(y.back()) && (y.back() - y.front()) / log_r_span >= kGrowingRate) {
        return kInf;
      }
      return kNaN;
    }
  }
  double best = kNaN;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    if (x[k] < kMinLogDenominator || x[k + 1] < kMinLogDenominator) continue;
    if (!std::isfinite(y[k]) || !std::isfinite(y[k + 1])) continue;
    const double dx = x[k + 1] - x[k];
    if (!(dx > 0.0)) continue;
    const double slope = (y[k + 1] - y[k]) / dx;
    if (std::isnan(best) || slope > best) best = slope;
  }
  return best;
}

std::vector<double> per_direction_exponents(const SampleFn& numerator, const SampleFn& denominator,
                                            const SamplingPlan& plan) {
  std::vector<double> out(plan.directions.size(), kNaN);
  parallel_for(plan.directions.size(),
               [&](std::size_t d) { out[d] = direction_exponent(numerator, denominator, plan.directions[d], plan.radii); });
  return out;
}

// Reduces per-direction exponents into a fit; C and residual filled later.
GrowthFit summarize(std::vector<double> per_direction, const SnapOptions& snap) {
  GrowthFit fit;
  bool infinite = false;
  double raw = -kInf;
  std::size_t unusable = 0;
  for (double e : per_direction) {
    if (std::isnan(e)) {
      ++unusable;
    } else if (std::isinf(e) && e > 0) {
      infinite = true;
    } else {
      raw = std::max(raw, e);
    }
  }
  if (infinite) {
    fit.snapped.infinite = true;
    fit.snapped.raw = kInf;
    fit.raw_exponent = kInf;
  } else if (raw == -kInf) {
    // Numerator vanishes or never grows against the denominator anywhere.
    fit.raw_exponent = 0.0;
    fit.snapped = snap_rational(0.0, snap);
  } else {
    fit.raw_exponent = raw;
    fit.snapped = snap_rational(raw, snap);
    if (!fit.snapped.snapped) fit.warnings.push_back("no rational within tolerance; exponent left unsnapped");
  }
  if (unusable > 0) {
    fit.warnings.push_back(std::to_string(unusable) + " direction(s) gave no usable slope");
  }
  fit.per_direction = std::move(per_direction);
  return fit;
}

void fill_residual(GrowthFit& fit) {
  if (fit.snapped.infinite) {
    fit.residual = kInf;
    return;
  }
  const double target = fit.snapped.value();
  double ss = 0.0;
  std::size_t n = 0;
  for (double e : fit.per_direction) {
    if (!std::isfinite(e)) continue;
    ss += (e - target) * (e - target);
    ++n;
  }
  fit.residual = n ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
}

// max over the plan of N / (1 + S)^e, floored at 1.
double fit_constant(const SampleFn& numerator, const SampleFn& denominator, double exponent,
                    const SamplingPlan& plan) {
  if (!std::isfinite(exponent)) return kInf;
  std::vector<double> per_dir(plan.directions.size(), 1.0);
  parallel_for(plan.directions.size(), [&](std::size_t d) {
    double c = 1.0;
    for (double r : plan.radii) {
      const auto xi = point(plan.directions[d], r);
      const double n = numerator(xi);
      if (n <= 0.0) continue;
      c = std::max(c, std::exp(std::log(n) - exponent * std::log1p(denominator(xi))));
    }
    per_dir[d] = c;
  });
  return *std::max_element(per_dir.begin(), per_dir.end());
}

void check_same_vars(const OperatorSystem& a, const OperatorSystem& b) {
  if (a.num_vars() != b.num_vars()) throw std::invalid_argument("systems have different numbers of variables");
}

void check_plan(const OperatorSystem& sys, const SamplingPlan& plan) {
  if (plan.num_vars != sys.num_vars()) throw std::invalid_argument("sampling plan dimension does not match system");
  if (plan.radii.size() < 2 || plan.directions.empty()) throw std::invalid_argument("sampling plan is empty");
}

// All multi-indices alpha in n variables with 1 <= |alpha| <= max_order, graded.
std::vector<MultiIndex> multi_indices(std::size_t n, int max_order) {
  std::vector<MultiIndex> out;
  for (int total = 1; total <= max_order; ++total) {
    MultiIndex a(n, 0);
    // enumerate compositions of `total` into n parts in lexicographic order
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
      if (i + 1 == n) {
        a[i] = static_cast<unsigned>(left);
        out.push_back(a);
        return;
      }
      for (int k = left; k >= 0; --k) {
        a[i] = static_cast<unsigned>(k);
        rec(i + 1, left - k);
      }
    };
    rec(0, total);
  }
  return out;
}

}  // namespace

SamplingPlan SamplingPlan::make(std::size_t num_vars, std::uint64_t seed, std::size_t num_radii,
                                std::size_t num_random, double r_min, double r_max) {
  if (num_vars == 0) throw std::invalid_argument("sampling plan needs at least one variable");
  if (num_radii < 2) throw std::invalid_argument("sampling plan needs at least two radii");
  if (!(r_min > 0.0) || !(r_max > r_min)) throw std::invalid_argument("radii must satisfy 0 < r_min < r_max");
  SamplingPlan plan;
  plan.num_vars = num_vars;
  plan.seed = seed;
  for (std::size_t k = 0; k < num_radii; ++k) {
    plan.radii.push_back(r_min * std::pow(r_max / r_min, static_cast<double>(k) / static_cast<double>(num_radii - 1)));
  }
  plan.radii.back() = r_max;

  // Box-Muller from raw engine bits; std distributions are not portable.
  std::mt19937_64 rng(seed);
  auto gaussian_pair = [&]() {
    const double u1 = unit_from_bits(rng()) + 0x1.0p-54;
    const double u2 = unit_from_bits(rng());
    const double rad = std::sqrt(-2.0 * std::log(u1));
    return std::pair{rad * std::cos(2.0 * std::numbers::pi * u2), rad * std::sin(2.0 * std::numbers::pi * u2)};
  };
  while (plan.directions.size() < num_random) {
    std::vector<double> v(num_vars);
    for (std::size_t i = 0; i < num_vars; i += 2) {
      const auto [a, b] = gaussian_pair();
      v[i] = a;
      if (i + 1 < num_vars) v[i + 1] = b;
    }
    double norm = 0.0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (auto& c : v) c /= norm;
    plan.directions.push_back(std::move(v));
  }
  plan.random_count = plan.directions.size();

  for (std::size_t i = 0; i < num_vars; ++i) {
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> v(num_vars, 0.0);
      v[i] = sgn;
      plan.directions.push_back(std::move(v));
    }
  }
  if (num_vars >= 2 && num_vars <= 12) {
    const double c = 1.0 / std::sqrt(static_cast<double>(num_vars));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << num_vars); ++mask) {
      std::vector<double> v(num_vars);
      for (std::size_t i = 0; i < num_vars; ++i) v[i] = (mask >> i) & 1u ? -c : c;
      plan.directions.push_back(std::move(v));
    }
  }
  plan.structured_count = plan.directions.size() - plan.random_count;
  return plan;
}

double SnappedExponent::value() const {
  if (infinite) return kInf;
  if (snapped) return static_cast<double>(numerator) / static_cast<double>(denominator);
  return raw;
}

std::string SnappedExponent::to_string() const {
  if (infinite) return "inf";
  if (snapped) {
    return denominator == 1 ? std::to_string(numerator)
                            : std::to_string(numerator) + "/" + std::to_string(denominator);
  }
  std::ostringstream out;
  out.precision(6);
  out << raw << " (unsnapped)";
  return out.str();
}

SnappedExponent snap_rational(double x, const SnapOptions& options) {
  SnappedExponent out;
  out.raw = x;
  if (std::isinf(x) && x > 0) {
    out.infinite = true;
    return out;
  }
  if (!std::isfinite(x)) return out;
  // Convergents h_k / k_k of the continued fraction of x.
  long h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(rest);
    if (std::abs(a_real) > 1e12) break;
    const long a = static_cast<long>(a_real);
    const long h = a * h_prev + h_prev2;
    const long k = a * k_prev + k_prev2;
    if (k > options.max_denominator) break;
    if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) <= options.tolerance) {
      out.snapped = true;
      out.numerator = h;
      out.denominator = k;
      return out;
    }
    const double frac = rest - a_real;
    if (frac < 1e-15) break;
    rest = 1.0 / frac;
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
  }
  return out;
}

GrowthFit fit_growth_exponent(const SampleFn& numerator, const SampleFn& denominator, const SamplingPlan& plan,
                              const SnapOptions& snap) {
  GrowthFit fit = summarize(per_direction_exponents(numerator, denominator, plan), snap);
  fit.constant = fit_constant(numerator, denominator, fit.snapped.value(), plan);
  fill_residual(fit);
  return fit;
}

double growth_bound_pass_rate(const SampleFn& numerator, const SampleFn& denominator, double exponent,
                              double constant, const SamplingPlan& plan) {
  std::vector<std::size_t> passed(plan.directions.size(), 0);
  parallel_for(plan.directions.size(), [&](std::size_t d) {
    for (double r : plan.radii) {
      const auto xi = point(plan.directions[d], r);
      const double n = numerator(xi);
      const double bound = constant * std::pow(1.0 + denominator(xi), exponent);
      if (n <= bound * (1.0 + 1e-9)) ++passed[d];
    }
  });
  std::size_t total = 0;
  for (auto p : passed) total += p;
  return static_cast<double>(total) / static_cast<double>(plan.directions.size() * plan.radii.size());
}

GrowthFit estimate_h(const OperatorSystem& Q, const OperatorSystem& P, const SamplingPlan& plan,
                     const SnapOptions& snap) {
  check_same_vars(Q, P);
  check_plan(P, plan);
  const auto q = compile(Q);
  const auto p = compile(P);
  if (q.empty()) {
    GrowthFit fit;
    fit.snapped = snap_rational(0.0, snap);
    fit.per_direction.assign(plan.directions.size(), 0.0);
    return fit;
  }
  return fit_growth_exponent(q, p, plan, snap);
}

GammaFit estimate_gamma(const OperatorSystem& P, const SamplingPlan& plan, int alpha_max, const SnapOptions& snap) {
  check_plan(P, plan);
  if (alpha_max < P.order()) throw std::invalid_argument("alpha_max must be at least the order m");
  const auto p = compile(P);
  const double m = P.order();

  GammaFit out;
  out.alpha_max = alpha_max;
  std::vector<double> per_dir_gamma(plan.directions.size(), m);
  bool infinite = false;
  double raw_gamma = m;

  for (const auto& alpha : multi_indices(P.num_vars(), alpha_max)) {
    const auto d = compile_derivative(P, alpha);
    const double order = total_order(alpha);
    AlphaExponent entry{alpha, -kInf, 0.0, false};
    if (!d.empty()) {
      const auto dirs = per_direction_exponents(d, p, plan);
      double e = -kInf;
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        const double ek = dirs[k];
        if (std::isnan(ek)) continue;
        e = std::max(e, ek);
        const double g = ek >= 1.0 ? kInf : order / (1.0 - ek);
        per_dir_gamma[k] = std::max(per_dir_gamma[k], g);
      }
      entry.exponent = e;
      entry.infinite_marker = (std::isinf(e) && e > 0) || (e > 0.0 && snap_rational(e, snap).value() >= 1.0);
      entry.gamma = entry.infinite_marker ? kInf : (e == -kInf ? 0.0 : order / (1.0 - e));
    }
    if (entry.infinite_marker) infinite = true;
    if (std::isfinite(entry.gamma)) raw_gamma = std::max(raw_gamma, entry.gamma);
    out.per_alpha.push_back(entry);
  }

  GrowthFit& fit = out.fit;
  fit.per_direction = std::move(per_dir_gamma);
  if (infinite) {
    fit.raw_exponent = kInf;
    fit.snapped.infinite = true;
    fit.snapped.raw = kInf;
    fit.constant = kInf;
    fit.residual = kInf;
    fit.warnings.push_back("derivative growth not dominated: condition (H) fails for every finite gamma");
    return out;
  }
  fit.raw_exponent = raw_gamma;
  fit.snapped = snap_rational(raw_gamma, snap);
  if (!fit.snapped.snapped) fit.warnings.push_back("no rational within tolerance; exponent left unsnapped");
  // Snapping may never take gamma below the order m.
  if (fit.snapped.value() < m) fit.snapped = snap_rational(m, snap);

  const double gamma = fit.snapped.value();
  double constant = 1.0;
  for (const auto& entry : out.per_alpha) {
    if (entry.exponent == -kInf) continue;
    const auto d = compile_derivative(P, entry.alpha);
    const double e = 1.0 - total_order(entry.alpha) / gamma;
    constant = std::max(constant, fit_constant(d, p, e, plan));
  }
  fit.constant = constant;
  fill_residual(fit);
  return out;
}

double gamma_bound_pass_rate(const OperatorSystem& P, double gamma, double constant, int alpha_max,
                             const SamplingPlan& plan) {
  check_plan(P, plan);
  const auto p = compile(P);
  std::vector<std::pair<CompiledSum, double>> derivs;
  for (const auto& alpha : multi_indices(P.num_vars(), alpha_max)) {
    auto d = compile_derivative(P, alpha);
    if (!d.empty()) derivs.emplace_back(std::move(d), 1.0 - total_order(alpha) / gamma);
  }
  std::vector<std::size_t> passed(plan.directions.size(), 0);
  parallel_for(plan.directions.size(), [&](std::size_t k) {
    for (double r : plan.radii) {
      const auto xi = point(plan.directions[k], r);
      const double base = 1.0 + p(xi);
      bool ok = true;
      for (const auto& [d, e] : derivs) {
        if (d(xi) > constant * std::pow(base, e) * (1.0 + 1e-9)) {
          ok = false;
          break;
        }
      }
      if (ok) ++passed[k];
    }
  });
  std::size_t total = 0;
  for (auto n : passed) total += n;
  return static_cast<double>(total) / static_cast<double>(plan.directions.size() * plan.radii.size());
}

EllipticReport check_elliptic(const OperatorSystem& P, const SamplingPlan& plan, const SnapOptions& snap) {
  check_plan(P, plan);
  const std::size_t n = P.num_vars();
  const int m = P.order();
  const auto p = compile(P);
  EllipticReport report;

  const SampleFn norm_power = [m](std::span<const double> xi) {
    double s = 0.0;
    for (double c : xi) s += std::abs(c);
    return std::pow(s, m);
  };
  report.asymptotic = fit_growth_exponent(norm_power, p, plan, snap);
  const auto& e = report.asymptotic.snapped;
  report.asymptotic_test = !e.infinite && e.value() <= 1.0 + 1e-12;

  // Sphere test on the l1 unit sphere: structured points, then random ones.
  std::vector<MultiPoly> principal;
  for (const auto& q : P.polys()) principal.push_back(q.principal_part(m));
  const auto pp = compile(principal);
  std::vector<std::vector<double>> points;
  for (const auto& dir : plan.directions) {
    double s = 0.0;
    for (double c : dir) s += std::abs(c);
    auto v = dir;
    for (auto& c : v) c /= s;
    points.push_back(std::move(v));
  }
  const std::size_t target = std::max<std::size_t>(10000, points.size());
  std::mt19937_64 rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
  while (points.size() < target) {
    std::vector<double> v(n);
    double s = 0.0;
    for (auto& c : v) {
      const std::uint64_t bits = rng();
      c = -std::log(unit_from_bits(bits) + 0x1.0p-54);
      if (bits & 1u) c = -c;
      s += std::abs(c);
    }
    for (auto& c : v) c /= s;
    points.push_back(std::move(v));
  }
  std::vector<double> values(points.size());
  parallel_for(points.size(), [&](std::size_t k) { values[k] = pp(points[k]); });
  report.sphere_points = points.size();
  report.margin = *std::min_element(values.begin(), values.end());
  report.sphere_max = *std::max_element(values.begin(), values.end());
  report.sphere_test = report.sphere_max > 0.0 && report.margin > 1e-6 * report.sphere_max;

  std::ostringstream diag;
  if (report.asymptotic_test == report.sphere_test) {
    report.elliptic = report.sphere_test ? Verdict::kPass : Verdict::kFail;
  } else {
    report.elliptic = Verdict::kInconclusive;
    diag << "asymptotic exponent " << e.to_string() << " and sphere margin " << report.margin
         << " disagree; try more radii or directions";
  }
  report.diagnostics = diag.str();
  return report;
}

StrengthReport compare_strength(const OperatorSystem& P, const OperatorSystem& Q, const SamplingPlan& plan,
                                const SnapOptions& snap) {
  check_same_vars(P, Q);
  StrengthReport report;
  report.q_weaker_than_p = estimate_h(Q, P, plan, snap);
  report.p_weaker_than_q = estimate_h(P, Q, plan, snap);
  auto is_one = [](const SnappedExponent& s) {
    return !s.infinite && s.snapped && s.numerator == 1 && s.denominator == 1;
  };
  report.one_equally_strong = is_one(report.q_weaker_than_p.snapped) && is_one(report.p_weaker_than_q.snapped);
  if (report.one_equally_strong) {
    report.consistency_checked = true;
    report.gamma_p = estimate_gamma(P, plan, std::max(P.order(), Q.order()), snap).fit.snapped;
    report.gamma_q = estimate_gamma(Q, plan, std::max(P.order(), Q.order()), snap).fit.snapped;
    const bool orders = P.order() == Q.order();
    const bool gammas = !report.gamma_p.infinite && !report.gamma_q.infinite &&
                        std::abs(report.gamma_p.value() - report.gamma_q.value()) <= snap.tolerance;
    report.consistency_ok = orders && gammas;
    if (!report.consistency_ok) {
      report.diagnostics = "1-equally strong systems must share order and gamma: m=" + std::to_string(P.order()) +
                           " r=" + std::to_string(Q.order()) + " gamma_P=" + report.gamma_p.to_string() +
                           " gamma_Q=" + report.gamma_q.to_string();
    }
  }
  return report;
}

}  // namespace iterlab
