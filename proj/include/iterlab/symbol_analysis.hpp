#pragma once

#include "iterlab/polynomial.hpp"
#include "iterlab/weight.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace iterlab {

/// Rays xi = r * theta used to probe asymptotic polynomial growth.
///
/// Directions are unit vectors in l2: `random_count` Gaussian-sampled ones
/// (deterministic in the seed), then the coordinate axes +-e_i, then every
/// sign pattern of (1, ..., 1)/sqrt(n). Radii are log-spaced.
struct SamplingPlan {
  std::size_t num_vars = 0;
  std::vector<double> radii;
  std::vector<std::vector<double>> directions;
  std::uint64_t seed = 0;
  std::size_t random_count = 0;
  std::size_t structured_count = 0;

  static SamplingPlan make(std::size_t num_vars, std::uint64_t seed, std::size_t num_radii = 40,
                           std::size_t num_random = 256, double r_min = 10.0, double r_max = 1e6);
};

struct SnapOptions {
  long max_denominator = 12;
  double tolerance = 0.05;
};

/// A fitted exponent: +infinity, a small-denominator rational, or an
/// unsnapped real when no continued-fraction convergent is close enough.
struct SnappedExponent {
  bool infinite = false;
  bool snapped = false;
  long numerator = 0;
  long denominator = 1;
  double raw = 0.0;

  double value() const;
  std::string to_string() const;
};

/// First continued-fraction convergent of x (smallest denominator) within
/// `tolerance`, restricted to denominators <= max_denominator.
SnappedExponent snap_rational(double x, const SnapOptions& options = {});

inline constexpr const char* kNumericCaveat =
    "numeric estimate from ray sampling; not a semi-algebraic proof";

struct GrowthFit {
  double raw_exponent = 0.0;
  SnappedExponent snapped;
  double constant = 1.0;  // C >= 1 with numerator <= C (1 + denominator)^snapped on the samples
  double residual = 0.0;  // RMS of per-direction exponents about the snapped value
  std::vector<double> per_direction;  // NaN when a direction gives no usable slope, +inf for the marker
  std::vector<std::string> warnings;
  std::string caveat = kNumericCaveat;
};

using SampleFn = std::function<double(std::span<const double>)>;

/// Exponent e with numerator(xi) <= C (1 + denominator(xi))^e asymptotically.
///
/// Per direction, the exponent is the largest local log-log slope
/// d log(numerator) / d log(1 + denominator) among consecutive radii in the
/// top decile. Samples with log(1 + denominator) < 2 are skipped for slopes;
/// a direction whose denominator stays bounded while the numerator grows
/// yields the infinity marker.
GrowthFit fit_growth_exponent(const SampleFn& numerator, const SampleFn& denominator, const SamplingPlan& plan,
                              const SnapOptions& snap = {});

/// Fraction of plan samples with numerator <= C (1 + denominator)^exponent.
double growth_bound_pass_rate(const SampleFn& numerator, const SampleFn& denominator, double exponent,
                              double constant, const SamplingPlan& plan);

/// Q <_h P: sum |Q_j| <= C (1 + sum |P_j|)^h.
GrowthFit estimate_h(const OperatorSystem& Q, const OperatorSystem& P, const SamplingPlan& plan,
                     const SnapOptions& snap = {});

struct AlphaExponent {
  MultiIndex alpha;
  double exponent;  // e_alpha; -inf when the derivative vanishes identically
  double gamma;     // |alpha| / (1 - e_alpha), +inf when e_alpha >= 1
  bool infinite_marker = false;
};

struct GammaFit {
  GrowthFit fit;  // raw_exponent/snapped hold gamma_P
  std::vector<AlphaExponent> per_alpha;
  int alpha_max = 0;
};

/// Condition (H) exponent: the smallest gamma >= m with
/// sum_j |P_j^{(alpha)}| <= C (1 + sum_j |P_j|)^{1 - |alpha|/gamma}.
GammaFit estimate_gamma(const OperatorSystem& P, const SamplingPlan& plan, int alpha_max,
                        const SnapOptions& snap = {});

/// Fraction of samples satisfying the condition-(H) inequality for all
/// 1 <= |alpha| <= alpha_max at the given gamma and C.
double gamma_bound_pass_rate(const OperatorSystem& P, double gamma, double constant, int alpha_max,
                             const SamplingPlan& plan);

struct EllipticReport {
  Verdict elliptic = Verdict::kInconclusive;  // pass = elliptic
  bool asymptotic_test = false;
  bool sphere_test = false;
  double margin = 0.0;  // min of sum_j |principal part of P_j| on the l1 unit sphere
  double sphere_max = 0.0;
  std::size_t sphere_points = 0;
  GrowthFit asymptotic;
  std::string diagnostics;
};

/// |xi|^m <= C (1 + sum_j |P_j(xi)|) with |xi| = sum_i |xi_i|, checked both by
/// ray sampling and by the minimum of the principal symbols on the unit sphere.
EllipticReport check_elliptic(const OperatorSystem& P, const SamplingPlan& plan, const SnapOptions& snap = {});

struct StrengthReport {
  GrowthFit q_weaker_than_p;  // h with Q <_h P
  GrowthFit p_weaker_than_q;  // h with P <_h Q
  bool one_equally_strong = false;
  bool consistency_checked = false;
  bool consistency_ok = true;  // m = r and gamma_P = gamma_Q when 1-equally strong
  SnappedExponent gamma_p;
  SnappedExponent gamma_q;
  std::string diagnostics;
};

StrengthReport compare_strength(const OperatorSystem& P, const OperatorSystem& Q, const SamplingPlan& plan,
                                const SnapOptions& snap = {});

}  // namespace iterlab
