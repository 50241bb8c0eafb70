#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace iterlab {

class WeightFunction;

struct GevreyWeight {
  double s;  // omega(t) = t^{1/s}
};

/// omega(t) = (log(1+t))^p, p > 1.
struct LogPowerWeight {
  double p;
};

/// sigma(t) = base(t^a).
struct RescaledWeight {
  std::shared_ptr<const WeightFunction> base;
  double a;
};

/// Piecewise-linear interpolation of (t, omega(t)) samples. Beyond the last
/// sample phi(x) = omega(e^x) is extended linearly in x.
struct TabulatedWeight {
  std::vector<double> t;
  std::vector<double> values;
};

/// A weight omega: [0, inf) -> [0, inf), always normalized to vanish on [0, 1].
///
/// Raw kinds are clamped at construction time: omega(t) = max(0, raw(t) - raw(1))
/// for t > 1 and 0 on [0, 1]. For Gevrey(s) this is max(0, t^{1/s} - 1).
/// Rescaled weights evaluate base(t^a) exactly, so the conjugate identity
/// phi*_sigma(y) = phi*_omega(y/a) is a functional identity, not an approximation.
class WeightFunction {
 public:
  using Kind = std::variant<GevreyWeight, LogPowerWeight, RescaledWeight, TabulatedWeight>;

  static WeightFunction gevrey(double s);
  static WeightFunction log_power(double p);
  static WeightFunction tabulated(std::vector<double> t, std::vector<double> values);
  /// Two-column text, one `t omega(t)` pair per line.
  static WeightFunction tabulated_from_text(const std::string& text);

  const Kind& kind() const { return kind_; }
  std::string describe() const;

  /// omega(t); throws std::domain_error for t < 0.
  double operator()(double t) const;
  /// phi(x) = omega(e^x), evaluated without forming e^x where possible.
  double phi(double x) const;

 private:
  explicit WeightFunction(Kind kind);
  double raw(double t) const;

  Kind kind_;
  double raw_at_one_ = 0.0;

  friend WeightFunction rescale_weight(const WeightFunction& w, double a);
};

double omega_eval(const WeightFunction& w, double t);

/// sigma(t) = w(t^a); a must be positive.
WeightFunction rescale_weight(const WeightFunction& w, double a);

/// Maximizes a concave function f on [0, inf): scans `grid_size` points
/// (0 plus a geometric grid up to x_hint), extends the range while the
/// maximizer sits on the last grid point, then refines the bracket around
/// the best grid point by golden-section search.
double sup_concave(const std::function<double(double)>& f, double x_hint, std::size_t grid_size = 4096);

/// Young conjugate phi*(y) = sup_{x >= 0} (y x - phi(x)) of phi(x) = omega(e^x).
///
/// phi is tabulated once on the default x-grid at construction; each query
/// scans the cached grid and refines with golden-section search, so one
/// instance can be shared read-only by many workers.
class YoungConjugate {
 public:
  explicit YoungConjugate(WeightFunction w, std::size_t grid_size = 4096, double x_max = 64.0);

  const WeightFunction& weight() const { return weight_; }
  double operator()(double y) const;
  /// lambda * phi*(j / lambda)
  double scaled(double j, double lambda) const;

 private:
  WeightFunction weight_;
  std::vector<double> xs_;
  std::vector<double> phis_;
};

double young_conjugate(const WeightFunction& w, double y);

/// phi* sampled on an increasing y-grid.
struct ConjugateTable {
  std::vector<double> y;
  std::vector<double> values;
};

ConjugateTable conjugate_table(const YoungConjugate& conj, std::vector<double> ys);

struct ConjugateShapeReport {
  double min_second_difference;  // normalized by the local value scale
  bool convex;
  bool increasing;
  bool ratio_nondecreasing;  // phi*(y)/y
  bool zero_at_origin;
};

ConjugateShapeReport check_conjugate_shape(const ConjugateTable& table, double tol = 1e-9);

/// (phi*)*(x) recomputed by the same grid-sup machinery.
double biconjugate(const YoungConjugate& conj, double x);

enum class Verdict { kPass, kFail, kInconclusive };
std::string to_string(Verdict v);

struct AxiomResult {
  Verdict verdict = Verdict::kInconclusive;
  double value = 0.0;  // fitted constant or margin, see field docs
  std::string note;
};

struct WeightAxiomReport {
  AxiomResult alpha;        // value: L with omega(2t) <= L (omega(t) + 1)
  AxiomResult beta;         // value: estimate of int_1^inf omega(t)/t^2 dt (inf when divergent)
  AxiomResult gamma;        // value: omega(t_max) / log(t_max)
  AxiomResult gamma_prime;  // value: b; see gamma_prime_a
  double gamma_prime_a = 0.0;
  AxiomResult delta;        // value: number of convexity violations of phi
  AxiomResult bmm;          // value: H with 2 omega(t) <= omega(H t) + H
  double l_tilde = 1.0;     // omega(e t) <= L~ (1 + omega(t))
  double l_prime = 1.0;     // omega(u + v) <= L' (omega(u) + omega(v) + 1)

  bool non_quasianalytic_weight() const;
};

WeightAxiomReport check_weight_axioms(const WeightFunction& w, double t_max = 1e6);

struct LemmaJReport {
  double log_sup = 0.0;    // log max_{0<=j<=j_max} t^j exp(-lambda phi*(h j / lambda))
  double log_lower = 0.0;  // lambda omega(t^{1/h}) - log t
  double log_upper = 0.0;  // lambda omega(t^{1/h})
  long argmax_j = 0;
  long j_max = 0;
  Verdict verdict = Verdict::kInconclusive;
};

/// Two-sided bound (1/t) e^{lambda omega(t^{1/h})} <= sup_j t^j e^{-lambda phi*(hj/lambda)}
/// <= e^{lambda omega(t^{1/h})}, checked in the log domain with relative slack.
/// The sequence is log-concave in j, so the max over 0..j_max is located by
/// integer ternary search and certified by a decreasing tail at j_max.
LemmaJReport check_lemma_J(const YoungConjugate& conj, double h, double lambda, double t, long j_max,
                           double rel_slack = 1e-6);
LemmaJReport check_lemma_J(const WeightFunction& w, double h, double lambda, double t, long j_max,
                           double rel_slack = 1e-6);

struct ShiftConstants {
  double lambda_prime = 0.0;
  double log_D = 0.0;
  long shift_steps = 0;  // [log rho + 1], clamped at 0
  long j_checked = 0;
  double worst_margin = 0.0;  // min over j of (rhs - lhs) in log domain
  bool holds = false;
};

/// lambda' = lambda / L~^{[log rho + 1]}, D = exp(lambda [log rho + 1]), and a
/// termwise log-domain check of rho^j e^{lambda phi*(j/lambda)} <= D e^{lambda' phi*(j/lambda')}.
ShiftConstants shift_constants(const YoungConjugate& conj, double rho, double lambda, double l_tilde,
                               long j_max = 500);

struct ProductRuleReport {
  double worst_margin = 0.0;
  long pairs_checked = 0;
  bool holds = false;
};

/// e^{lambda phi*(j/lambda) + lambda phi*(k/lambda)} <= e^lambda e^{(lambda/L') phi*((j+k)/(lambda/L'))}
/// on 0 <= j, k <= jk_max.
ProductRuleReport check_product_rule(const YoungConjugate& conj, double lambda, double l_prime, long jk_max);

}  // namespace iterlab
