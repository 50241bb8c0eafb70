#pragma once

#include "iterlab/polynomial.hpp"
#include "iterlab/weight.hpp"

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iterlab {

using Complex = std::complex<double>;

/// Axis-aligned compact box K = prod [lower_i, upper_i].
class Box {
 public:
  Box(std::vector<double> lower, std::vector<double> upper);
  static Box cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double volume() const;
  bool contains(const Box& other) const;

 private:
  std::vector<double> lower_, upper_;
};

/// c * 2^exp2 * e^{i<x, xi>}
struct PlaneWave {
  std::vector<double> xi;
  Complex mantissa{1.0, 0.0};
  std::int64_t exp2 = 0;
};

/// 2^exp2 * (sum_e coeffs[e] x^e) * e^{-scale |x|^2}
struct PolyGaussian {
  std::map<MultiIndex, Complex> coeffs;
  std::int64_t exp2 = 0;
  double scale = 1.0;
};

/// Finite sum of plane waves, or finite sum of polynomial-Gaussians.
///
/// The family is closed under constant-coefficient operators. Mixing the two
/// kinds in one sum is rejected (their cross terms have no closed-form norm here).
class TestFunction {
 public:
  explicit TestFunction(std::size_t dim) : dim_(dim) {}

  static TestFunction plane_wave(std::vector<double> xi, Complex c = 1.0);
  static TestFunction poly_gaussian(const MultiPoly& poly, double scale);

  std::size_t dim() const { return dim_; }
  const std::vector<PlaneWave>& waves() const { return waves_; }
  const std::vector<PolyGaussian>& gaussians() const { return gaussians_; }
  bool is_zero() const;

  TestFunction& operator+=(const TestFunction& other);
  friend TestFunction operator+(TestFunction a, const TestFunction& b) { return a += b; }
  TestFunction scaled(Complex c) const;

  /// Pointwise value; for tests and quadrature cross-checks.
  Complex eval(std::span<const double> x) const;

  std::string describe() const;

 private:
  friend TestFunction apply_operator(const MultiPoly& op, const TestFunction& u);

  std::size_t dim_;
  std::vector<PlaneWave> waves_;
  std::vector<PolyGaussian> gaussians_;
};

/// P(D)u with D_j = -i d/dx_j.
TestFunction apply_operator(const MultiPoly& op, const TestFunction& u);

/// P^beta u = P_1(D)^{beta_1} ... P_N(D)^{beta_N} u; beta = 0 returns u.
/// Throws std::overflow_error naming beta if the representation overflows.
TestFunction apply_iterate(const OperatorSystem& P, const MultiIndex& beta, const TestFunction& u);

/// int_a^b x^k e^{-c x^2} dx for k = 0..k_max.
std::vector<double> gaussian_moments(int k_max, double a, double b, double c);

struct NormOptions {
  /// Recompute by adaptive Gauss-Kronrod and throw if the two disagree
  /// beyond `cross_check_tol` relative.
  bool cross_check = false;
  double cross_check_tol = 1e-8;
};

/// log ||u||_{L^2(K)}; -inf for u = 0.
double l2_norm_on_box(const TestFunction& u, const Box& K, const NormOptions& options = {});

/// log ||P^beta u||_{L^2(K)} for every |beta| <= b_max.
struct NormTable {
  std::size_t num_ops = 0;
  int b_max = 0;
  std::map<MultiIndex, double> log_norms;

  double at(const MultiIndex& beta) const { return log_norms.at(beta); }
  /// max over |beta| = l of the log-norm, for l = 0..b_max.
  std::vector<double> shell_max() const;
  /// `beta_1,...,beta_N,log_norm` rows in graded order.
  std::string to_csv() const;
};

int default_b_max(std::size_t num_ops);

NormTable iterate_norm_table(const OperatorSystem& P, const TestFunction& u, const Box& K, int b_max,
                             const NormOptions& options = {});

struct SeminormResult {
  double log_value = 0.0;  // -inf for u = 0
  bool plateau = false;
  bool tail_increasing = false;
  int argmax_shell = 0;
  std::vector<double> shell_values;  // log-norm - lambda phi*(l m / lambda)
  std::string hint;
};

/// sup_beta log ||P^beta u|| - lambda phi*(|beta| m / lambda), with the
/// plateau criterion: the last 20% of shells strictly decreasing.
SeminormResult seminorm(const NormTable& table, int m, double lambda, const YoungConjugate& conj);
SeminormResult seminorm(const OperatorSystem& P, const TestFunction& u, const Box& K, double lambda,
                        const WeightFunction& w, int b_max = 0);

enum class ClassMode { kBeurling, kRoumieu };
enum class Membership { kMember, kNonMember, kInconclusive };
std::string to_string(ClassMode mode);
std::string to_string(Membership m);

inline const std::vector<double> kBeurlingLadder{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
inline const std::vector<double> kRoumieuLadder{1.0, 0.5, 0.25, 0.125};

struct ClassifyReport {
  Membership verdict = Membership::kInconclusive;
  ClassMode mode = ClassMode::kBeurling;
  std::vector<std::pair<double, SeminormResult>> ladder;
  /// Largest lambda in {1/8, ..., 8} whose seminorm plateaus; NaN if none.
  double lambda_star = 0.0;
  std::string hint;
};

ClassifyReport classify_membership(const NormTable& table, const WeightFunction& w, int m, ClassMode mode);

struct NamedFunction {
  std::string name;
  TestFunction function;
};

struct InclusionEntry {
  std::string name;
  ClassifyReport p_class;
  std::optional<ClassifyReport> q_class;  // only computed for P-class members
  bool violation = false;
  std::string diagnostics;
};

struct InclusionReport {
  WeightFunction omega_prime;
  WeightFunction sigma_prime;
  double gamma_p = 0.0;
  std::vector<InclusionEntry> entries;
  std::size_t violations = 0;
  std::vector<std::string> warnings;
};

struct InclusionOptions {
  ClassMode mode = ClassMode::kBeurling;
  std::optional<double> gamma_p;  // estimated from P when absent
  int b_max_p = 0;                // 0: default for the system size
  int b_max_q = 0;
};

/// E^P_{omega'} subset of E^Q_{sigma'} with omega'(t) = w(t^{1/s}) and
/// sigma'(t) = w(t^{r/(s m h)}), checked function by function.
InclusionReport verify_inclusion(const OperatorSystem& P, const OperatorSystem& Q, const WeightFunction& w, double s,
                                 double h, const std::vector<NamedFunction>& testset, const Box& K,
                                 const InclusionOptions& options = {});

}  // namespace iterlab
