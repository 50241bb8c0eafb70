#include "iterlab/iterates.hpp"

#include "iterlab/parallel.hpp"
#include "iterlab/symbol_analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace iterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

using LComplex = std::complex<long double>;

std::string format_index(const MultiIndex& beta) {
  std::string out = "(";
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(beta[i]);
  }
  return out + ")";
}

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

// Pulls the binary exponent of the largest coefficient into exp2.
void renormalize(PolyGaussian& g) {
  double biggest = 0.0;
  for (auto it = g.coeffs.begin(); it != g.coeffs.end();) {
    if (it->second == Complex{}) {
      it = g.coeffs.erase(it);
      continue;
    }
    biggest = std::max({biggest, std::abs(it->second.real()), std::abs(it->second.imag())});
    ++it;
  }
  if (biggest == 0.0) return;
  int e = 0;
  std::frexp(biggest, &e);
  for (auto& [k, c] : g.coeffs) c = {std::ldexp(c.real(), -e), std::ldexp(c.imag(), -e)};
  g.exp2 += e;
}

void renormalize(PlaneWave& w) {
  const double biggest = std::max(std::abs(w.mantissa.real()), std::abs(w.mantissa.imag()));
  if (biggest == 0.0) return;
  int e = 0;
  std::frexp(biggest, &e);
  w.mantissa = {std::ldexp(w.mantissa.real(), -e), std::ldexp(w.mantissa.imag(), -e)};
  w.exp2 += e;
}

Complex shifted(Complex c, std::int64_t shift) {
  const int s = static_cast<int>(std::clamp<std::int64_t>(shift, -100000, 100000));
  return {std::ldexp(c.real(), s), std::ldexp(c.imag(), s)};
}

using CoeffMap = std::map<MultiIndex, Complex>;

// d/dx_d of poly * e^{-scale |x|^2}, as a polynomial factor.
CoeffMap partial(const CoeffMap& poly, std::size_t d, double scale) {
  CoeffMap out;
  for (const auto& [e, c] : poly) {
    if (e[d] > 0) {
      MultiIndex lower = e;
      --lower[d];
      out[lower] += c * static_cast<double>(e[d]);
    }
    MultiIndex upper = e;
    ++upper[d];
    out[upper] += c * (-2.0 * scale);
  }
  return out;
}

// (-i)^k
Complex minus_i_power(unsigned k) {
  switch (k % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

PolyGaussian apply_to_gaussian(const MultiPoly& op, const PolyGaussian& g) {
  std::map<MultiIndex, CoeffMap> memo;
  const std::size_t n = op.num_vars();
  std::function<const CoeffMap&(const MultiIndex&)> deriv = [&](const MultiIndex& alpha) -> const CoeffMap& {
    if (auto it = memo.find(alpha); it != memo.end()) return it->second;
    std::size_t d = 0;
    while (d < n && alpha[d] == 0) ++d;
    if (d == n) return memo.emplace(alpha, g.coeffs).first->second;
    MultiIndex prev = alpha;
    --prev[d];
    CoeffMap next = partial(deriv(prev), d, g.scale);
    return memo.emplace(alpha, std::move(next)).first->second;
  };
  PolyGaussian out;
  out.scale = g.scale;
  out.exp2 = g.exp2;
  for (const auto& [alpha, c] : op.terms()) {
    const Complex factor = minus_i_power(total_order(alpha)) * static_cast<double>(c);
    for (const auto& [e, v] : deriv(alpha)) out.coeffs[e] += factor * v;
  }
  renormalize(out);
  return out;
}

// 1-D moments int_0^B x^k e^{-c x^2} dx for B >= 0, k = 0..k_max.
std::vector<long double> half_moments(int k_max, long double B, long double c) {
  std::vector<long double> G(static_cast<std::size_t>(k_max) + 1, 0.0L);
  if (B == 0.0L) return G;
  const long double x = c * B * B;
  const long double sc = std::sqrt(c);
  G[0] = std::sqrt(std::numbers::pi_v<long double>) / (2.0L * sc) * boost::math::erf(sc * B);
  if (k_max >= 1) G[1] = -std::expm1(-x) / (2.0L * c);
  const long double log_b = std::log(B);
  for (int k = 2; k <= k_max; ++k) {
    if (k - 1 <= 2.0L * x) {
      // upward integration by parts; stable while the integrand peaks inside [0, B]
      const long double boundary = std::exp((k - 1) * log_b - x);
      G[k] = ((k - 1) * G[k - 2] - boundary) / (2.0L * c);
    } else {
      const long double s = (k + 1) / 2.0L;
      G[k] = std::exp(std::lgamma(s) - s * std::log(c) - std::numbers::ln2_v<long double>) *
             boost::math::gamma_p(s, x);
    }
  }
  return G;
}

std::vector<long double> moments_ld(int k_max, long double a, long double b, long double c) {
  auto signed_half = [&](long double end) {
    auto G = half_moments(k_max, std::abs(end), c);
    if (end < 0.0L) {
      // int_0^{-B} = (-1)^{k+1} int_0^B
      for (std::size_t k = 0; k < G.size(); ++k) {
        if (k % 2 == 0) G[k] = -G[k];
      }
    }
    return G;
  };
  const auto hi = signed_half(b);
  const auto lo = signed_half(a);
  std::vector<long double> out(hi.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = hi[k] - lo[k];
  return out;
}

// int_a^b e^{i delta x} dx
Complex oscillatory(double delta, double a, double b) {
  if (delta == 0.0) return b - a;
  const double half = 0.5 * delta * (b - a);
  return std::polar(2.0 * std::sin(half) / delta, 0.5 * delta * (a + b));
}

double plane_wave_log_norm(const std::vector<PlaneWave>& waves, const Box& K) {
  if (waves.size() == 1) {
    const auto& w = waves.front();
    return std::log(std::abs(w.mantissa)) + static_cast<double>(w.exp2) * kLn2 + 0.5 * std::log(K.volume());
  }
  std::int64_t top = std::numeric_limits<std::int64_t>::min();
  for (const auto& w : waves) top = std::max(top, w.exp2);
  std::vector<Complex> a;
  for (const auto& w : waves) a.push_back(shifted(w.mantissa, w.exp2 - top));
  LComplex sum = 0.0L;
  for (std::size_t k = 0; k < waves.size(); ++k) {
    for (std::size_t l = 0; l < waves.size(); ++l) {
      Complex integral = 1.0;
      for (std::size_t d = 0; d < K.dim(); ++d) {
        integral *= oscillatory(waves[k].xi[d] - waves[l].xi[d], K.lower()[d], K.upper()[d]);
      }
      const Complex term = a[k] * std::conj(a[l]) * integral;
      sum += LComplex(term.real(), term.imag());
    }
  }
  const double sq = static_cast<double>(sum.real());
  if (sq <= 0.0) return -kInf;
  return static_cast<double>(top) * kLn2 + 0.5 * std::log(sq);
}

double gaussian_log_norm(const std::vector<PolyGaussian>& terms, const Box& K) {
  const std::size_t n = K.dim();
  std::int64_t top = std::numeric_limits<std::int64_t>::min();
  for (const auto& g : terms) top = std::max(top, g.exp2);

  long double total = 0.0L;
  for (std::size_t p = 0; p < terms.size(); ++p) {
    for (std::size_t q = 0; q < terms.size(); ++q) {
      const auto& g = terms[p];
      const auto& f = terms[q];
      std::vector<unsigned> deg(n, 0);
      for (const auto* t : {&g, &f}) {
        for (const auto& [e, c] : t->coeffs) {
          for (std::size_t d = 0; d < n; ++d) deg[d] = std::max(deg[d], e[d]);
        }
      }
      // Flattened accumulation of sum_{e+f=k} c_e conj(c_f).
      std::vector<std::size_t> stride(n, 1);
      std::size_t size = 1;
      for (std::size_t d = 0; d < n; ++d) {
        stride[d] = size;
        size *= 2 * deg[d] + 1;
      }
      std::vector<LComplex> S(size);
      const long double wg = std::ldexp(1.0L, static_cast<int>(g.exp2 - top));
      const long double wf = std::ldexp(1.0L, static_cast<int>(f.exp2 - top));
      for (const auto& [e, ce] : g.coeffs) {
        const LComplex a(ce.real() * wg, ce.imag() * wg);
        std::size_t base = 0;
        for (std::size_t d = 0; d < n; ++d) base += e[d] * stride[d];
        for (const auto& [h, ch] : f.coeffs) {
          std::size_t idx = base;
          for (std::size_t d = 0; d < n; ++d) idx += h[d] * stride[d];
          S[idx] += a * LComplex(ch.real() * wf, -ch.imag() * wf);
        }
      }
      std::vector<std::vector<long double>> M(n);
      for (std::size_t d = 0; d < n; ++d) {
        M[d] = moments_ld(static_cast<int>(2 * deg[d]), K.lower()[d], K.upper()[d],
                          static_cast<long double>(g.scale) + f.scale);
      }
      for (std::size_t idx = 0; idx < size; ++idx) {
        if (S[idx] == LComplex{}) continue;
        long double prod = 1.0L;
        std::size_t rest = idx;
        for (std::size_t d = 0; d < n; ++d) {
          prod *= M[d][rest % (2 * deg[d] + 1)];
          rest /= 2 * deg[d] + 1;
        }
        total += S[idx].real() * prod;
      }
    }
  }
  if (!(total > 0.0L)) throw std::runtime_error("L2 norm lost to cancellation");
  return static_cast<double>(top) * kLn2 + 0.5 * static_cast<double>(std::log(total));
}

// |u(x)|^2 * 2^{-2 top}, for the quadrature cross-check.
double scaled_square(const TestFunction& u, std::int64_t top, std::span<const double> x) {
  Complex v{};
  for (const auto& w : u.waves()) {
    double phase = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) phase += w.xi[d] * x[d];
    v += shifted(w.mantissa, w.exp2 - top) * std::polar(1.0, phase);
  }
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  for (const auto& g : u.gaussians()) {
    Complex p{};
    for (const auto& [e, c] : g.coeffs) {
      double mono = 1.0;
      for (std::size_t d = 0; d < x.size(); ++d) mono *= std::pow(x[d], static_cast<int>(e[d]));
      p += c * mono;
    }
    v += shifted(p, g.exp2 - top) * std::exp(-g.scale * r2);
  }
  return std::norm(v);
}

double quadrature_log_norm(const TestFunction& u, const Box& K) {
  std::int64_t top = std::numeric_limits<std::int64_t>::min();
  for (const auto& w : u.waves()) top = std::max(top, w.exp2);
  for (const auto& g : u.gaussians()) top = std::max(top, g.exp2);
  std::vector<double> x(K.dim());
  std::function<double(std::size_t)> integrate = [&](std::size_t d) -> double {
    if (d == K.dim()) return scaled_square(u, top, x);
    auto f = [&](double t) {
      x[d] = t;
      return integrate(d + 1);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, K.lower()[d], K.upper()[d], 15, 1e-13);
  };
  const double sq = integrate(0);
  if (!(sq > 0.0)) return -kInf;
  return static_cast<double>(top) * kLn2 + 0.5 * std::log(sq);
}

std::vector<MultiIndex> shell(std::size_t parts, unsigned total) {
  std::vector<MultiIndex> out;
  MultiIndex a(parts, 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i + 1 == parts) {
      a[i] = left;
      out.push_back(a);
      return;
    }
    for (unsigned k = left + 1; k-- > 0;) {
      a[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, total);
  return out;
}

}  // namespace

Box::Box(std::vector<double> lower, std::vector<double> upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty()) throw std::invalid_argument("box bounds must have equal nonzero length");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw std::invalid_argument("box needs finite a_i < b_i in every dimension");
    }
  }
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower_.size(); ++i) v *= upper_[i] - lower_[i];
  return v;
}

bool Box::contains(const Box& other) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.lower_[i] < lower_[i] || other.upper_[i] > upper_[i]) return false;
  }
  return true;
}

TestFunction TestFunction::plane_wave(std::vector<double> xi, Complex c) {
  if (xi.empty()) throw std::invalid_argument("plane wave needs a frequency vector");
  TestFunction u(xi.size());
  if (c == Complex{}) return u;
  PlaneWave w{std::move(xi), c, 0};
  renormalize(w);
  u.waves_.push_back(std::move(w));
  return u;
}

TestFunction TestFunction::poly_gaussian(const MultiPoly& poly, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("Gaussian scale must be positive");
  TestFunction u(poly.num_vars());
  if (poly.is_zero()) return u;
  PolyGaussian g;
  g.scale = scale;
  for (const auto& [e, c] : poly.terms()) g.coeffs[e] = static_cast<double>(c);
  renormalize(g);
  u.gaussians_.push_back(std::move(g));
  return u;
}

bool TestFunction::is_zero() const { return waves_.empty() && gaussians_.empty(); }

TestFunction& TestFunction::operator+=(const TestFunction& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("test functions have different dimensions");
  if ((!waves_.empty() && !other.gaussians_.empty()) || (!gaussians_.empty() && !other.waves_.empty())) {
    throw std::invalid_argument("sums mixing plane waves and polynomial-Gaussians are not supported");
  }
  for (const auto& w : other.waves_) {
    auto it = std::find_if(waves_.begin(), waves_.end(), [&](const PlaneWave& v) { return v.xi == w.xi; });
    if (it == waves_.end()) {
      waves_.push_back(w);
      continue;
    }
    const std::int64_t top = std::max(it->exp2, w.exp2);
    it->mantissa = shifted(it->mantissa, it->exp2 - top) + shifted(w.mantissa, w.exp2 - top);
    it->exp2 = top;
    if (it->mantissa == Complex{}) {
      waves_.erase(it);
    } else {
      renormalize(*it);
    }
  }
  for (const auto& g : other.gaussians_) {
    auto it = std::find_if(gaussians_.begin(), gaussians_.end(),
                           [&](const PolyGaussian& h) { return h.scale == g.scale; });
    if (it == gaussians_.end()) {
      gaussians_.push_back(g);
      continue;
    }
    const std::int64_t top = std::max(it->exp2, g.exp2);
    for (auto& [e, c] : it->coeffs) c = shifted(c, it->exp2 - top);
    for (const auto& [e, c] : g.coeffs) it->coeffs[e] += shifted(c, g.exp2 - top);
    it->exp2 = top;
    renormalize(*it);
    if (it->coeffs.empty()) gaussians_.erase(it);
  }
  return *this;
}

TestFunction TestFunction::scaled(Complex c) const {
  TestFunction out(dim_);
  if (c == Complex{}) return out;
  out.waves_ = waves_;
  out.gaussians_ = gaussians_;
  for (auto& w : out.waves_) {
    w.mantissa *= c;
    renormalize(w);
  }
  for (auto& g : out.gaussians_) {
    for (auto& [e, v] : g.coeffs) v *= c;
    renormalize(g);
  }
  return out;
}

Complex TestFunction::eval(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("evaluation point has wrong dimension");
  Complex v{};
  for (const auto& w : waves_) {
    double phase = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) phase += w.xi[d] * x[d];
    v += shifted(w.mantissa, w.exp2) * std::polar(1.0, phase);
  }
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  for (const auto& g : gaussians_) {
    Complex p{};
    for (const auto& [e, c] : g.coeffs) {
      double mono = 1.0;
      for (std::size_t d = 0; d < dim_; ++d) mono *= std::pow(x[d], static_cast<int>(e[d]));
      p += c * mono;
    }
    v += shifted(p, g.exp2) * std::exp(-g.scale * r2);
  }
  return v;
}

std::string TestFunction::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (is_zero()) return "0";
  bool first = true;
  for (const auto& w : waves_) {
    out << (first ? "" : " + ") << "plane_wave(xi=[";
    for (std::size_t d = 0; d < w.xi.size(); ++d) out << (d ? "," : "") << w.xi[d];
    out << "])";
    first = false;
  }
  for (const auto& g : gaussians_) {
    out << (first ? "" : " + ") << "poly_gaussian(" << g.coeffs.size() << " terms, scale=" << g.scale << ")";
    first = false;
  }
  return out.str();
}

TestFunction apply_operator(const MultiPoly& op, const TestFunction& u) {
  if (op.num_vars() != u.dim()) throw std::invalid_argument("operator and test function dimensions differ");
  TestFunction out(u.dim());
  for (const auto& w : u.waves_) {
    PlaneWave next = w;
    next.mantissa *= op.eval(std::span<const double>(w.xi));
    if (!finite(next.mantissa)) throw std::overflow_error("plane-wave coefficient overflow");
    if (next.mantissa == Complex{}) continue;
    renormalize(next);
    out.waves_.push_back(std::move(next));
  }
  for (const auto& g : u.gaussians_) {
    PolyGaussian next = apply_to_gaussian(op, g);
    for (const auto& [e, c] : next.coeffs) {
      if (!finite(c)) throw std::overflow_error("polynomial-Gaussian coefficient overflow");
    }
    if (!next.coeffs.empty()) out.gaussians_.push_back(std::move(next));
  }
  return out;
}

TestFunction apply_iterate(const OperatorSystem& P, const MultiIndex& beta, const TestFunction& u) {
  if (beta.size() != P.size()) throw std::invalid_argument("beta length must equal the number of operators");
  TestFunction v = u;
  try {
    for (std::size_t j = P.size(); j-- > 0;) {
      for (unsigned k = 0; k < beta[j]; ++k) v = apply_operator(P[j], v);
    }
  } catch (const std::overflow_error& e) {
    throw std::overflow_error(std::string(e.what()) + " at beta=" + format_index(beta));
  }
  return v;
}

std::vector<double> gaussian_moments(int k_max, double a, double b, double c) {
  if (k_max < 0 || !(a <= b) || !(c > 0.0)) throw std::invalid_argument("moments need k_max >= 0, a <= b and c > 0");
  const auto ld = moments_ld(k_max, a, b, c);
  return std::vector<double>(ld.begin(), ld.end());
}

double l2_norm_on_box(const TestFunction& u, const Box& K, const NormOptions& options) {
  if (u.dim() != K.dim()) throw std::invalid_argument("test function and box dimensions differ");
  if (u.is_zero()) return -kInf;
  const double value = u.waves().empty() ? gaussian_log_norm(u.gaussians(), K) : plane_wave_log_norm(u.waves(), K);
  if (options.cross_check) {
    const double check = quadrature_log_norm(u, K);
    // log-domain difference is the relative error of the norm
    if (!(std::abs(value - check) <= options.cross_check_tol)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "L2 norm recurrence " << value << " disagrees with quadrature " << check;
      throw std::runtime_error(msg.str());
    }
  }
  return value;
}

std::vector<double> NormTable::shell_max() const {
  std::vector<double> out(static_cast<std::size_t>(b_max) + 1, -kInf);
  for (const auto& [beta, v] : log_norms) {
    auto& slot = out[total_order(beta)];
    slot = std::max(slot, v);
  }
  return out;
}

std::string NormTable::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < num_ops; ++j) out << "beta_" << j + 1 << ",";
  out << "log_norm\n";
  for (int l = 0; l <= b_max; ++l) {
    for (const auto& beta : shell(num_ops, static_cast<unsigned>(l))) {
      for (unsigned b : beta) out << b << ",";
      const double v = log_norms.at(beta);
      if (std::isinf(v)) {
        out << (v < 0 ? "-inf" : "inf");
      } else {
        out << v;
      }
      out << "\n";
    }
  }
  return out.str();
}

int default_b_max(std::size_t num_ops) { return num_ops <= 1 ? 30 : 15; }

NormTable iterate_norm_table(const OperatorSystem& P, const TestFunction& u, const Box& K, int b_max,
                             const NormOptions& options) {
  if (b_max < 1) throw std::invalid_argument("b_max must be at least 1");
  if (P.num_vars() != u.dim()) throw std::invalid_argument("system and test function dimensions differ");
  NormTable table;
  table.num_ops = P.size();
  table.b_max = b_max;
  const MultiIndex zero(P.size(), 0);
  std::map<MultiIndex, TestFunction> previous{{zero, u}};
  table.log_norms[zero] = l2_norm_on_box(u, K, options);
  for (int l = 1; l <= b_max; ++l) {
    const auto betas = shell(P.size(), static_cast<unsigned>(l));
    std::vector<TestFunction> funcs(betas.size(), TestFunction(u.dim()));
    std::vector<double> norms(betas.size());
    parallel_for(betas.size(), [&](std::size_t k) {
      const auto& beta = betas[k];
      std::size_t j = beta.size();
      while (beta[--j] == 0) {
      }
      MultiIndex prev = beta;
      --prev[j];
      try {
        funcs[k] = apply_operator(P[j], previous.at(prev));
      } catch (const std::overflow_error& e) {
        throw std::overflow_error(std::string(e.what()) + " at beta=" + format_index(beta));
      }
      norms[k] = l2_norm_on_box(funcs[k], K, options);
    });
    previous.clear();
    for (std::size_t k = 0; k < betas.size(); ++k) {
      table.log_norms[betas[k]] = norms[k];
      previous.emplace(betas[k], std::move(funcs[k]));
    }
  }
  return table;
}

SeminormResult seminorm(const NormTable& table, int m, double lambda, const YoungConjugate& conj) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  SeminormResult out;
  const auto shells = table.shell_max();
  out.shell_values.resize(shells.size());
  for (std::size_t l = 0; l < shells.size(); ++l) {
    out.shell_values[l] = shells[l] == -kInf ? -kInf : shells[l] - conj.scaled(static_cast<double>(l) * m, lambda);
  }
  const auto best = std::max_element(out.shell_values.begin(), out.shell_values.end());
  out.log_value = *best;
  out.argmax_shell = static_cast<int>(best - out.shell_values.begin());

  const std::size_t count = shells.size();
  const std::size_t tail = std::max<std::size_t>(2, (count + 4) / 5);
  const std::size_t start = count > tail ? count - tail : 0;
  bool decreasing = true, increasing = true;
  for (std::size_t l = start + 1; l < count; ++l) {
    const double prev = out.shell_values[l - 1], cur = out.shell_values[l];
    if (!(cur < prev || cur == -kInf)) decreasing = false;
    if (!(cur > prev)) increasing = false;
  }
  out.plateau = decreasing;
  out.tail_increasing = increasing;
  if (!decreasing) {
    out.hint = "no plateau in the last " + std::to_string(tail) + " shells; increase b_max";
  }
  return out;
}

SeminormResult seminorm(const OperatorSystem& P, const TestFunction& u, const Box& K, double lambda,
                        const WeightFunction& w, int b_max) {
  const auto table = iterate_norm_table(P, u, K, b_max > 0 ? b_max : default_b_max(P.size()));
  return seminorm(table, P.order(), lambda, YoungConjugate(w));
}

std::string to_string(ClassMode mode) { return mode == ClassMode::kBeurling ? "beurling" : "roumieu"; }

std::string to_string(Membership m) {
  switch (m) {
    case Membership::kMember: return "member";
    case Membership::kNonMember: return "non-member";
    default: return "inconclusive";
  }
}

ClassifyReport classify_membership(const NormTable& table, const WeightFunction& w, int m, ClassMode mode) {
  const YoungConjugate conj(w);
  ClassifyReport report;
  report.mode = mode;
  report.lambda_star = std::numeric_limits<double>::quiet_NaN();
  for (double lambda : kBeurlingLadder) {
    const auto r = seminorm(table, m, lambda, conj);
    if (r.plateau) report.lambda_star = lambda;
  }
  const auto& ladder = mode == ClassMode::kBeurling ? kBeurlingLadder : kRoumieuLadder;
  std::size_t plateaus = 0, increasing = 0;
  for (double lambda : ladder) {
    auto r = seminorm(table, m, lambda, conj);
    plateaus += r.plateau;
    increasing += r.tail_increasing;
    report.ladder.emplace_back(lambda, std::move(r));
  }
  if (mode == ClassMode::kBeurling) {
    if (plateaus == ladder.size()) {
      report.verdict = Membership::kMember;
    } else if (increasing > 0) {
      report.verdict = Membership::kNonMember;
    }
  } else {
    if (plateaus > 0) {
      report.verdict = Membership::kMember;
    } else if (increasing == ladder.size()) {
      report.verdict = Membership::kNonMember;
    }
  }
  if (report.verdict == Membership::kInconclusive) {
    report.hint = "some seminorms neither plateau nor grow steadily by b_max=" + std::to_string(table.b_max) +
                  "; increase b_max";
  }
  return report;
}

InclusionReport verify_inclusion(const OperatorSystem& P, const OperatorSystem& Q, const WeightFunction& w, double s,
                                 double h, const std::vector<NamedFunction>& testset, const Box& K,
                                 const InclusionOptions& options) {
  if (P.num_vars() != Q.num_vars()) throw std::invalid_argument("systems have different numbers of variables");
  if (!(s > 0.0) || !(h > 0.0)) throw std::invalid_argument("s and h must be positive");
  const int m = P.order(), r = Q.order();
  InclusionReport report{rescale_weight(w, 1.0 / s), rescale_weight(w, r / (s * m * h)), 0.0, {}, 0, {}};
  report.gamma_p = options.gamma_p ? *options.gamma_p
                                   : estimate_gamma(P, SamplingPlan::make(P.num_vars(), 0), m).fit.snapped.value();
  if (!std::isfinite(report.gamma_p)) {
    report.warnings.push_back("P does not satisfy condition (H); the inclusion theorem does not apply");
  } else if (s < report.gamma_p / m - 1e-12) {
    std::ostringstream msg;
    msg << "s=" << s << " is below gamma_P/m=" << report.gamma_p / m << "; the inclusion theorem does not apply";
    report.warnings.push_back(msg.str());
  }
  const int bp = options.b_max_p > 0 ? options.b_max_p : default_b_max(P.size());
  const int bq = options.b_max_q > 0 ? options.b_max_q : default_b_max(Q.size());
  for (const auto& [name, u] : testset) {
    InclusionEntry entry;
    entry.name = name;
    entry.p_class = classify_membership(iterate_norm_table(P, u, K, bp), report.omega_prime, m, options.mode);
    if (entry.p_class.verdict == Membership::kMember) {
      entry.q_class = classify_membership(iterate_norm_table(Q, u, K, bq), report.sigma_prime, r, options.mode);
      if (entry.q_class->verdict == Membership::kNonMember) {
        entry.violation = true;
        entry.diagnostics = "member of the P-class but not of the Q-class; likely a numerical artifact";
        ++report.violations;
      } else if (entry.q_class->verdict == Membership::kInconclusive) {
        entry.diagnostics = "Q-class check inconclusive: " + entry.q_class->hint;
      }
    } else {
      entry.diagnostics = "not a P-class member (" + to_string(entry.p_class.verdict) + "); nothing to check";
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace iterlab
