#include "iterlab/weight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace iterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double nan_to_neg_inf(double v) { return std::isnan(v) ? -kInf : v; }

double tabulated_raw(const TabulatedWeight& tab, double t) {
  const auto& ts = tab.t;
  const auto& vs = tab.values;
  if (t <= ts.front()) {
    if (ts.front() <= 0.0) return vs.front();
    return vs.front() * t / ts.front();
  }
  if (t >= ts.back()) {
    const std::size_t n = ts.size();
    const double slope = (vs[n - 1] - vs[n - 2]) / (std::log(ts[n - 1]) - std::log(ts[n - 2]));
    return vs[n - 1] + slope * (std::log(t) - std::log(ts[n - 1]));
  }
  const auto hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  const std::size_t lo = hi - 1;
  const double frac = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return vs[lo] + frac * (vs[hi] - vs[lo]);
}

}  // namespace

WeightFunction::WeightFunction(Kind kind) : kind_(std::move(kind)) {
  if (!std::holds_alternative<RescaledWeight>(kind_)) raw_at_one_ = raw(1.0);
}

WeightFunction WeightFunction::gevrey(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("Gevrey order s must be positive");
  return WeightFunction(GevreyWeight{s});
}

WeightFunction WeightFunction::log_power(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("log-power exponent p must exceed 1");
  return WeightFunction(LogPowerWeight{p});
}

WeightFunction WeightFunction::tabulated(std::vector<double> t, std::vector<double> values) {
  if (t.size() != values.size() || t.size() < 2) {
    throw std::invalid_argument("tabulated weight needs at least two (t, omega) pairs");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(values[i]) || t[i] < 0.0 || values[i] < 0.0) {
      throw std::invalid_argument("tabulated weight samples must be finite and non-negative");
    }
    if (i > 0 && (t[i] <= t[i - 1] || values[i] < values[i - 1])) {
      throw std::invalid_argument("tabulated weight must have increasing t and nondecreasing omega");
    }
  }
  if (t.back() <= 1.0) throw std::invalid_argument("tabulated weight must extend beyond t = 1");
  return WeightFunction(TabulatedWeight{std::move(t), std::move(values)});
}

WeightFunction WeightFunction::tabulated_from_text(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> t, v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    double a = 0.0, b = 0.0;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) throw std::invalid_argument("tabulated weight line " + std::to_string(line_no) + ": expected two columns");
    t.push_back(a);
    v.push_back(b);
  }
  return tabulated(std::move(t), std::move(v));
}

std::string WeightFunction::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GevreyWeight>) {
          out << "gevrey(s=" << k.s << ")";
        } else if constexpr (std::is_same_v<K, LogPowerWeight>) {
          out << "log_power(p=" << k.p << ")";
        } else if constexpr (std::is_same_v<K, RescaledWeight>) {
          out << "rescaled(" << k.base->describe() << ", a=" << k.a << ")";
        } else {
          out << "tabulated(" << k.t.size() << " samples)";
        }
      },
      kind_);
  return out.str();
}

double WeightFunction::raw(double t) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GevreyWeight>) {
          return std::pow(t, 1.0 / k.s);
        } else if constexpr (std::is_same_v<K, LogPowerWeight>) {
          return std::pow(std::log1p(t), k.p);
        } else if constexpr (std::is_same_v<K, TabulatedWeight>) {
          return tabulated_raw(k, t);
        } else {
          throw std::logic_error("rescaled weights have no raw form");
        }
      },
      kind_);
}

double WeightFunction::operator()(double t) const {
  if (t < 0.0 || std::isnan(t)) throw std::domain_error("weight evaluated at negative t");
  if (const auto* r = std::get_if<RescaledWeight>(&kind_)) return (*r->base)(std::pow(t, r->a));
  if (t <= 1.0) return 0.0;
  if (const auto* g = std::get_if<GevreyWeight>(&kind_)) return std::expm1(std::log(t) / g->s);
  return std::max(0.0, raw(t) - raw_at_one_);
}

double WeightFunction::phi(double x) const {
  if (const auto* r = std::get_if<RescaledWeight>(&kind_)) return r->base->phi(r->a * x);
  if (x <= 0.0) return 0.0;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GevreyWeight>) {
          return std::expm1(x / k.s);
        } else if constexpr (std::is_same_v<K, LogPowerWeight>) {
          // log(1 + e^x) without overflow
          const double softplus = x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
          return std::max(0.0, std::pow(softplus, k.p) - raw_at_one_);
        } else if constexpr (std::is_same_v<K, TabulatedWeight>) {
          const double log_last = std::log(k.t.back());
          if (x >= log_last) {
            const std::size_t n = k.t.size();
            const double slope = (k.values[n - 1] - k.values[n - 2]) / (log_last - std::log(k.t[n - 2]));
            return std::max(0.0, k.values[n - 1] + slope * (x - log_last) - raw_at_one_);
          }
          return std::max(0.0, tabulated_raw(k, std::exp(x)) - raw_at_one_);
        } else {
          return 0.0;  // unreachable: handled above
        }
      },
      kind_);
}

double omega_eval(const WeightFunction& w, double t) { return w(t); }

WeightFunction rescale_weight(const WeightFunction& w, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("rescaling exponent a must be positive");
  return WeightFunction(RescaledWeight{std::make_shared<const WeightFunction>(w), a});
}

namespace {

// Golden-section refinement of a concave f on [lo, hi]; returns the best value seen.
double golden_refine(const std::function<double(double)>& f, double lo, double hi, double best) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = nan_to_neg_inf(f(c));
  double fd = nan_to_neg_inf(f(d));
  best = std::max({best, fc, fd});
  for (int iter = 0; iter < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = nan_to_neg_inf(f(c));
      best = std::max(best, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = nan_to_neg_inf(f(d));
      best = std::max(best, fd);
    }
  }
  return best;
}

// Locates the maximizer of concave f over a grid, extending past the last
// grid point by doubling until f turns down, then refines.
double grid_sup(const std::function<double(double)>& f, const std::vector<double>& xs,
                const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  double best_value = values[best];
  if (best + 1 < xs.size()) {
    const double lo = best == 0 ? xs[0] : xs[best - 1];
    return golden_refine(f, lo, xs[best + 1], best_value);
  }
  double a = xs[xs.size() - 2];
  double b = xs.back();
  double c = 2.0 * b;
  double fc = nan_to_neg_inf(f(c));
  for (int iter = 0; iter < 2000 && fc >= best_value; ++iter) {
    best_value = fc;
    a = b;
    b = c;
    c *= 2.0;
    fc = nan_to_neg_inf(f(c));
  }
  return golden_refine(f, a, c, best_value);
}

std::vector<double> default_grid(double x_max, std::size_t grid_size) {
  std::vector<double> xs;
  xs.reserve(grid_size);
  xs.push_back(0.0);
  const double x_min = x_max * 1e-9;
  const std::size_t geometric = grid_size - 1;
  for (std::size_t k = 0; k < geometric; ++k) {
    const double frac = geometric == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(geometric - 1);
    xs.push_back(x_min * std::pow(x_max / x_min, frac));
  }
  return xs;
}

}  // namespace

double sup_concave(const std::function<double(double)>& f, double x_hint, std::size_t grid_size) {
  if (grid_size < 3) throw std::invalid_argument("sup_concave needs at least three grid points");
  if (!(x_hint > 0.0)) x_hint = 1.0;
  const auto xs = default_grid(x_hint, grid_size);
  std::vector<double> values(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) values[i] = nan_to_neg_inf(f(xs[i]));
  return grid_sup(f, xs, values);
}

YoungConjugate::YoungConjugate(WeightFunction w, std::size_t grid_size, double x_max)
    : weight_(std::move(w)), xs_(default_grid(x_max, grid_size)) {
  phis_.reserve(xs_.size());
  for (double x : xs_) phis_.push_back(weight_.phi(x));
}

double YoungConjugate::operator()(double y) const {
  if (y < 0.0 || std::isnan(y)) throw std::domain_error("Young conjugate evaluated at negative y");
  std::vector<double> values(xs_.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) values[i] = nan_to_neg_inf(y * xs_[i] - phis_[i]);
  const auto f = [&](double x) { return y * x - weight_.phi(x); };
  // x = 0 contributes -phi(0) = 0, so the supremum is never negative.
  return std::max(0.0, grid_sup(f, xs_, values));
}

double YoungConjugate::scaled(double j, double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  return lambda * (*this)(j / lambda);
}

double young_conjugate(const WeightFunction& w, double y) { return YoungConjugate(w)(y); }

ConjugateTable conjugate_table(const YoungConjugate& conj, std::vector<double> ys) {
  if (!std::is_sorted(ys.begin(), ys.end()) || std::adjacent_find(ys.begin(), ys.end()) != ys.end()) {
    throw std::invalid_argument("conjugate table grid must be strictly increasing");
  }
  ConjugateTable table{std::move(ys), {}};
  table.values.reserve(table.y.size());
  for (double y : table.y) table.values.push_back(conj(y));
  return table;
}

ConjugateShapeReport check_conjugate_shape(const ConjugateTable& table, double tol) {
  ConjugateShapeReport report{kInf, true, true, true, true};
  const auto& y = table.y;
  const auto& v = table.values;
  if (!y.empty() && y.front() == 0.0) report.zero_at_origin = std::abs(v.front()) <= tol;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (v[i + 1] < v[i] - tol * (1.0 + std::abs(v[i]))) report.increasing = false;
    if (y[i] > 0.0 && v[i + 1] / y[i + 1] < v[i] / y[i] - tol * (1.0 + std::abs(v[i] / y[i]))) {
      report.ratio_nondecreasing = false;
    }
    if (i + 2 < y.size()) {
      const double s0 = (v[i + 1] - v[i]) / (y[i + 1] - y[i]);
      const double s1 = (v[i + 2] - v[i + 1]) / (y[i + 2] - y[i + 1]);
      const double normalized = (s1 - s0) / (1.0 + std::abs(s0));
      report.min_second_difference = std::min(report.min_second_difference, normalized);
      if (normalized < -tol) report.convex = false;
    }
  }
  if (report.min_second_difference == kInf) report.min_second_difference = 0.0;
  return report;
}

double biconjugate(const YoungConjugate& conj, double x) {
  const auto& w = conj.weight();
  // phi convex => phi'(x) <= phi(x + 1) - phi(x), a scale for the maximizing y.
  const double hint = std::max(1.0, 2.0 * (w.phi(x + 1.0) - w.phi(x)));
  return sup_concave([&](double y) { return x * y - conj(y); }, hint, 512);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

bool WeightAxiomReport::non_quasianalytic_weight() const {
  return alpha.verdict == Verdict::kPass && beta.verdict == Verdict::kPass && gamma.verdict == Verdict::kPass &&
         delta.verdict == Verdict::kPass;
}

namespace {

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return out;
}

// Max of omega(factor t) / (omega(t) + 1) over the grid.
double growth_constant(const WeightFunction& w, const std::vector<double>& ts, double factor) {
  double best = 1.0;
  for (double t : ts) best = std::max(best, w(factor * t) / (w(t) + 1.0));
  return best;
}

// Composite Simpson on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& g, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double sum = g(a) + g(b);
  for (std::size_t k = 1; k < n; ++k) sum += g(a + h * static_cast<double>(k)) * (k % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

AxiomResult check_alpha(const WeightFunction& w, const std::vector<double>& ts) {
  AxiomResult r;
  std::vector<double> ratios;
  ratios.reserve(ts.size());
  for (double t : ts) ratios.push_back(w(2.0 * t) / (w(t) + 1.0));
  r.value = std::max(1.0, *std::max_element(ratios.begin(), ratios.end()));
  // An unbounded ratio shows up as a tail that rises without slowing down;
  // power-type weights converge to 2^p, with shrinking increments.
  const double tail = ratios.back();
  const double earlier = ratios[ratios.size() * 4 / 5];
  const double middle = ratios[ratios.size() * 9 / 10];
  const bool decelerating = tail - middle < middle - earlier;
  if (!std::isfinite(r.value)) {
    r.verdict = Verdict::kFail;
    r.note = "omega(2t)/(omega(t)+1) overflowed";
  } else if (tail > 1.05 * earlier && tail > 1.0 && !decelerating) {
    r.verdict = Verdict::kFail;
    r.note = "omega(2t)/(omega(t)+1) still growing at t_max";
  } else {
    r.verdict = Verdict::kPass;
  }
  return r;
}

AxiomResult check_beta(const WeightFunction& w, double t_max) {
  AxiomResult r;
  const double x_end = std::log(t_max);
  const auto g = [&](double x) { return w.phi(x) * std::exp(-x); };
  // int_1^T omega(t)/t^2 dt = int_0^{log T} phi(x) e^{-x} dx; Richardson on Simpson.
  const double coarse = simpson(g, 0.0, x_end, 2048);
  const double fine = simpson(g, 0.0, x_end, 4096);
  const double numeric = fine + (fine - coarse) / 15.0;

  if (const auto* gev = std::get_if<GevreyWeight>(&w.kind())) {
    if (gev->s <= 1.0) {
      r.verdict = Verdict::kFail;
      r.value = kInf;
      r.note = "integral diverges (quasianalytic); numeric value up to t_max = " + std::to_string(numeric);
    } else {
      const double q = 1.0 / gev->s;
      const double tail = std::pow(t_max, q - 1.0) / (1.0 - q) - 1.0 / t_max;
      r.verdict = Verdict::kPass;
      r.value = numeric + tail;
      r.note = "analytic Gevrey tail";
    }
    return r;
  }
  if (std::holds_alternative<TabulatedWeight>(w.kind())) {
    r.verdict = Verdict::kInconclusive;
    r.value = numeric;
    r.note = "tabulated weight: convergence is not decidable from samples";
    return r;
  }
  // Fit the exponential decay rate of the integrand near x_end.
  const double dx = 0.1 * x_end;
  const double g_end = g(x_end);
  const double g_before = g(x_end - dx);
  const double rate = (g_end > 0.0 && g_before > 0.0) ? -(std::log(g_end) - std::log(g_before)) / dx : kInf;
  if (rate > 0.05) {
    r.verdict = Verdict::kPass;
    r.value = numeric + (std::isfinite(rate) ? g_end / rate : 0.0);
    r.note = "numeric integral plus fitted exponential tail";
  } else {
    r.verdict = Verdict::kFail;
    r.value = kInf;
    r.note = "integrand omega(t)/t does not decay; numeric value up to t_max = " + std::to_string(numeric);
  }
  return r;
}

AxiomResult check_gamma(const WeightFunction& w, double t_max) {
  AxiomResult r;
  const auto ts = geometric_grid(std::sqrt(t_max), t_max, 12);
  bool decreasing = true;
  double prev = kInf;
  for (double t : ts) {
    const double omega = w(t);
    const double ratio = omega > 0.0 ? std::log(t) / omega : kInf;
    if (ratio >= prev) decreasing = false;
    prev = ratio;
  }
  r.value = w(t_max) / std::log(t_max);
  if (decreasing && prev < 1.0) {
    r.verdict = Verdict::kPass;
  } else if (decreasing) {
    r.verdict = Verdict::kInconclusive;
    r.note = "log t / omega(t) decreasing but still >= 1 at t_max";
  } else {
    r.verdict = Verdict::kFail;
    r.note = "log t / omega(t) not decreasing";
  }
  return r;
}

AxiomResult check_gamma_prime(const WeightFunction& w, const std::vector<double>& ts, double t_max, double& a_out) {
  AxiomResult r;
  const double b = std::min(1.0, 0.5 * w(t_max) / std::log1p(t_max));
  r.value = b;
  double a = kInf;
  std::vector<double> gaps;
  gaps.reserve(ts.size());
  for (double t : ts) {
    const double gap = w(t) - b * std::log1p(t);
    gaps.push_back(gap);
    a = std::min(a, gap);
  }
  a_out = std::min(a, 0.0);
  const std::size_t quarter = gaps.size() * 3 / 4;
  const bool tail_rising = gaps.back() >= gaps[quarter];
  if (b > 0.0 && tail_rising) {
    r.verdict = Verdict::kPass;
  } else {
    r.verdict = Verdict::kInconclusive;
    r.note = b > 0.0 ? "omega(t) - b log(1+t) still falling at t_max" : "omega vanishes on the grid";
  }
  return r;
}

AxiomResult check_delta(const WeightFunction& w, double t_max) {
  AxiomResult r;
  const double lo = -1.0, hi = std::log(t_max);
  const std::size_t n = 4000;
  const double h = (hi - lo) / static_cast<double>(n);
  long violations = 0;
  for (std::size_t k = 1; k < n; ++k) {
    const double x = lo + h * static_cast<double>(k);
    const double mid = w.phi(x);
    const double second = w.phi(x - h) - 2.0 * mid + w.phi(x + h);
    if (second < -1e-9 * (1.0 + std::abs(mid))) ++violations;
  }
  r.value = static_cast<double>(violations);
  r.verdict = violations == 0 ? Verdict::kPass : Verdict::kFail;
  if (violations > 0) r.note = "phi(x) = omega(e^x) has negative second differences";
  return r;
}

AxiomResult check_bmm(const WeightFunction& w, const std::vector<double>& ts) {
  // Admissible H: the excess 2 omega(t) - omega(H t) is <= H on the grid and
  // no longer rising at t_max (a rising excess is unbounded for power-type weights).
  const auto admissible = [&](double H) {
    std::vector<double> excess;
    excess.reserve(ts.size());
    for (double t : ts) excess.push_back(2.0 * w(t) - w(H * t));
    const double worst = *std::max_element(excess.begin(), excess.end());
    const double scale = 1e-12 * (1.0 + std::abs(excess.back()));
    return worst <= H && excess.back() <= excess[excess.size() * 9 / 10] + scale;
  };
  AxiomResult r;
  // H must stay well below t_max so the regime t >> H is actually sampled.
  const double h_cap = std::sqrt(ts.back());
  if (!admissible(h_cap)) {
    r.verdict = Verdict::kFail;
    r.value = kInf;
    r.note = "no H <= sqrt(t_max) satisfies 2 omega(t) <= omega(H t) + H";
    return r;
  }
  double lo = 0.0, hi = std::log(h_cap);  // bisection in log H
  if (admissible(1.0)) {
    hi = 0.0;
  } else {
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (admissible(std::exp(mid)) ? hi : lo) = mid;
    }
  }
  r.value = std::exp(hi);
  r.verdict = Verdict::kPass;
  return r;
}

}  // namespace

WeightAxiomReport check_weight_axioms(const WeightFunction& w, double t_max) {
  if (!(t_max >= 1e3)) throw std::invalid_argument("check_weight_axioms needs t_max >= 1e3");
  auto ts = geometric_grid(1e-3, t_max, 2000);
  ts.insert(ts.begin(), 0.0);
  std::vector<double> half_ts;
  for (double t : ts) {
    if (2.0 * t <= t_max) half_ts.push_back(t);
  }

  WeightAxiomReport report;
  report.alpha = check_alpha(w, half_ts);
  report.beta = check_beta(w, t_max);
  report.gamma = check_gamma(w, t_max);
  report.gamma_prime = check_gamma_prime(w, ts, t_max, report.gamma_prime_a);
  report.delta = check_delta(w, t_max);
  report.bmm = check_bmm(w, ts);
  report.l_tilde = growth_constant(w, ts, std::exp(1.0));

  const auto uv = geometric_grid(1e-2, t_max / 2.0, 200);
  double l_prime = 1.0;
  for (double u : uv) {
    for (double v : uv) l_prime = std::max(l_prime, w(u + v) / (w(u) + w(v) + 1.0));
  }
  report.l_prime = l_prime;
  return report;
}

LemmaJReport check_lemma_J(const YoungConjugate& conj, double h, double lambda, double t, long j_max,
                           double rel_slack) {
  if (!(h > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("h and lambda must be positive");
  if (!(t >= 1.0)) throw std::invalid_argument("check_lemma_J needs t >= 1");
  if (j_max < 1) throw std::invalid_argument("j_max must be at least 1");
  const double log_t = std::log(t);
  const auto term = [&](long j) {
    const double jd = static_cast<double>(j);
    return jd * log_t - conj.scaled(h * jd, lambda);
  };

  // Integer ternary search for the max of a concave sequence, then a local scan.
  long lo = 0, hi = j_max;
  while (hi - lo > 8) {
    const long m1 = lo + (hi - lo) / 3;
    const long m2 = hi - (hi - lo) / 3;
    if (term(m1) < term(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  LemmaJReport report;
  report.j_max = j_max;
  report.log_sup = -kInf;
  for (long j = std::max(0L, lo - 4); j <= std::min(j_max, hi + 4); ++j) {
    const double v = term(j);
    if (v > report.log_sup) {
      report.log_sup = v;
      report.argmax_j = j;
    }
  }
  if (report.log_sup < term(0)) {
    report.log_sup = term(0);
    report.argmax_j = 0;
  }
  report.log_upper = lambda * conj.weight().phi(log_t / h);
  report.log_lower = report.log_upper - log_t;

  const bool plateau = report.argmax_j < j_max && term(j_max) < term(j_max - 1);
  if (!plateau) {
    report.verdict = Verdict::kInconclusive;
    return report;
  }
  const double slack = std::log1p(rel_slack);
  const bool ok = report.log_sup <= report.log_upper + slack && report.log_sup >= report.log_lower - slack;
  report.verdict = ok ? Verdict::kPass : Verdict::kFail;
  return report;
}

LemmaJReport check_lemma_J(const WeightFunction& w, double h, double lambda, double t, long j_max,
                           double rel_slack) {
  return check_lemma_J(YoungConjugate(w), h, lambda, t, j_max, rel_slack);
}

ShiftConstants shift_constants(const YoungConjugate& conj, double rho, double lambda, double l_tilde, long j_max) {
  if (!(rho > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("rho and lambda must be positive");
  if (!(l_tilde >= 1.0)) throw std::invalid_argument("L~ must be at least 1");
  ShiftConstants out;
  out.shift_steps = std::max(0L, static_cast<long>(std::floor(std::log(rho) + 1.0)));
  out.lambda_prime = lambda / std::pow(l_tilde, static_cast<double>(out.shift_steps));
  out.log_D = lambda * static_cast<double>(out.shift_steps);
  out.j_checked = j_max;
  out.worst_margin = kInf;
  const double log_rho = std::log(rho);
  for (long j = 0; j <= j_max; ++j) {
    const double jd = static_cast<double>(j);
    const double lhs = jd * log_rho + conj.scaled(jd, lambda);
    const double rhs = out.log_D + conj.scaled(jd, out.lambda_prime);
    out.worst_margin = std::min(out.worst_margin, (rhs - lhs) / (1.0 + std::abs(lhs)));
  }
  out.holds = out.worst_margin >= -1e-9;
  return out;
}

ProductRuleReport check_product_rule(const YoungConjugate& conj, double lambda, double l_prime, long jk_max) {
  if (!(lambda > 0.0) || !(l_prime >= 1.0)) throw std::invalid_argument("need lambda > 0 and L' >= 1");
  ProductRuleReport out;
  out.worst_margin = kInf;
  std::vector<double> single(static_cast<std::size_t>(jk_max) + 1);
  for (long j = 0; j <= jk_max; ++j) single[static_cast<std::size_t>(j)] = conj.scaled(static_cast<double>(j), lambda);
  std::vector<double> joint(2 * static_cast<std::size_t>(jk_max) + 1);
  for (long s = 0; s <= 2 * jk_max; ++s) {
    joint[static_cast<std::size_t>(s)] = lambda + conj.scaled(static_cast<double>(s), lambda / l_prime);
  }
  for (long j = 0; j <= jk_max; ++j) {
    for (long k = 0; k <= jk_max; ++k) {
      const double lhs = single[static_cast<std::size_t>(j)] + single[static_cast<std::size_t>(k)];
      const double rhs = joint[static_cast<std::size_t>(j + k)];
      out.worst_margin = std::min(out.worst_margin, (rhs - lhs) / (1.0 + std::abs(lhs)));
      ++out.pairs_checked;
    }
  }
  out.holds = out.worst_margin >= -1e-9;
  return out;
}

}  // namespace iterlab
