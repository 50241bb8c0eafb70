#include "iterlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iterlab {

unsigned total_order(const MultiIndex& index) {
  unsigned sum = 0;
  for (unsigned c : index) sum += c;
  return sum;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("multi-index length mismatch");
  }
  MultiIndex out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

MultiPoly::MultiPoly(std::size_t num_vars) : num_vars_(num_vars) {
  if (num_vars == 0) throw std::invalid_argument("polynomial needs at least one variable");
}

MultiPoly::MultiPoly(std::size_t num_vars, TermMap terms) : MultiPoly(num_vars) {
  for (auto& [exponents, c] : terms) add_term(exponents, c);
}

MultiPoly MultiPoly::constant(std::size_t num_vars, const Rational& c) {
  MultiPoly p(num_vars);
  p.add_term(MultiIndex(num_vars, 0), c);
  return p;
}

MultiPoly MultiPoly::monomial(const Rational& c, MultiIndex exponents) {
  MultiPoly p(exponents.size());
  p.add_term(exponents, c);
  return p;
}

MultiPoly MultiPoly::variable(std::size_t num_vars, std::size_t k) {
  if (k >= num_vars) throw std::out_of_range("variable index out of range");
  MultiIndex e(num_vars, 0);
  e[k] = 1;
  return monomial(Rational(1), std::move(e));
}

void MultiPoly::check_dims(std::size_t len, const char* what) const {
  if (len != num_vars_) {
    std::ostringstream msg;
    msg << what << " has length " << len << ", polynomial has " << num_vars_ << " variables";
    throw std::invalid_argument(msg.str());
  }
}

void MultiPoly::add_term(const MultiIndex& exponents, const Rational& c) {
  check_dims(exponents.size(), "exponent vector");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(exponents, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

int MultiPoly::degree() const {
  int deg = kZeroPolyDegree;
  for (const auto& [e, c] : terms_) deg = std::max(deg, static_cast<int>(total_order(e)));
  return deg;
}

Rational MultiPoly::coefficient(const MultiIndex& exponents) const {
  check_dims(exponents.size(), "exponent vector");
  auto it = terms_.find(exponents);
  return it == terms_.end() ? Rational(0) : it->second;
}

namespace {

// powers[i][k] = xi_i^k for k up to the largest exponent of variable i.
template <typename T>
std::vector<std::vector<T>> power_table(const MultiPoly::TermMap& terms, std::span<const T> xi) {
  std::vector<unsigned> max_exp(xi.size(), 0);
  for (const auto& [e, c] : terms) {
    for (std::size_t i = 0; i < e.size(); ++i) max_exp[i] = std::max(max_exp[i], e[i]);
  }
  std::vector<std::vector<T>> powers(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    powers[i].resize(max_exp[i] + 1);
    powers[i][0] = T(1);
    for (unsigned k = 1; k <= max_exp[i]; ++k) powers[i][k] = powers[i][k - 1] * xi[i];
  }
  return powers;
}

}  // namespace

double MultiPoly::eval(std::span<const double> xi) const {
  check_dims(xi.size(), "evaluation point");
  const auto powers = power_table(terms_, xi);
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = static_cast<double>(c);
    for (std::size_t i = 0; i < e.size(); ++i) term *= powers[i][e[i]];
    sum += term;
  }
  return sum;
}

Rational MultiPoly::eval(std::span<const Rational> xi) const {
  check_dims(xi.size(), "evaluation point");
  const auto powers = power_table(terms_, xi);
  Rational sum = 0;
  for (const auto& [e, c] : terms_) {
    Rational term = c;
    for (std::size_t i = 0; i < e.size(); ++i) term *= powers[i][e[i]];
    sum += term;
  }
  return sum;
}

MultiPoly MultiPoly::derivative(const MultiIndex& alpha) const {
  check_dims(alpha.size(), "derivative multi-index");
  MultiPoly out(num_vars_);
  for (const auto& [e, c] : terms_) {
    Rational coeff = c;
    MultiIndex lowered = e;
    bool vanishes = false;
    for (std::size_t i = 0; i < e.size() && !vanishes; ++i) {
      if (alpha[i] > e[i]) {
        vanishes = true;
        break;
      }
      // falling factorial e_i (e_i - 1) ... (e_i - alpha_i + 1)
      for (unsigned k = 0; k < alpha[i]; ++k) coeff *= (e[i] - k);
      lowered[i] = e[i] - alpha[i];
    }
    if (!vanishes) out.add_term(lowered, coeff);
  }
  return out;
}

MultiPoly MultiPoly::principal_part(int m) const {
  MultiPoly out(num_vars_);
  for (const auto& [e, c] : terms_) {
    if (static_cast<int>(total_order(e)) == m) out.terms_.emplace(e, c);
  }
  return out;
}

MultiPoly MultiPoly::operator-() const {
  MultiPoly out = *this;
  for (auto& [e, c] : out.terms_) c = -c;
  return out;
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& other) {
  check_dims(other.num_vars_, "operand");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& other) {
  check_dims(other.num_vars_, "operand");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

MultiPoly& MultiPoly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, coeff] : terms_) coeff *= c;
  return *this;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  a.check_dims(b.num_vars_, "operand");
  MultiPoly out(a.num_vars_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) out.add_term(ea + eb, ca * cb);
  }
  return out;
}

MultiPoly poly_derivative(const MultiPoly& p, const MultiIndex& alpha) { return p.derivative(alpha); }

double poly_eval(const MultiPoly& p, std::span<const double> xi) { return p.eval(xi); }

MultiPoly principal_part(const MultiPoly& p, int m) { return p.principal_part(m); }

std::string to_string(const Rational& q) {
  std::ostringstream out;
  out << numerator(q);
  if (denominator(q) != 1) out << '/' << denominator(q);
  return out.str();
}

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  auto parse_int = [&](std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty integer in rational '" + std::string(text) + "'");
    std::size_t start = (s.front() == '-' || s.front() == '+') ? 1 : 0;
    if (start == s.size() ||
        !std::all_of(s.begin() + start, s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    }
    if (s.front() == '+') s.remove_prefix(1);
    return boost::multiprecision::cpp_int(std::string(s));
  };
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  const auto num = parse_int(text.substr(0, slash));
  const auto den = parse_int(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

namespace {

std::vector<std::vector<std::string>> tokenize_lines(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::string current;
  auto flush = [&] {
    auto hash = current.find('#');
    if (hash != std::string::npos) current.resize(hash);
    std::istringstream in(current);
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    if (!tokens.empty()) lines.push_back(std::move(tokens));
    current.clear();
  };
  for (char ch : text) {
    if (ch == '\n' || ch == ';') {
      flush();
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return lines;
}

unsigned parse_exponent(const std::string& tok) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    throw std::invalid_argument("malformed exponent '" + tok + "'");
  }
  return static_cast<unsigned>(std::stoul(tok));
}

}  // namespace

MultiPoly parse_term_list(std::string_view text, std::size_t num_vars) {
  MultiPoly out(num_vars);
  for (const auto& tokens : tokenize_lines(text)) {
    if (tokens.size() != num_vars + 1) {
      std::ostringstream msg;
      msg << "term line has " << tokens.size() - 1 << " exponents, expected " << num_vars;
      throw std::invalid_argument(msg.str());
    }
    MultiIndex e(num_vars);
    for (std::size_t i = 0; i < num_vars; ++i) e[i] = parse_exponent(tokens[i + 1]);
    out += MultiPoly::monomial(parse_rational(tokens[0]), std::move(e));
  }
  return out;
}

MultiPoly parse_term_list(std::string_view text) {
  const auto lines = tokenize_lines(text);
  if (lines.empty()) throw std::invalid_argument("cannot infer variable count from an empty term list");
  if (lines.front().size() < 2) throw std::invalid_argument("term line needs a coefficient and exponents");
  return parse_term_list(text, lines.front().size() - 1);
}

std::string format_term_list(const MultiPoly& p) {
  std::string out;
  for (const auto& [e, c] : p.terms()) {
    out += to_string(c);
    for (unsigned k : e) {
      out += ' ';
      out += std::to_string(k);
    }
    out += '\n';
  }
  return out;
}

OperatorSystem::OperatorSystem(std::vector<MultiPoly> polys, int order)
    : polys_(std::move(polys)), order_(order) {
  if (polys_.empty()) throw std::invalid_argument("operator system must be nonempty");
  if (order_ <= 0) throw std::invalid_argument("operator system order must be positive");
  const auto n = polys_.front().num_vars();
  for (const auto& p : polys_) {
    if (p.num_vars() != n) throw std::invalid_argument("operator system members disagree on variable count");
    if (p.degree() > order_) {
      throw std::invalid_argument("member of degree " + std::to_string(p.degree()) +
                                  " exceeds declared order " + std::to_string(order_));
    }
    attains_order_.push_back(p.degree() == order_);
  }
  if (std::none_of(attains_order_.begin(), attains_order_.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("no member attains the declared order " + std::to_string(order_));
  }
}

bool OperatorSystem::has_deficient_member() const {
  return std::find(attains_order_.begin(), attains_order_.end(), false) != attains_order_.end();
}

double system_symbol_sum(const OperatorSystem& system, std::span<const double> xi) {
  double sum = 0.0;
  for (const auto& p : system.polys()) sum += std::abs(p.eval(xi));
  return sum;
}

namespace {

void check_beta(const OperatorSystem& system, const MultiIndex& beta) {
  if (beta.size() != system.size()) {
    throw std::invalid_argument("iterate index has length " + std::to_string(beta.size()) + ", system has " +
                                std::to_string(system.size()) + " operators");
  }
}

}  // namespace

double iterate_symbol(const OperatorSystem& system, const MultiIndex& beta, std::span<const double> xi) {
  check_beta(system, beta);
  double product = 1.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (beta[j] == 0) {
      system[j].eval(xi);  // dimension check only
      continue;
    }
    product *= std::pow(system[j].eval(xi), static_cast<double>(beta[j]));
  }
  return product;
}

Rational iterate_symbol(const OperatorSystem& system, const MultiIndex& beta, std::span<const Rational> xi) {
  check_beta(system, beta);
  Rational product = 1;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const Rational value = system[j].eval(xi);
    for (unsigned k = 0; k < beta[j]; ++k) product *= value;
  }
  return product;
}

double log_abs_iterate_symbol(const OperatorSystem& system, const MultiIndex& beta, std::span<const double> xi) {
  check_beta(system, beta);
  double log_product = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double value = system[j].eval(xi);
    if (beta[j] == 0) continue;
    log_product += static_cast<double>(beta[j]) * std::log(std::abs(value));
  }
  return log_product;
}

}  // namespace iterlab
