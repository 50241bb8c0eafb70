#include "iterlab/scenario.hpp"

#include "iterlab/parallel.hpp"
#include "iterlab/symbol_analysis.hpp"

#include "toml.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace iterlab {

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid scenario:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

namespace {

enum class ArgKind { kSystem, kWeight, kFunction, kFunctionList, kNumber, kInteger, kMode, kString };

struct OpSpec {
  std::string name;
  std::vector<std::pair<std::string, ArgKind>> required;
  std::vector<std::pair<std::string, ArgKind>> optional;
  bool needs_box = false;
};

const std::vector<OpSpec>& op_specs() {
  using enum ArgKind;
  static const std::vector<OpSpec> specs{
      {"estimate-gamma", {{"system", kSystem}}, {{"alpha_max", kInteger}}},
      {"estimate-h", {{"q", kSystem}, {"p", kSystem}}, {}},
      {"check-elliptic", {{"system", kSystem}}, {}},
      {"compare", {{"p", kSystem}, {"q", kSystem}}, {}},
      {"weight-axioms", {{"weight", kWeight}}, {{"t_max", kNumber}}},
      {"lemma-sweep",
       {},
       {{"cases", kInteger},
        {"s_min", kNumber},
        {"s_max", kNumber},
        {"h_min", kNumber},
        {"h_max", kNumber},
        {"lambda_min", kNumber},
        {"lambda_max", kNumber},
        {"log_t_max", kNumber},
        {"j_max", kInteger},
        {"slack", kNumber}}},
      {"iterate-norms", {{"system", kSystem}, {"function", kFunction}}, {{"b_max", kInteger}}, true},
      {"seminorm",
       {{"system", kSystem}, {"function", kFunction}, {"weight", kWeight}, {"lambda", kNumber}},
       {{"b_max", kInteger}},
       true},
      {"classify",
       {{"system", kSystem}, {"function", kFunction}, {"weight", kWeight}},
       {{"mode", kMode}, {"b_max", kInteger}},
       true},
      {"verify-inclusion",
       {{"p", kSystem}, {"q", kSystem}, {"weight", kWeight}, {"s", kNumber}, {"h", kNumber},
        {"functions", kFunctionList}},
       {{"mode", kMode}, {"gamma_p", kNumber}, {"b_max_p", kInteger}, {"b_max_q", kInteger}},
       true},
  };
  return specs;
}

const OpSpec* find_spec(const std::string& op) {
  for (const auto& s : op_specs()) {
    if (s.name == op) return &s;
  }
  return nullptr;
}

std::string at_line(std::size_t line) { return line ? "line " + std::to_string(line) + ": " : ""; }

std::size_t line_of(const toml::node& n) { return n.source().begin.line; }

Json to_json(const toml::node& n) {
  if (auto v = n.as_string()) return v->get();
  if (auto v = n.as_integer()) return v->get();
  if (auto v = n.as_floating_point()) return v->get();
  if (auto v = n.as_boolean()) return v->get();
  if (auto arr = n.as_array()) {
    Json out = Json::array();
    for (const auto& item : *arr) out.push_back(to_json(item));
    return out;
  }
  if (auto tbl = n.as_table()) {
    Json out = Json::object();
    for (const auto& [k, v] : *tbl) out[std::string(k.str())] = to_json(v);
    return out;
  }
  return nullptr;
}

// Collects errors while reading typed fields of one table.
struct Reader {
  std::vector<std::string>& errors;
  const toml::table& table;
  std::string where;
  std::size_t line;
  std::set<std::string> allowed;

  const toml::node* get(const std::string& key) {
    allowed.insert(key);
    return table.get(key);
  }

  std::optional<double> number(const std::string& key, bool required) {
    const auto* n = get(key);
    if (!n) {
      if (required) errors.push_back(at_line(line) + where + ": missing '" + key + "'");
      return std::nullopt;
    }
    if (!n->is_number()) {
      errors.push_back(at_line(line_of(*n)) + where + "." + key + " must be a number");
      return std::nullopt;
    }
    return n->value<double>();
  }

  std::optional<std::int64_t> integer(const std::string& key, bool required) {
    const auto* n = get(key);
    if (!n) {
      if (required) errors.push_back(at_line(line) + where + ": missing '" + key + "'");
      return std::nullopt;
    }
    if (!n->is_integer()) {
      errors.push_back(at_line(line_of(*n)) + where + "." + key + " must be an integer");
      return std::nullopt;
    }
    return n->value<std::int64_t>();
  }

  std::optional<std::string> string(const std::string& key, bool required) {
    const auto* n = get(key);
    if (!n) {
      if (required) errors.push_back(at_line(line) + where + ": missing '" + key + "'");
      return std::nullopt;
    }
    if (!n->is_string()) {
      errors.push_back(at_line(line_of(*n)) + where + "." + key + " must be a string");
      return std::nullopt;
    }
    return n->value<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key, bool required) {
    const auto* n = get(key);
    if (!n) {
      if (required) errors.push_back(at_line(line) + where + ": missing '" + key + "'");
      return std::nullopt;
    }
    const auto* arr = n->as_array();
    std::vector<double> out;
    bool ok = arr != nullptr;
    if (arr) {
      for (const auto& item : *arr) {
        if (!item.is_number()) {
          ok = false;
          break;
        }
        out.push_back(*item.value<double>());
      }
    }
    if (!ok) {
      errors.push_back(at_line(line_of(*n)) + where + "." + key + " must be an array of numbers");
      return std::nullopt;
    }
    return out;
  }

  void reject_unknown() {
    for (const auto& [k, v] : table) {
      const std::string key(k.str());
      if (!allowed.count(key)) errors.push_back(at_line(line_of(v)) + where + ": unknown key '" + key + "'");
    }
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void parse_sampling(const toml::table& tbl, std::size_t line, Scenario& s, std::vector<std::string>& errors) {
  Reader r{errors, tbl, "sampling", line, {}};
  if (auto v = r.integer("radii", false)) {
    if (*v < 2) errors.push_back(at_line(line) + "sampling.radii must be at least 2");
    else s.sampling.radii = static_cast<std::size_t>(*v);
  }
  if (auto v = r.integer("directions", false)) {
    if (*v < 1) errors.push_back(at_line(line) + "sampling.directions must be positive");
    else s.sampling.directions = static_cast<std::size_t>(*v);
  }
  if (auto v = r.number("r_min", false)) s.sampling.r_min = *v;
  if (auto v = r.number("r_max", false)) s.sampling.r_max = *v;
  if (!(s.sampling.r_min > 0.0 && s.sampling.r_max > s.sampling.r_min)) {
    errors.push_back(at_line(line) + "sampling radii need 0 < r_min < r_max");
  }
  if (auto v = r.integer("snap_den", false)) {
    if (*v < 1) errors.push_back(at_line(line) + "sampling.snap_den must be positive");
    else s.sampling.snap_den = static_cast<long>(*v);
  }
  if (auto v = r.number("snap_tol", false)) {
    if (!(*v > 0.0)) errors.push_back(at_line(line) + "sampling.snap_tol must be positive");
    else s.sampling.snap_tol = *v;
  }
  if (auto v = r.integer("alpha_max", false)) {
    if (*v < 1) errors.push_back(at_line(line) + "sampling.alpha_max must be positive");
    else s.sampling.alpha_max = static_cast<int>(*v);
  }
  r.reject_unknown();
}

void parse_systems(const toml::table& tbl, Scenario& s, std::vector<std::string>& errors) {
  for (const auto& [k, node] : tbl) {
    const std::string name(k.str());
    const std::string where = "systems." + name;
    const auto* sys = node.as_table();
    if (!sys) {
      errors.push_back(at_line(line_of(node)) + where + " must be a table");
      continue;
    }
    Reader r{errors, *sys, where, line_of(node), {}};
    const auto order = r.integer("order", true);
    const auto* polys = r.get("polys");
    r.reject_unknown();
    if (order && *order <= 0) {
      errors.push_back(at_line(line_of(node)) + where + ".order must be positive");
      continue;
    }
    if (!polys) {
      errors.push_back(at_line(line_of(node)) + where + ": missing 'polys'");
      continue;
    }
    std::vector<std::string> texts;
    if (const auto* arr = polys->as_array()) {
      for (const auto& item : *arr) {
        if (item.is_string()) texts.push_back(*item.value<std::string>());
      }
      if (texts.size() != arr->size()) texts.clear();
    } else if (polys->is_string()) {
      texts.push_back(*polys->value<std::string>());
    }
    if (texts.empty()) {
      errors.push_back(at_line(line_of(*polys)) + where + ".polys must be a term-list string or array of them");
      continue;
    }
    if (!order) continue;
    try {
      std::vector<MultiPoly> ps;
      for (const auto& t : texts) ps.push_back(parse_term_list(t));
      s.systems.emplace(name, OperatorSystem(std::move(ps), static_cast<int>(*order)));
    } catch (const std::exception& e) {
      errors.push_back(at_line(line_of(*polys)) + where + ": " + e.what());
    }
  }
}

void parse_weights(const toml::table& tbl, const std::filesystem::path& base_dir, Scenario& s,
                   std::vector<std::string>& errors) {
  struct Pending {
    std::string name, base;
    double a;
    std::size_t line;
  };
  std::vector<Pending> rescaled;
  for (const auto& [k, node] : tbl) {
    const std::string name(k.str());
    const std::string where = "weights." + name;
    const auto* w = node.as_table();
    if (!w) {
      errors.push_back(at_line(line_of(node)) + where + " must be a table");
      continue;
    }
    Reader r{errors, *w, where, line_of(node), {}};
    const auto kind = r.string("kind", true);
    try {
      if (!kind) {
        r.reject_unknown();
      } else if (*kind == "gevrey") {
        const auto sv = r.number("s", true);
        r.reject_unknown();
        if (sv) s.weights.emplace(name, WeightFunction::gevrey(*sv));
      } else if (*kind == "log_power") {
        const auto p = r.number("p", true);
        r.reject_unknown();
        if (p) s.weights.emplace(name, WeightFunction::log_power(*p));
      } else if (*kind == "tabulated") {
        const auto file = r.string("file", false);
        const auto t = r.numbers("t", false);
        const auto values = r.numbers("values", false);
        r.reject_unknown();
        if (file) {
          s.weights.emplace(name, WeightFunction::tabulated_from_text(read_file(base_dir / *file)));
        } else if (t && values) {
          s.weights.emplace(name, WeightFunction::tabulated(*t, *values));
        } else {
          errors.push_back(at_line(line_of(node)) + where + ": tabulated weight needs 'file' or 't' and 'values'");
        }
      } else if (*kind == "rescaled") {
        const auto base = r.string("base", true);
        const auto a = r.number("a", true);
        r.reject_unknown();
        if (base && a) rescaled.push_back({name, *base, *a, line_of(node)});
      } else {
        r.reject_unknown();
        errors.push_back(at_line(line_of(node)) + where + ": unknown weight kind '" + *kind + "'");
      }
    } catch (const std::exception& e) {
      errors.push_back(at_line(line_of(node)) + where + ": " + e.what());
    }
  }
  // Rescaled weights may chain; resolve until no progress.
  bool progress = true;
  while (!rescaled.empty() && progress) {
    progress = false;
    for (auto it = rescaled.begin(); it != rescaled.end();) {
      auto base = s.weights.find(it->base);
      if (base == s.weights.end()) {
        ++it;
        continue;
      }
      try {
        s.weights.emplace(it->name, rescale_weight(base->second, it->a));
      } catch (const std::exception& e) {
        errors.push_back(at_line(it->line) + "weights." + it->name + ": " + e.what());
      }
      it = rescaled.erase(it);
      progress = true;
    }
  }
  for (const auto& p : rescaled) {
    errors.push_back(at_line(p.line) + "weights." + p.name + ": base weight '" + p.base + "' is not declared");
  }
}

void parse_functions(const toml::table& tbl, Scenario& s, std::vector<std::string>& errors) {
  for (const auto& [k, node] : tbl) {
    const std::string name(k.str());
    const std::string where = "functions." + name;
    const auto* f = node.as_table();
    if (!f) {
      errors.push_back(at_line(line_of(node)) + where + " must be a table");
      continue;
    }
    Reader r{errors, *f, where, line_of(node), {}};
    const auto kind = r.string("kind", true);
    try {
      if (!kind) {
        r.reject_unknown();
      } else if (*kind == "plane_wave") {
        const auto xi = r.numbers("xi", true);
        const auto coeff = r.numbers("coeff", false);
        r.reject_unknown();
        Complex c = 1.0;
        if (coeff) {
          if (coeff->size() != 2) throw std::invalid_argument("coeff must be [re, im]");
          c = {(*coeff)[0], (*coeff)[1]};
        }
        if (xi) s.functions.emplace(name, TestFunction::plane_wave(*xi, c));
      } else if (*kind == "poly_gaussian") {
        const auto poly = r.string("poly", true);
        const auto scale = r.number("scale", false);
        r.reject_unknown();
        if (poly) s.functions.emplace(name, TestFunction::poly_gaussian(parse_term_list(*poly), scale.value_or(1.0)));
      } else {
        r.reject_unknown();
        errors.push_back(at_line(line_of(node)) + where + ": unknown function kind '" + *kind + "'");
      }
    } catch (const std::exception& e) {
      errors.push_back(at_line(line_of(node)) + where + ": " + e.what());
    }
  }
}

void parse_box(const toml::table& tbl, std::size_t line, Scenario& s, std::vector<std::string>& errors) {
  Reader r{errors, tbl, "box", line, {}};
  const auto lower = r.numbers("lower", true);
  const auto upper = r.numbers("upper", true);
  r.reject_unknown();
  if (!lower || !upper) return;
  try {
    s.box = Box(*lower, *upper);
  } catch (const std::exception& e) {
    errors.push_back(at_line(line) + "box: " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& task_ops() {
  static const std::vector<std::string> ops = [] {
    std::vector<std::string> out;
    for (const auto& s : op_specs()) out.push_back(s.name);
    return out;
  }();
  return ops;
}

std::vector<std::string> validate_task(const Scenario& s, const Task& task) {
  std::vector<std::string> errors;
  const std::string where = at_line(task.line) + "task '" + task.op + "'";
  const OpSpec* spec = find_spec(task.op);
  if (!spec) {
    errors.push_back(at_line(task.line) + "unknown task op '" + task.op + "'");
    return errors;
  }
  std::set<std::string> known{"name"};
  std::size_t dim = 0;
  auto note_dim = [&](std::size_t d, const std::string& what) {
    if (dim == 0) dim = d;
    else if (d != dim) errors.push_back(where + ": " + what + " has dimension " + std::to_string(d) + ", expected " + std::to_string(dim));
  };
  auto check = [&](const std::string& key, ArgKind kind, bool required) {
    known.insert(key);
    if (!task.params.contains(key)) {
      if (required) errors.push_back(where + ": missing '" + key + "'");
      return;
    }
    const Json& v = task.params[key];
    auto ref = [&](const Json& item, const char* what, auto& table) {
      if (!item.is_string()) {
        errors.push_back(where + ": '" + key + "' must name a " + what);
        return;
      }
      const auto name = item.get<std::string>();
      auto it = table.find(name);
      if (it == table.end()) {
        errors.push_back(where + ": " + what + " '" + name + "' is not declared");
        return;
      }
      if constexpr (std::is_same_v<std::decay_t<decltype(it->second)>, OperatorSystem>) {
        note_dim(it->second.num_vars(), "system '" + name + "'");
      } else if constexpr (std::is_same_v<std::decay_t<decltype(it->second)>, TestFunction>) {
        note_dim(it->second.dim(), "function '" + name + "'");
      }
    };
    switch (kind) {
      case ArgKind::kSystem: ref(v, "system", s.systems); break;
      case ArgKind::kWeight: ref(v, "weight", s.weights); break;
      case ArgKind::kFunction: ref(v, "function", s.functions); break;
      case ArgKind::kFunctionList:
        if (!v.is_array()) {
          errors.push_back(where + ": '" + key + "' must be an array of function names");
        } else {
          for (const auto& item : v) ref(item, "function", s.functions);
        }
        break;
      case ArgKind::kNumber:
        if (!v.is_number()) errors.push_back(where + ": '" + key + "' must be a number");
        else if (key != "gamma_p" && !(v.get<double>() > 0.0)) errors.push_back(where + ": '" + key + "' must be positive");
        break;
      case ArgKind::kInteger:
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) errors.push_back(where + ": '" + key + "' must be a positive integer");
        break;
      case ArgKind::kMode:
        if (!v.is_string() || (v != "beurling" && v != "roumieu")) errors.push_back(where + ": mode must be \"beurling\" or \"roumieu\"");
        break;
      case ArgKind::kString:
        if (!v.is_string()) errors.push_back(where + ": '" + key + "' must be a string");
        break;
    }
  };
  for (const auto& [key, kind] : spec->required) check(key, kind, true);
  for (const auto& [key, kind] : spec->optional) check(key, kind, false);
  for (const auto& [key, v] : task.params.items()) {
    if (!known.count(key)) errors.push_back(where + ": unknown key '" + key + "'");
  }
  if (task.params.contains("name") && !task.params["name"].is_string()) errors.push_back(where + ": 'name' must be a string");
  if (spec->needs_box) {
    if (!s.box) errors.push_back(where + ": needs a [box] section");
    else if (dim && s.box->dim() != dim) errors.push_back(where + ": box dimension does not match");
  }
  return errors;
}

Scenario parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError({at_line(e.source().begin.line) + std::string(e.description())});
  }
  Scenario s;
  std::vector<std::string> errors;
  const std::set<std::string> sections{"seed", "sampling", "systems", "weights", "functions", "box", "tasks"};
  for (const auto& [k, v] : root) {
    if (!sections.count(std::string(k.str()))) errors.push_back(at_line(line_of(v)) + "unknown key '" + std::string(k.str()) + "'");
  }
  if (const auto* seed = root.get("seed")) {
    if (!seed->is_integer() || *seed->value<std::int64_t>() < 0) {
      errors.push_back(at_line(line_of(*seed)) + "seed must be a non-negative integer");
    } else {
      s.seed = static_cast<std::uint64_t>(*seed->value<std::int64_t>());
    }
  }
  auto section = [&](const char* key) -> const toml::table* {
    const auto* n = root.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) {
      errors.push_back(at_line(line_of(*n)) + key + " must be a table");
      return nullptr;
    }
    return n->as_table();
  };
  if (const auto* t = section("sampling")) parse_sampling(*t, line_of(*t), s, errors);
  if (const auto* t = section("systems")) parse_systems(*t, s, errors);
  if (const auto* t = section("weights")) parse_weights(*t, base_dir, s, errors);
  if (const auto* t = section("functions")) parse_functions(*t, s, errors);
  if (const auto* t = section("box")) parse_box(*t, line_of(*t), s, errors);
  if (const auto* tasks = root.get("tasks")) {
    const auto* arr = tasks->as_array();
    if (!arr) {
      errors.push_back(at_line(line_of(*tasks)) + "tasks must be an array of tables ([[tasks]])");
    } else {
      for (const auto& item : *arr) {
        const auto* tbl = item.as_table();
        if (!tbl) {
          errors.push_back(at_line(line_of(item)) + "each task must be a table");
          continue;
        }
        Task task;
        task.line = line_of(item);
        const auto* op = tbl->get("op");
        if (!op || !op->is_string()) {
          errors.push_back(at_line(task.line) + "task needs a string 'op'");
          continue;
        }
        task.op = *op->value<std::string>();
        task.params = Json::object();
        for (const auto& [k, v] : *tbl) {
          if (k.str() != "op") task.params[std::string(k.str())] = to_json(v);
        }
        s.tasks.push_back(std::move(task));
      }
    }
  }
  for (const auto& task : s.tasks) {
    auto more = validate_task(s, task);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return s;
}

Scenario load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Running

namespace {

Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json snapped_json(const SnappedExponent& e) {
  Json j;
  j["value"] = e.to_string();
  j["numeric"] = num(e.value());
  j["infinite"] = e.infinite;
  j["snapped"] = e.snapped;
  if (e.snapped) {
    j["numerator"] = e.numerator;
    j["denominator"] = e.denominator;
  }
  return j;
}

Json fit_json(const GrowthFit& f) {
  Json j;
  j["raw_exponent"] = num(f.raw_exponent);
  j["snapped"] = snapped_json(f.snapped);
  j["constant"] = num(f.constant);
  j["residual"] = num(f.residual);
  j["warnings"] = f.warnings;
  j["caveat"] = f.caveat;
  return j;
}

std::string directions_csv(const SamplingPlan& plan, const std::vector<double>& exponents) {
  std::ostringstream out;
  out.precision(17);
  out << "direction";
  for (std::size_t i = 0; i < plan.num_vars; ++i) out << ",theta_" << i + 1;
  out << ",exponent\n";
  for (std::size_t d = 0; d < plan.directions.size(); ++d) {
    out << d;
    for (double c : plan.directions[d]) out << "," << c;
    const double e = exponents[d];
    out << ",";
    if (std::isnan(e)) out << "nan";
    else if (std::isinf(e)) out << (e > 0 ? "inf" : "-inf");
    else out << e;
    out << "\n";
  }
  return out.str();
}

Json verdict_json(const AxiomResult& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["value"] = num(r.value);
  j["note"] = r.note;
  return j;
}

Json seminorm_json(const SeminormResult& r) {
  Json j;
  j["log_value"] = num(r.log_value);
  j["plateau"] = r.plateau;
  j["tail_increasing"] = r.tail_increasing;
  j["argmax_shell"] = r.argmax_shell;
  if (!r.hint.empty()) j["hint"] = r.hint;
  return j;
}

Json classify_json(const ClassifyReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["mode"] = to_string(r.mode);
  j["lambda_star"] = num(r.lambda_star);
  Json ladder = Json::array();
  for (const auto& [lambda, s] : r.ladder) {
    Json e = seminorm_json(s);
    e["lambda"] = lambda;
    ladder.push_back(std::move(e));
  }
  j["ladder"] = std::move(ladder);
  if (!r.hint.empty()) j["hint"] = r.hint;
  return j;
}

ClassMode parse_mode(const Json& params) {
  return params.value("mode", std::string("beurling")) == "roumieu" ? ClassMode::kRoumieu : ClassMode::kBeurling;
}

struct TaskOutcome {
  Json result;
  std::vector<std::string> flags;  // theorem-consistency flags
  std::string line;                // one-line summary
};

class Runner {
 public:
  explicit Runner(const Scenario& s) : s_(s), snap_{s.sampling.snap_den, s.sampling.snap_tol} {}

  TaskOutcome run(const Task& task, std::size_t index, std::map<std::string, std::string>& files) {
    const Json& p = task.params;
    const std::string prefix = "task" + std::to_string(index) + "_" + task.op;
    TaskOutcome out;
    if (task.op == "estimate-gamma") {
      const auto& sys = system(p["system"]);
      const int alpha_max = p.contains("alpha_max") ? p["alpha_max"].get<int>()
                                                    : std::max(sys.order(), s_.sampling.alpha_max);
      const auto plan = plan_for(sys.num_vars());
      const auto g = estimate_gamma(sys, plan, alpha_max, snap_);
      out.result["operation"] = "symbol-analysis.estimate_gamma";
      out.result["gamma"] = fit_json(g.fit);
      out.result["order"] = sys.order();
      out.result["alpha_max"] = alpha_max;
      Json per_alpha = Json::array();
      for (const auto& a : g.per_alpha) {
        per_alpha.push_back({{"alpha", a.alpha}, {"exponent", num(a.exponent)}, {"gamma", num(a.gamma)},
                             {"infinite_marker", a.infinite_marker}});
      }
      out.result["per_alpha"] = std::move(per_alpha);
      out.result["directions_csv"] = prefix + "_directions.csv";
      files[prefix + "_directions.csv"] = directions_csv(plan, g.fit.per_direction);
      if (!g.fit.snapped.infinite && g.fit.snapped.value() < sys.order()) out.flags.push_back("gamma below order m");
      out.line = "gamma=" + g.fit.snapped.to_string();
    } else if (task.op == "estimate-h") {
      const auto& q = system(p["q"]);
      const auto& ps = system(p["p"]);
      const auto plan = plan_for(ps.num_vars());
      const auto fit = estimate_h(q, ps, plan, snap_);
      out.result["operation"] = "symbol-analysis.estimate_h";
      out.result["h"] = fit_json(fit);
      out.result["directions_csv"] = prefix + "_directions.csv";
      files[prefix + "_directions.csv"] = directions_csv(plan, fit.per_direction);
      out.line = "h=" + fit.snapped.to_string();
    } else if (task.op == "check-elliptic") {
      const auto& sys = system(p["system"]);
      const auto plan = plan_for(sys.num_vars());
      const auto r = check_elliptic(sys, plan, snap_);
      out.result["operation"] = "symbol-analysis.check_elliptic";
      out.result["elliptic"] = to_string(r.elliptic);
      out.result["asymptotic_test"] = r.asymptotic_test;
      out.result["sphere_test"] = r.sphere_test;
      out.result["margin"] = num(r.margin);
      out.result["sphere_max"] = num(r.sphere_max);
      out.result["sphere_points"] = r.sphere_points;
      out.result["asymptotic"] = fit_json(r.asymptotic);
      if (!r.diagnostics.empty()) out.result["diagnostics"] = r.diagnostics;
      out.line = "elliptic=" + to_string(r.elliptic);
    } else if (task.op == "compare") {
      const auto& ps = system(p["p"]);
      const auto& q = system(p["q"]);
      const auto plan = plan_for(ps.num_vars());
      const auto r = compare_strength(ps, q, plan, snap_);
      out.result["operation"] = "symbol-analysis.compare_strength";
      out.result["h_q_weaker_than_p"] = fit_json(r.q_weaker_than_p);
      out.result["h_p_weaker_than_q"] = fit_json(r.p_weaker_than_q);
      out.result["one_equally_strong"] = r.one_equally_strong;
      out.result["consistency_checked"] = r.consistency_checked;
      out.result["consistency_ok"] = r.consistency_ok;
      if (r.consistency_checked) {
        out.result["gamma_p"] = snapped_json(r.gamma_p);
        out.result["gamma_q"] = snapped_json(r.gamma_q);
      }
      if (!r.diagnostics.empty()) out.result["diagnostics"] = r.diagnostics;
      if (!r.consistency_ok) out.flags.push_back("1-equally strong systems disagree on order or gamma");
      out.line = "h(Q<P)=" + r.q_weaker_than_p.snapped.to_string() + " h(P<Q)=" + r.p_weaker_than_q.snapped.to_string() +
                 (r.one_equally_strong ? " (1-equally strong)" : "");
    } else if (task.op == "weight-axioms") {
      const auto& w = weight(p["weight"]);
      const double t_max = p.value("t_max", 1e6);
      const auto r = check_weight_axioms(w, t_max);
      const YoungConjugate conj(w);
      std::vector<double> ys{0.0};
      for (int k = 0; k < 200; ++k) ys.push_back(1e-2 * std::pow(1e5, k / 199.0));
      const auto shape = check_conjugate_shape(conjugate_table(conj, ys), 1e-7);
      out.result["operation"] = "weight-functions.check_weight_axioms";
      out.result["weight"] = w.describe();
      out.result["t_max"] = t_max;
      out.result["alpha"] = verdict_json(r.alpha);
      out.result["beta"] = verdict_json(r.beta);
      out.result["gamma"] = verdict_json(r.gamma);
      out.result["gamma_prime"] = verdict_json(r.gamma_prime);
      out.result["gamma_prime_a"] = num(r.gamma_prime_a);
      out.result["delta"] = verdict_json(r.delta);
      out.result["bmm"] = verdict_json(r.bmm);
      out.result["l_tilde"] = num(r.l_tilde);
      out.result["l_prime"] = num(r.l_prime);
      out.result["non_quasianalytic_weight"] = r.non_quasianalytic_weight();
      out.result["conjugate_shape"] = {{"convex", shape.convex},
                                       {"increasing", shape.increasing},
                                       {"ratio_nondecreasing", shape.ratio_nondecreasing},
                                       {"zero_at_origin", shape.zero_at_origin},
                                       {"min_second_difference", num(shape.min_second_difference)}};
      out.line = w.describe() + (r.non_quasianalytic_weight() ? " satisfies all axioms" : " fails some axiom");
    } else if (task.op == "lemma-sweep") {
      out = lemma_sweep(p);
    } else if (task.op == "iterate-norms") {
      const auto& sys = system(p["system"]);
      const int b_max = p.value("b_max", default_b_max(sys.size()));
      const auto table = iterate_norm_table(sys, function(p["function"]), *s_.box, b_max);
      out.result["operation"] = "iterates-engine.iterate_norm_table";
      out.result["b_max"] = b_max;
      out.result["entries"] = table.log_norms.size();
      out.result["log_domain"] = true;
      Json shells = Json::array();
      for (double v : table.shell_max()) shells.push_back(num(v));
      out.result["shell_max_log_norm"] = std::move(shells);
      out.result["table_csv"] = prefix + "_norms.csv";
      files[prefix + "_norms.csv"] = table.to_csv();
      out.line = std::to_string(table.log_norms.size()) + " norms up to |beta|=" + std::to_string(b_max);
    } else if (task.op == "seminorm") {
      const auto& sys = system(p["system"]);
      const int b_max = p.value("b_max", default_b_max(sys.size()));
      const auto r = seminorm(sys, function(p["function"]), *s_.box, p["lambda"].get<double>(), weight(p["weight"]), b_max);
      out.result["operation"] = "iterates-engine.seminorm";
      out.result["lambda"] = p["lambda"];
      out.result["b_max"] = b_max;
      out.result["log_domain"] = true;
      out.result["seminorm"] = seminorm_json(r);
      out.line = "log seminorm=" + num(r.log_value).dump() + (r.plateau ? "" : " (no plateau)");
    } else if (task.op == "classify") {
      const auto& sys = system(p["system"]);
      const int b_max = p.value("b_max", default_b_max(sys.size()));
      const auto table = iterate_norm_table(sys, function(p["function"]), *s_.box, b_max);
      const auto r = classify_membership(table, weight(p["weight"]), sys.order(), parse_mode(p));
      out.result["operation"] = "iterates-engine.classify_membership";
      out.result["b_max"] = b_max;
      out.result["classification"] = classify_json(r);
      out.line = to_string(r.verdict) + " (" + to_string(r.mode) + ")";
    } else if (task.op == "verify-inclusion") {
      std::vector<NamedFunction> testset;
      for (const auto& name : p["functions"]) testset.push_back({name.get<std::string>(), function(name)});
      InclusionOptions opts;
      opts.mode = parse_mode(p);
      if (p.contains("gamma_p")) opts.gamma_p = p["gamma_p"].get<double>();
      opts.b_max_p = p.value("b_max_p", 0);
      opts.b_max_q = p.value("b_max_q", 0);
      const auto r = verify_inclusion(system(p["p"]), system(p["q"]), weight(p["weight"]), p["s"].get<double>(),
                                      p["h"].get<double>(), testset, *s_.box, opts);
      out.result["operation"] = "iterates-engine.verify_inclusion";
      out.result["omega_prime"] = r.omega_prime.describe();
      out.result["sigma_prime"] = r.sigma_prime.describe();
      out.result["gamma_p"] = num(r.gamma_p);
      out.result["mode"] = to_string(opts.mode);
      Json entries = Json::array();
      for (const auto& e : r.entries) {
        Json j;
        j["function"] = e.name;
        j["p_class"] = classify_json(e.p_class);
        if (e.q_class) j["q_class"] = classify_json(*e.q_class);
        j["violation"] = e.violation;
        if (!e.diagnostics.empty()) j["diagnostics"] = e.diagnostics;
        entries.push_back(std::move(j));
      }
      out.result["entries"] = std::move(entries);
      out.result["violations"] = r.violations;
      out.result["warnings"] = r.warnings;
      if (r.violations > 0) out.flags.push_back(std::to_string(r.violations) + " inclusion violation(s)");
      out.line = std::to_string(r.entries.size()) + " functions checked, " + std::to_string(r.violations) + " violations";
    }
    return out;
  }

 private:
  const OperatorSystem& system(const Json& name) const { return s_.systems.at(name.get<std::string>()); }
  const WeightFunction& weight(const Json& name) const { return s_.weights.at(name.get<std::string>()); }
  const TestFunction& function(const Json& name) const { return s_.functions.at(name.get<std::string>()); }

  SamplingPlan plan_for(std::size_t n) const {
    return SamplingPlan::make(n, s_.seed, s_.sampling.radii, s_.sampling.directions, s_.sampling.r_min,
                              s_.sampling.r_max);
  }

  TaskOutcome lemma_sweep(const Json& p) const {
    const auto cases = p.value("cases", 500);
    const double s_min = p.value("s_min", 1.2), s_max = p.value("s_max", 4.0);
    const double h_min = p.value("h_min", 0.5), h_max = p.value("h_max", 4.0);
    const double l_min = p.value("lambda_min", 0.25), l_max = p.value("lambda_max", 4.0);
    const double log_t_max = p.value("log_t_max", 10.0);
    const long j_max = p.value("j_max", 100'000'000L);
    const double slack = p.value("slack", 1e-6);
    std::mt19937_64 rng(s_.seed);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    struct Case {
      double s, h, lambda, log_t;
    };
    std::vector<Case> all;
    for (int k = 0; k < cases; ++k) {
      Case c;
      c.s = uniform(s_min, s_max);
      c.h = uniform(h_min, h_max);
      c.lambda = uniform(l_min, l_max);
      c.log_t = uniform(0.0, log_t_max);
      all.push_back(c);
    }
    std::vector<LemmaJReport> reports(all.size());
    parallel_for(all.size(), [&](std::size_t k) {
      const auto& c = all[k];
      reports[k] = check_lemma_J(WeightFunction::gevrey(c.s), c.h, c.lambda, std::exp(c.log_t), j_max, slack);
    });
    TaskOutcome out;
    std::size_t passed = 0, failed = 0;
    double worst_lower = kInfinity, worst_upper = kInfinity;
    Json failures = Json::array();
    for (std::size_t k = 0; k < all.size(); ++k) {
      const auto& r = reports[k];
      passed += r.verdict == Verdict::kPass;
      if (r.verdict == Verdict::kFail) {
        ++failed;
        if (failures.size() < 20) {
          failures.push_back({{"s", all[k].s}, {"h", all[k].h}, {"lambda", all[k].lambda}, {"log_t", all[k].log_t},
                              {"log_sup", num(r.log_sup)}, {"log_lower", num(r.log_lower)},
                              {"log_upper", num(r.log_upper)}});
        }
      }
      worst_lower = std::min(worst_lower, r.log_sup - r.log_lower);
      worst_upper = std::min(worst_upper, r.log_upper - r.log_sup);
    }
    out.result["operation"] = "weight-functions.check_lemma_J";
    out.result["cases"] = cases;
    out.result["passed"] = passed;
    out.result["failed"] = failed;
    out.result["inconclusive"] = all.size() - passed - failed;
    out.result["min_log_margin_lower"] = num(worst_lower);
    out.result["min_log_margin_upper"] = num(worst_upper);
    out.result["failures"] = std::move(failures);
    if (failed > 0) out.flags.push_back(std::to_string(failed) + " sandwich case(s) violated");
    out.line = std::to_string(passed) + "/" + std::to_string(cases) + " cases pass";
    return out;
  }

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  const Scenario& s_;
  SnapOptions snap_;
};

}  // namespace

RunResult run_scenario(const Scenario& s) {
  RunResult result;
  Json report;
  report["tool"] = {{"name", "iterlab"}, {"version", kToolVersion}};
  report["provenance"] = {{"seed", s.seed},
                          {"sampling",
                           {{"radii", s.sampling.radii},
                            {"directions", s.sampling.directions},
                            {"r_min", s.sampling.r_min},
                            {"r_max", s.sampling.r_max},
                            {"snap_den", s.sampling.snap_den},
                            {"snap_tol", s.sampling.snap_tol},
                            {"alpha_max", s.sampling.alpha_max}}}};
  Json tasks = Json::array();
  std::ostringstream summary;
  summary << "iterlab " << kToolVersion << "  seed=" << s.seed << "\n";
  std::size_t errors = 0, flags = 0;
  Runner runner(s);
  for (std::size_t i = 0; i < s.tasks.size(); ++i) {
    const auto& task = s.tasks[i];
    Json entry;
    entry["index"] = i;
    entry["op"] = task.op;
    entry["params"] = task.params;
    const auto start = std::chrono::steady_clock::now();
    std::string line;
    try {
      auto problems = validate_task(s, task);
      if (!problems.empty()) throw ConfigError(problems);
      auto out = runner.run(task, i, result.files);
      entry["status"] = "ok";
      entry["result"] = std::move(out.result);
      entry["consistency_flags"] = out.flags;
      flags += out.flags.size();
      line = out.line;
      for (const auto& f : out.flags) line += "  [FLAG] " + f;
    } catch (const std::exception& e) {
      entry["status"] = "error";
      entry["error"] = e.what();
      ++errors;
      line = std::string("ERROR: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream head;
    head.precision(3);
    head << std::fixed << "[" << i << "] " << task.op;
    if (task.params.contains("name")) head << " (" << task.params["name"].get<std::string>() << ")";
    head << "  " << seconds << " s\n    " << line << "\n";
    summary << head.str();
    tasks.push_back(std::move(entry));
  }
  report["tasks"] = std::move(tasks);
  report["task_errors"] = errors;
  report["consistency_flags"] = flags;
  result.exit_code = (errors > 0 || flags > 0) ? 1 : 0;
  summary << "errors=" << errors << " consistency_flags=" << flags << " exit=" << result.exit_code << "\n";
  result.report = std::move(report);
  result.summary = summary.str();
  return result;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
  };
  write("report.json", dump_report(result.report));
  write("summary.txt", result.summary);
  for (const auto& [name, content] : result.files) write(name, content);
}

}  // namespace iterlab
