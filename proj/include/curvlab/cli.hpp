#pragma once
// Problem files, the command implementations behind the `curvlab` tool and
// their JSON / CSV reports.
//
// Reports are written with a fixed key order and shortest round-trip floats,
// and never contain timestamps or output paths, so one configuration always
// produces the same bytes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvlab/boundary_calculus.hpp"
#include "curvlab/bubbles.hpp"
#include "curvlab/core.hpp"
#include "curvlab/diskgrid.hpp"
#include "curvlab/identities.hpp"
#include "curvlab/prescription.hpp"
#include "curvlab/solver.hpp"
#include "curvlab/validation.hpp"

namespace curvlab {

using Json = nlohmann::ordered_json;

/// Malformed problem file or command-line input; carries every problem found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s;
    for (const auto& x : e) s += (s.empty() ? "" : "; ") + x;
    return s;
  }
  std::vector<std::string> errors_;
};

struct Tolerances {
  double interior = 1e-8;      // PDE residual, r < 1
  double boundary = 1e-7;      // boundary condition residual
  double identity = 1e-6;      // Pohozaev / Kazdan-Warner / energy
  double gauss_bonnet = 1e-8;
  double candidate = 1e-10;    // blow-up condition residuals
  double profile = 1e-8;       // solved vs closed-form profile, sup norm
  double limit = 1e-2;         // extrapolated λ -> 1 limits
};

/// Constant pair and centre of a disk bubble.
struct BubbleSpec {
  double k0 = 1.0;
  double h0 = 0.0;
  Point a{0.0, 0.0};
};

struct SequenceSpec {
  Point p{1.0, 0.0};
  std::vector<double> lambdas{0.9, 0.99, 0.999};
  double cap_radius = 0.3;
  double alpha = 0.25;
  bool remainder = true;
};

struct ProblemConfig {
  CurvatureData data{Poly2::constant(0.0), TrigPoly::constant(1.0)};
  int n_r = 48;
  int n_theta = 192;
  Tolerances tol;
  SolverOptions solver;
  std::string output_dir = "curvlab-out";
  BubbleSpec bubble;
  std::optional<BubbleSpec> initial;
  SequenceSpec sequence;
};

namespace detail {

class ConfigReader {
 public:
  std::vector<std::string> errors;

  void keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : allowed) known = known || it.key() == k;
      if (!known) errors.push_back("unknown key \"" + it.key() + "\"" + (where.empty() ? "" : " in \"" + where + "\""));
    }
  }

  bool object(const nlohmann::json& j, const std::string& where) {
    if (j.is_object()) return true;
    errors.push_back("\"" + where + "\" must be an object");
    return false;
  }

  std::optional<double> number(const nlohmann::json& j, const std::string& where) {
    if (j.is_number() && std::isfinite(j.get<double>())) return j.get<double>();
    errors.push_back("\"" + where + "\" must be a finite number");
    return std::nullopt;
  }

  std::optional<double> positive(const nlohmann::json& j, const std::string& where) {
    auto v = number(j, where);
    if (v && !(*v > 0.0)) {
      errors.push_back("\"" + where + "\" must be positive");
      return std::nullopt;
    }
    return v;
  }

  std::optional<int> integer(const nlohmann::json& j, const std::string& where, int lo, int hi) {
    if (!j.is_number_integer()) {
      errors.push_back("\"" + where + "\" must be an integer");
      return std::nullopt;
    }
    const long long v = j.get<long long>();
    if (v < lo || v > hi) {
      errors.push_back("\"" + where + "\" = " + std::to_string(v) + " is outside [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
      return std::nullopt;
    }
    return static_cast<int>(v);
  }

  std::optional<Point> point(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      errors.push_back("\"" + where + "\" must be a pair [x, y]");
      return std::nullopt;
    }
    return Point(j[0].get<double>(), j[1].get<double>());
  }

  std::vector<double> numbers(const nlohmann::json& j, const std::string& where) {
    std::vector<double> out;
    if (!j.is_array()) {
      errors.push_back("\"" + where + "\" must be an array of numbers");
      return out;
    }
    for (std::size_t k = 0; k < j.size(); ++k) {
      auto v = number(j[k], where + "[" + std::to_string(k) + "]");
      out.push_back(v.value_or(0.0));
    }
    return out;
  }

  std::optional<Poly2> poly(const nlohmann::json& j) {
    if (j.is_number()) return Poly2::constant(j.get<double>());
    if (!j.is_array()) {
      errors.push_back("\"K\" must be a number or an array of [i, j, c] terms");
      return std::nullopt;
    }
    std::vector<Poly2::Term> terms;
    for (std::size_t k = 0; k < j.size(); ++k) {
      const auto& t = j[k];
      const std::string where = "K[" + std::to_string(k) + "]";
      if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
          !t[2].is_number() || t[0].get<long long>() < 0 || t[1].get<long long>() < 0 ||
          t[0].get<long long>() > 64 || t[1].get<long long>() > 64) {
        errors.push_back("\"" + where + "\" must be [i, j, c] with exponents in 0..64");
        continue;
      }
      terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
    }
    if (terms.empty()) terms.push_back({0, 0, 0.0});
    return Poly2(terms);
  }

  std::optional<TrigPoly> trig(const nlohmann::json& j) {
    if (j.is_number()) return TrigPoly::constant(j.get<double>());
    if (!object(j, "h")) return std::nullopt;
    keys(j, "h", {"cos", "sin"});
    TrigPoly t;
    if (j.contains("cos")) t.cos = numbers(j["cos"], "h.cos");
    if (j.contains("sin")) t.sin = numbers(j["sin"], "h.sin");
    if (t.cos.empty()) t.cos.push_back(0.0);
    if (t.sin.empty()) t.sin.push_back(0.0);
    return t;
  }

  void bubble(const nlohmann::json& j, const std::string& where, BubbleSpec& b) {
    if (!object(j, where)) return;
    keys(j, where, {"k0", "h0", "a"});
    if (j.contains("k0")) b.k0 = number(j["k0"], where + ".k0").value_or(b.k0);
    if (j.contains("h0")) b.h0 = number(j["h0"], where + ".h0").value_or(b.h0);
    if (j.contains("a")) b.a = point(j["a"], where + ".a").value_or(b.a);
  }
};

inline void validate_bubble(const BubbleSpec& b, const std::string& where, std::vector<std::string>& errors) {
  if (!admissible_pair(b.k0, b.h0))
    errors.push_back("\"" + where + "\": (k0, h0) = (" + std::to_string(b.k0) + ", " + std::to_string(b.h0) +
                     ") is not admissible (need k0 > 0 or h0 > sqrt(-k0))");
  if (!(std::abs(b.a) < 1.0)) errors.push_back("\"" + where + ".a\" must lie inside the unit disk");
}

inline void validate_sequence(SequenceSpec& s, std::vector<std::string>& errors) {
  if (std::abs(std::abs(s.p) - 1.0) > 1e-9) {
    errors.push_back("\"sequence.p\" must lie on the unit circle");
  } else {
    s.p /= std::abs(s.p);
  }
  if (s.lambdas.empty()) errors.push_back("\"sequence.lambdas\" must not be empty");
  for (std::size_t k = 0; k < s.lambdas.size(); ++k) {
    if (!(s.lambdas[k] > 0.0 && s.lambdas[k] < 1.0)) errors.push_back("\"sequence.lambdas\" must lie in (0, 1)");
    else if (k > 0 && !(s.lambdas[k] > s.lambdas[k - 1])) errors.push_back("\"sequence.lambdas\" must increase");
  }
  if (!(s.alpha > 0.0 && s.alpha < 0.5)) errors.push_back("\"sequence.alpha\" must lie in (0, 1/2)");
}

}  // namespace detail

/// Builds a configuration from parsed JSON, collecting every error before
/// throwing.
inline ProblemConfig parse_config(const nlohmann::json& j) {
  detail::ConfigReader rd;
  ProblemConfig cfg;
  if (!rd.object(j, "<root>")) throw ConfigError(rd.errors);
  rd.keys(j, "", {"K", "h", "grid", "tolerances", "solver", "output", "bubble", "initial", "sequence"});

  if (j.contains("K"))
    if (auto K = rd.poly(j["K"])) cfg.data.K = *K;
  if (j.contains("h"))
    if (auto h = rd.trig(j["h"])) cfg.data.h = *h;

  if (j.contains("grid") && rd.object(j["grid"], "grid")) {
    const auto& g = j["grid"];
    rd.keys(g, "grid", {"n_r", "n_theta"});
    if (g.contains("n_r")) cfg.n_r = rd.integer(g["n_r"], "grid.n_r", 8, 256).value_or(cfg.n_r);
    if (g.contains("n_theta")) {
      if (auto nt = rd.integer(g["n_theta"], "grid.n_theta", 16, 1024)) {
        if (*nt % 2 != 0) rd.errors.push_back("\"grid.n_theta\" = " + std::to_string(*nt) + " must be even");
        else cfg.n_theta = *nt;
      }
    }
  }

  if (j.contains("tolerances") && rd.object(j["tolerances"], "tolerances")) {
    const auto& t = j["tolerances"];
    rd.keys(t, "tolerances",
            {"interior", "boundary", "identity", "gauss_bonnet", "candidate", "profile", "limit"});
    auto set = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = rd.positive(t[key], std::string("tolerances.") + key).value_or(dst);
    };
    set("interior", cfg.tol.interior);
    set("boundary", cfg.tol.boundary);
    set("identity", cfg.tol.identity);
    set("gauss_bonnet", cfg.tol.gauss_bonnet);
    set("candidate", cfg.tol.candidate);
    set("profile", cfg.tol.profile);
    set("limit", cfg.tol.limit);
  }

  if (j.contains("solver") && rd.object(j["solver"], "solver")) {
    const auto& s = j["solver"];
    rd.keys(s, "solver", {"max_iter", "damping", "augment_barycenter"});
    if (s.contains("max_iter")) cfg.solver.max_iter = rd.integer(s["max_iter"], "solver.max_iter", 1, 1000).value_or(50);
    if (s.contains("damping")) {
      if (s["damping"].is_boolean()) cfg.solver.damping = s["damping"].get<bool>();
      else rd.errors.push_back("\"solver.damping\" must be a boolean");
    }
    if (s.contains("augment_barycenter")) {
      const auto& a = s["augment_barycenter"];
      if (a == "auto") cfg.solver.augment_barycenter = Augment::automatic;
      else if (a == "on") cfg.solver.augment_barycenter = Augment::on;
      else if (a == "off") cfg.solver.augment_barycenter = Augment::off;
      else rd.errors.push_back("\"solver.augment_barycenter\" must be \"auto\", \"on\" or \"off\"");
    }
  }

  if (j.contains("output") && rd.object(j["output"], "output")) {
    const auto& o = j["output"];
    rd.keys(o, "output", {"dir"});
    if (o.contains("dir")) {
      if (o["dir"].is_string() && !o["dir"].get<std::string>().empty()) cfg.output_dir = o["dir"].get<std::string>();
      else rd.errors.push_back("\"output.dir\" must be a non-empty string");
    }
  }

  if (j.contains("bubble")) rd.bubble(j["bubble"], "bubble", cfg.bubble);
  if (j.contains("initial")) {
    BubbleSpec b;
    rd.bubble(j["initial"], "initial", b);
    cfg.initial = b;
  }

  if (j.contains("sequence") && rd.object(j["sequence"], "sequence")) {
    const auto& s = j["sequence"];
    rd.keys(s, "sequence", {"p", "lambdas", "cap_radius", "alpha", "remainder"});
    if (s.contains("p")) cfg.sequence.p = rd.point(s["p"], "sequence.p").value_or(cfg.sequence.p);
    if (s.contains("lambdas")) cfg.sequence.lambdas = rd.numbers(s["lambdas"], "sequence.lambdas");
    if (s.contains("cap_radius")) {
      auto r = rd.positive(s["cap_radius"], "sequence.cap_radius");
      if (r && *r >= 2.0) rd.errors.push_back("\"sequence.cap_radius\" must be below 2");
      else if (r) cfg.sequence.cap_radius = *r;
    }
    if (s.contains("alpha")) cfg.sequence.alpha = rd.number(s["alpha"], "sequence.alpha").value_or(cfg.sequence.alpha);
    if (s.contains("remainder")) {
      if (s["remainder"].is_boolean()) cfg.sequence.remainder = s["remainder"].get<bool>();
      else rd.errors.push_back("\"sequence.remainder\" must be a boolean");
    }
  }

  detail::validate_bubble(cfg.bubble, "bubble", rd.errors);
  if (cfg.initial) detail::validate_bubble(*cfg.initial, "initial", rd.errors);
  detail::validate_sequence(cfg.sequence, rd.errors);
  if (!rd.errors.empty()) throw ConfigError(rd.errors);
  return cfg;
}

inline ProblemConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("invalid JSON: ") + e.what()});
  }
  return parse_config(j);
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file \"" + path + "\""});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Command-line overrides; unset members leave the configuration alone.
struct CliFlags {
  std::optional<double> k0, h0;
  std::optional<Point> a, p;
  std::optional<std::vector<double>> lambdas;
  std::optional<std::string> out;
};

/// --k0/--h0/--a set the bubble of `bubble` and `identities` and the initial
/// guess of `solve`; --p/--lambdas set the sequence.
inline void apply_flags(ProblemConfig& cfg, const CliFlags& f, const std::string& command) {
  std::vector<std::string> errors;
  auto patch = [&](BubbleSpec& b) {
    if (f.k0) b.k0 = *f.k0;
    if (f.h0) b.h0 = *f.h0;
    if (f.a) b.a = *f.a;
  };
  const bool bubble_flags = f.k0 || f.h0 || f.a;
  if (command == "solve" && bubble_flags) {
    if (!cfg.initial) cfg.initial = BubbleSpec{};
    patch(*cfg.initial);
    detail::validate_bubble(*cfg.initial, "--k0/--h0/--a", errors);
  } else if (bubble_flags) {
    patch(cfg.bubble);
    detail::validate_bubble(cfg.bubble, "--k0/--h0/--a", errors);
  }
  if (f.p) cfg.sequence.p = *f.p;
  if (f.lambdas) cfg.sequence.lambdas = *f.lambdas;
  if (f.p || f.lambdas) detail::validate_sequence(cfg.sequence, errors);
  if (f.out) {
    if (f.out->empty()) errors.push_back("--out must not be empty");
    else cfg.output_dir = *f.out;
  }
  if (!errors.empty()) throw ConfigError(errors);
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline Json point_json(Point z) { return Json::array({z.real(), z.imag()}); }

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json data_json(const CurvatureData& d) {
  Json K = Json::array();
  for (const auto& t : d.K.terms) K.push_back(Json::array({t.i, t.j, t.c}));
  return Json{{"K", K}, {"h", Json{{"cos", d.h.cos}, {"sin", d.h.sin}}}};
}

inline Json bubble_json(const BubbleSpec& b) { return Json{{"k0", b.k0}, {"h0", b.h0}, {"a", point_json(b.a)}}; }

inline const char* augment_name(Augment a) {
  switch (a) {
    case Augment::off: return "off";
    case Augment::on: return "on";
    case Augment::automatic: return "auto";
  }
  return "?";
}

/// The configuration as seen by the command; the output directory is left out
/// so reports do not depend on where they are written.
inline Json inputs_json(const ProblemConfig& c) {
  Json j = data_json(c.data);
  j["grid"] = Json{{"n_r", c.n_r}, {"n_theta", c.n_theta}};
  j["tolerances"] = Json{{"interior", c.tol.interior},         {"boundary", c.tol.boundary},
                         {"identity", c.tol.identity},         {"gauss_bonnet", c.tol.gauss_bonnet},
                         {"candidate", c.tol.candidate},       {"profile", c.tol.profile},
                         {"limit", c.tol.limit}};
  j["solver"] = Json{{"max_iter", c.solver.max_iter},
                     {"damping", c.solver.damping},
                     {"augment_barycenter", augment_name(c.solver.augment_barycenter)}};
  j["bubble"] = bubble_json(c.bubble);
  j["initial"] = c.initial ? bubble_json(*c.initial) : Json(nullptr);
  j["sequence"] = Json{{"p", point_json(c.sequence.p)},
                       {"lambdas", c.sequence.lambdas},
                       {"cap_radius", c.sequence.cap_radius},
                       {"alpha", c.sequence.alpha},
                       {"remainder", c.sequence.remainder}};
  return j;
}

inline std::string num(double x, int digits = 17) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

/// Accumulates checks and result values for one command.
class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  Json results = Json::object();
  std::vector<Check> checks;

  /// |value - reference| <= tolerance.
  void near(const std::string& name, const std::string& tag, double value, double reference, double tol) {
    checks.push_back({name, tag, value, reference, tol, std::isfinite(value) && std::abs(value - reference) <= tol});
  }
  void holds(const std::string& name, const std::string& tag, bool ok, double value = 0.0) {
    checks.push_back({name, tag, value, 0.0, 0.0, ok});
  }

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  Json to_json(const Json& inputs, int exit_code) const {
    Json cj = Json::array();
    int failed = 0;
    for (const auto& c : checks) {
      cj.push_back(Json{{"name", c.name},
                        {"tag", c.tag},
                        {"value", c.value},
                        {"reference", c.reference},
                        {"tolerance", c.tolerance},
                        {"pass", c.pass}});
      failed += c.pass ? 0 : 1;
    }
    Json j;
    j["command"] = command_;
    j["inputs"] = inputs;
    j["results"] = results;
    j["checks"] = cj;
    j["summary"] = Json{{"checks", checks.size()}, {"failed", failed}, {"exit_code", exit_code}};
    return j;
  }

 private:
  std::string command_;
};

/// Writes rows of numbers with a header, 17 significant digits.
inline void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << num(r[k]);
    os << '\n';
  }
}

inline void write_field(const std::filesystem::path& path, const DiskField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_csv(os, f);
}

struct CommandContext {
  const ProblemConfig& cfg;
  std::filesystem::path dir;
  std::ostream& log;
};

// --- bubble --------------------------------------------------------------

inline int cmd_bubble(const CommandContext& ctx, Report& rep) {
  const auto& cfg = ctx.cfg;
  const BubbleConstants consts = bubble_constants(cfg.bubble.k0, cfg.bubble.h0);
  const DiskBubble b(consts, cfg.bubble.a);
  const CurvatureData data{Poly2::constant(consts.K0), TrigPoly::constant(consts.h0)};
  const GridPtr grid = build_grid(cfg.n_r, cfg.n_theta);
  const DiskField u = DiskField::sample(grid, [&b](Point z) { return b(z); });

  const PdeResidual res = pde_residual(u, data);
  const double gb_grid = gauss_bonnet_residual(u, data);
  const double gb_graded = gauss_bonnet_residual(sample_field(smooth_field(b)), data);
  const DiskField psi1 = DiskField::sample(grid, [&](Point z) { return kernel_eval(consts, z).first; });
  const DiskField psi2 = DiskField::sample(grid, [&](Point z) { return kernel_eval(consts, z).second; });
  const PdeResidual k1 = linearized_residual(consts, psi1), k2 = linearized_residual(consts, psi2);

  rep.results["constants"] = Json{{"K0", consts.K0},
                                  {"h0", consts.h0},
                                  {"phi0", optional_json(consts.phi0)},
                                  {"lambda0", optional_json(consts.lambda0)},
                                  {"beta", optional_json(consts.beta)},
                                  {"degenerate", consts.degenerate}};
  rep.results["a"] = point_json(b.a());
  rep.results["max_on_grid"] = u.sup();
  rep.results["limit_energy"] = limit_energy(consts);

  const double tb = cfg.tol.boundary, ti = cfg.tol.interior, tg = cfg.tol.gauss_bonnet;
  rep.near("bubble_interior_residual", "liouville-equation", res.interior, 0.0, ti);
  rep.near("bubble_boundary_residual", "boundary-condition", res.boundary, 0.0, tb);
  rep.near("gauss_bonnet_grid", "gauss-bonnet", gb_grid, 0.0, tg);
  rep.near("gauss_bonnet_graded", "gauss-bonnet", gb_graded, 0.0, tg);
  rep.near("kernel_psi1_interior_residual", "linearized-kernel", k1.interior, 0.0, ti);
  rep.near("kernel_psi1_boundary_residual", "linearized-kernel", k1.boundary, 0.0, tb);
  rep.near("kernel_psi2_interior_residual", "linearized-kernel", k2.interior, 0.0, ti);
  rep.near("kernel_psi2_boundary_residual", "linearized-kernel", k2.boundary, 0.0, tb);

  write_field(ctx.dir / "bubble_field.csv", u);
  return 0;
}

// --- candidates ----------------------------------------------------------

inline int cmd_candidates(const CommandContext& ctx, Report& rep) {
  const auto& cfg = ctx.cfg;
  const CompactnessVerdict v = compactness_verdict(cfg.data, cfg.tol.candidate);
  const KWObstruction kw = kw_obstruction_check(cfg.data);

  Json cands = Json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& c : v.scan.candidates) {
    cands.push_back(Json{{"p", point_json(c.p)},
                         {"theta", c.theta},
                         {"phi", c.phi_at_p},
                         {"tangential_residual", c.tangential_residual},
                         {"normal_residual", c.normal_residual},
                         {"admissible", c.admissible},
                         {"beta", optional_json(c.beta)},
                         {"beta_degenerate", c.beta_degenerate}});
    rows.push_back({c.theta, c.p.real(), c.p.imag(), c.phi_at_p, c.tangential_residual, c.normal_residual,
                    c.admissible ? 1.0 : 0.0, c.beta.value_or(NAN)});
  }
  ctx.log << "verdict: " << v.describe() << '\n';
  rep.results["verdict"] = to_string(v.verdict);
  rep.results["description"] = v.describe();
  rep.results["degenerate_family"] = v.scan.degenerate_family;
  rep.results["candidates"] = cands;
  rep.results["kazdan_warner_obstruction"] = Json{{"obstructed", kw.obstructed},
                                                  {"reason", kw.reason},
                                                  {"disk_min", kw.disk_min},
                                                  {"disk_max", kw.disk_max},
                                                  {"boundary_min", kw.boundary_min},
                                                  {"boundary_max", kw.boundary_max}};

  for (std::size_t k = 0; k < v.scan.candidates.size(); ++k) {
    const auto& c = v.scan.candidates[k];
    const std::string id = "candidate_" + std::to_string(k);
    rep.near(id + "_tangential_residual", "blowup-condition", c.tangential_residual, 0.0, cfg.tol.candidate);
    rep.near(id + "_normal_residual", "blowup-condition", c.normal_residual, 0.0, cfg.tol.candidate);
  }

  const GridPtr grid = build_grid(cfg.n_r, cfg.n_theta);
  const PhiReport phi = phi_field(cfg.data, grid);
  std::vector<std::vector<double>> prow;
  for (std::size_t j = 0; j < phi.theta.size(); ++j)
    prow.push_back({phi.theta[j], phi.H[j], phi.mask[j] ? 1.0 : 0.0, phi.Phi[j], phi.Phi_tau[j], phi.Phi_nu[j]});
  write_table(ctx.dir / "phi_boundary.csv", {"theta", "h", "defined", "Phi", "Phi_tau", "Phi_nu"}, prow);
  write_table(ctx.dir / "candidates.csv",
              {"theta", "x", "y", "Phi", "tangential_residual", "normal_residual", "admissible", "beta"}, rows);
  return 0;
}

// --- solve ---------------------------------------------------------------

inline int cmd_solve(const CommandContext& ctx, Report& rep) {
  const auto& cfg = ctx.cfg;
  const GridPtr grid = build_grid(cfg.n_r, cfg.n_theta);
  DiskField initial(grid);
  if (cfg.initial) {
    const DiskBubble b(bubble_constants(cfg.initial->k0, cfg.initial->h0), cfg.initial->a);
    initial = DiskField::sample(grid, [&b](Point z) { return b(z); });
  }
  SolverOptions opt = cfg.solver;
  opt.tol_interior = cfg.tol.interior;
  opt.tol_boundary = cfg.tol.boundary;
  const SolveResult r = newton_solve(cfg.data, initial, opt);
  const KWObstruction kw = kw_obstruction_check(cfg.data);

  rep.results["converged"] = r.converged;
  rep.results["message"] = r.message;
  rep.results["iterations"] = r.iterations;
  rep.results["interior_residual"] = r.interior_residual;
  rep.results["boundary_residual"] = r.boundary_residual;
  rep.results["augmented"] = r.augmented;
  rep.results["condition_estimate"] = r.condition_estimate;
  rep.results["multipliers"] = Json::array({r.multipliers[0], r.multipliers[1]});
  rep.results["residual_history"] = r.residual_history;
  rep.results["kazdan_warner_obstruction"] = Json{{"obstructed", kw.obstructed}, {"reason", kw.reason}};

  std::vector<std::vector<double>> hist;
  for (std::size_t k = 0; k < r.residual_history.size(); ++k)
    hist.push_back({static_cast<double>(k), r.residual_history[k]});
  write_table(ctx.dir / "solve_history.csv", {"iteration", "residual"}, hist);
  write_field(ctx.dir / "solve_field.csv", r.u);

  rep.holds("newton_converged", "newton", r.converged, static_cast<double>(r.iterations));
  if (!r.converged) return 3;

  rep.near("solution_interior_residual", "liouville-equation", r.interior_residual, 0.0, cfg.tol.interior);
  rep.near("solution_boundary_residual", "boundary-condition", r.boundary_residual, 0.0, cfg.tol.boundary);
  const FieldSample s = sample_field(r.u);
  rep.near("gauss_bonnet", "gauss-bonnet", gauss_bonnet_residual(s, cfg.data), 0.0, cfg.tol.gauss_bonnet);
  const KWTerms kx = kazdan_warner_terms(s, cfg.data, KWDirection::x);
  const KWTerms ky = kazdan_warner_terms(s, cfg.data, KWDirection::y);
  rep.results["kazdan_warner_x"] = Json{{"lhs", kx.lhs}, {"rhs", kx.rhs}};
  rep.results["kazdan_warner_y"] = Json{{"lhs", ky.lhs}, {"rhs", ky.rhs}};
  rep.results["energy"] = energy(s, cfg.data);
  rep.near("kazdan_warner_x", "kazdan-warner", kx.residual(), 0.0, cfg.tol.identity);
  rep.near("kazdan_warner_y", "kazdan-warner", ky.residual(), 0.0, cfg.tol.identity);

  if (cfg.data.is_constant()) {
    const double K0 = cfg.data.K(0.0, 0.0), h0 = cfg.data.h(0.0);
    const BubbleConstants consts = bubble_constants(K0, h0);
    if (consts.admissible) {
      const BarycenterResult nb = normalize_barycenter(r.u);
      const DiskBubble v0(consts, 0.0);
      double diff = 0.0;
      const DiskGrid& g = *grid;
      for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) diff = std::max(diff, std::abs(nb.v.at(i, j) - v0(g.node(i, j))));
      rep.results["barycenter"] = Json{{"a", point_json(nb.a)}, {"gamma_norm", nb.gamma_norm}};
      rep.near("normalized_vs_closed_form", "closed-form-profile", diff, 0.0, cfg.tol.profile);
    }
  }
  return 0;
}

// --- sequence ------------------------------------------------------------

inline int cmd_sequence(const CommandContext& ctx, Report& rep) {
  const auto& cfg = ctx.cfg;
  const auto& sq = cfg.sequence;
  SequenceOptions opt;
  opt.cap_radius = sq.cap_radius;
  opt.alpha = sq.alpha;
  opt.n_r = cfg.n_r;
  opt.n_theta = cfg.n_theta;
  opt.remainder = sq.remainder;
  const SequenceDiagnostics d = synthetic_sequence(cfg.data, sq.p, sq.lambdas, opt);

  const BoundaryValue bv = eval_boundary(cfg.data, std::arg(d.p));
  const ConditionResiduals cr = condition_residuals(cfg.data, d.p);
  const double limit_I = pi * bv.H_nu;
  const double limit_II = -pi * bv.K_nu / (2.0 * d.phi_hat);
  const double limit_combined = 0.5 * pi * cr.normal;

  Json recs = Json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& r : d.records) {
    const auto& m = r.masses;
    recs.push_back(Json{{"lambda", r.lambda},
                        {"sup_u", r.sup_u},
                        {"interior_mass", m.interior_mass},
                        {"boundary_mass", m.boundary_mass},
                        {"cap_interior_mass", m.cap_interior_mass},
                        {"cap_boundary_mass", m.cap_boundary_mass},
                        {"energy", r.energy},
                        {"I_n", r.section5.I_n},
                        {"II_n", r.section5.II_n},
                        {"scaled_II", r.section5.scaled_II},
                        {"combined", r.section5.combined},
                        {"xi_sup", r.xi_sup},
                        {"xi_holder", r.xi_holder},
                        {"psi_holder", r.psi_holder},
                        {"psi_bound_shape", r.psi_bound_shape}});
    rows.push_back({r.lambda, r.sup_u, m.interior_mass, m.boundary_mass, m.cap_interior_mass, m.cap_boundary_mass,
                    r.energy, r.section5.I_n, r.section5.II_n, r.section5.scaled_II, r.section5.combined, r.xi_sup,
                    r.xi_holder, r.psi_holder, r.psi_bound_shape});
  }
  const auto& m0 = d.records.front().masses;
  rep.results["p"] = point_json(d.p);
  rep.results["phi_hat"] = d.phi_hat;
  rep.results["k_hat"] = d.k_hat;
  rep.results["beta"] = optional_json(m0.beta_expected);
  rep.results["condition_residuals"] = Json{{"tangential", cr.tangential}, {"normal", cr.normal}};
  rep.results["records"] = recs;
  write_table(ctx.dir / "sequence.csv",
              {"lambda", "sup_u", "interior_mass", "boundary_mass", "cap_interior_mass", "cap_boundary_mass",
               "energy", "I_n", "II_n", "scaled_II", "combined", "xi_sup", "xi_holder", "psi_holder",
               "psi_bound_shape"},
              rows);

  rep.holds("sup_strictly_increasing", "blowup-profile", d.sup_increasing(), d.records.back().sup_u);
  if (d.records.size() < 2) return 0;

  if (m0.beta_expected) {
    const double beta = *m0.beta_expected;
    bool int_ok = true, bdy_ok = true;
    for (std::size_t k = 1; k < d.records.size(); ++k) {
      const auto& a = d.records[k - 1].masses;
      const auto& b = d.records[k].masses;
      int_ok = int_ok && std::abs(b.cap_interior_mass - (two_pi - beta)) < std::abs(a.cap_interior_mass - (two_pi - beta));
      bdy_ok = bdy_ok && std::abs(b.cap_boundary_mass - beta) < std::abs(a.cap_boundary_mass - beta);
    }
    rep.holds("cap_interior_mass_approaches_2pi_minus_beta", "quantization", int_ok,
              d.records.back().masses.cap_interior_mass);
    rep.holds("cap_boundary_mass_approaches_beta", "quantization", bdy_ok, d.records.back().masses.cap_boundary_mass);
  }

  const auto& a = d.records[d.records.size() - 2];
  const auto& b = d.records.back();
  const double ta = 1.0 - a.lambda, tb = 1.0 - b.lambda;
  const double eI = extrapolate_linear(ta, a.section5.I_n, tb, b.section5.I_n);
  const double eII = extrapolate_linear(ta, a.section5.scaled_II, tb, b.section5.scaled_II);
  const double eC = extrapolate_linear(ta, a.section5.combined, tb, b.section5.combined);
  rep.results["extrapolated"] = Json{{"I_n", eI}, {"scaled_II", eII}, {"combined", eC}};
  rep.results["limits"] = Json{{"I_n", limit_I}, {"scaled_II", limit_II}, {"combined", limit_combined}};
  rep.near("boundary_integral_limit", "limit-identity", eI, limit_I, cfg.tol.limit);
  rep.near("interior_integral_limit", "limit-identity", eII, limit_II, cfg.tol.limit);
  rep.near("combined_limit_vs_normal_condition", "limit-identity", eC, limit_combined, cfg.tol.limit);
  return 0;
}

// --- identities ----------------------------------------------------------

inline int cmd_identities(const CommandContext& ctx, Report& rep) {
  const auto& cfg = ctx.cfg;
  const BubbleConstants consts = bubble_constants(cfg.bubble.k0, cfg.bubble.h0);
  const DiskBubble b(consts, cfg.bubble.a);
  const CurvatureData data{Poly2::constant(consts.K0), TrigPoly::constant(consts.h0)};
  const FieldSample graded = sample_field(smooth_field(b));
  const GridPtr grid = build_grid(cfg.n_r, cfg.n_theta);
  const FieldSample onGrid = sample_field(DiskField::sample(grid, [&b](Point z) { return b(z); }));

  struct Named {
    const char* name;
    VectorFieldPoly F;
  };
  const Named fields[] = {{"conformal_x", VectorFieldPoly::conformal_x()},
                          {"conformal_y", VectorFieldPoly::conformal_y()},
                          {"rotation", VectorFieldPoly::rotation()},
                          {"dilation", VectorFieldPoly::dilation()}};

  Json graded_j = Json::object(), grid_j = Json::object();
  auto record = [&](const char* name, double gv, double rv) {
    graded_j[name] = gv;
    grid_j[name] = rv;
  };
  const double gb = gauss_bonnet_residual(graded, data);
  record("gauss_bonnet", gb, gauss_bonnet_residual(onGrid, data));
  rep.near("gauss_bonnet", "gauss-bonnet", gb, 0.0, cfg.tol.gauss_bonnet);
  for (const auto& f : fields) {
    const double v = pohozaev_residual(graded, data, f.F);
    record(f.name, v, pohozaev_residual(onGrid, data, f.F));
    rep.near(std::string("pohozaev_") + f.name, "pohozaev", v, 0.0, cfg.tol.identity);
  }
  const double kx = kazdan_warner_residual(graded, data, KWDirection::x);
  const double ky = kazdan_warner_residual(graded, data, KWDirection::y);
  record("kazdan_warner_x", kx, kazdan_warner_residual(onGrid, data, KWDirection::x));
  record("kazdan_warner_y", ky, kazdan_warner_residual(onGrid, data, KWDirection::y));
  rep.near("kazdan_warner_x", "kazdan-warner", kx, 0.0, cfg.tol.identity);
  rep.near("kazdan_warner_y", "kazdan-warner", ky, 0.0, cfg.tol.identity);
  const double E = energy(graded, data);
  record("energy", E, energy(onGrid, data));
  rep.near("energy_vs_limit", "limit-energy", E, limit_energy(consts), cfg.tol.identity);

  rep.results["field"] = Json{{"k0", consts.K0}, {"h0", consts.h0}, {"a", point_json(b.a())}};
  rep.results["graded_quadrature"] = graded_j;
  rep.results["grid_quadrature"] = grid_j;
  rep.results["limit_energy"] = limit_energy(consts);

  std::ofstream os(ctx.dir / "identities.csv");
  if (!os) throw std::runtime_error("cannot write identities.csv");
  os << "quantity,graded,grid\n";
  for (auto it = graded_j.begin(); it != graded_j.end(); ++it)
    os << it.key() << ',' << num(it.value().get<double>()) << ',' << num(grid_j[it.key()].get<double>()) << '\n';
  return 0;
}

// --- validate ------------------------------------------------------------

inline int cmd_validate(const CommandContext& ctx, Report& rep) {
  const ValidationReport v = validation_suite();
  rep.checks = v.checks;
  Json series = Json::array();
  std::vector<std::vector<double>> lrows, hrows;
  for (const auto& s : v.series) {
    Json pairs = Json::array();
    for (const auto& [t, val] : s.pairs) {
      pairs.push_back(Json::array({t, val}));
      lrows.push_back({s.q, s.domain == LqDomain::disk ? 0.0 : 1.0, t, val});
    }
    series.push_back(Json{{"q", s.q},
                          {"domain", s.domain == LqDomain::disk ? "disk" : "boundary"},
                          {"slope", s.slope},
                          {"expected_slope", s.expected_slope},
                          {"calibration", s.calibration},
                          {"max_ratio", s.max_ratio},
                          {"bound_holds", s.bound_holds},
                          {"pairs", pairs}});
  }
  Json hp = Json::array();
  for (const auto& h : v.halfplane) {
    hp.push_back(Json{{"Phi", h.Phi},
                      {"K", h.K},
                      {"numeric", h.integral.numeric},
                      {"closed_form", h.integral.closed_form},
                      {"relative_gap", h.integral.relative_gap()}});
    hrows.push_back({h.Phi, h.K, h.integral.numeric, h.integral.closed_form, h.integral.relative_gap()});
  }
  rep.results["lq_series"] = series;
  rep.results["halfplane_integral"] = hp;
  write_table(ctx.dir / "lq_series.csv", {"q", "boundary", "one_minus_abs_a", "value"}, lrows);
  write_table(ctx.dir / "halfplane_integral.csv", {"Phi", "K", "numeric", "closed_form", "relative_gap"}, hrows);
  return 0;
}

}  // namespace detail

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"bubble", "candidates", "solve", "sequence", "identities", "validate"};
  return c;
}

/// Runs one command and writes <dir>/<command>.json plus its CSV tables.
/// Exit codes: 0 all checks pass, 1 some check fails, 2 malformed config or
/// arguments, 3 numeric failure (including Newton non-convergence).
inline int run(const std::string& command, const std::string& config_path, const CliFlags& flags,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  bool known = false;
  for (const auto& c : commands()) known = known || c == command;
  if (!known) {
    err << "curvlab: unknown command \"" << command << "\"\n";
    return 2;
  }
  ProblemConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    apply_flags(cfg, flags, command);
  } catch (const ConfigError& e) {
    for (const auto& m : e.errors()) err << "curvlab: config error: " << m << '\n';
    return 2;
  }

  const std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "curvlab: cannot create output directory \"" << dir.string() << "\": " << ec.message() << '\n';
    return 2;
  }

  detail::Report rep(command);
  const detail::CommandContext ctx{cfg, dir, out};
  int code = 0;
  try {
    if (command == "bubble") code = detail::cmd_bubble(ctx, rep);
    else if (command == "candidates") code = detail::cmd_candidates(ctx, rep);
    else if (command == "solve") code = detail::cmd_solve(ctx, rep);
    else if (command == "sequence") code = detail::cmd_sequence(ctx, rep);
    else if (command == "identities") code = detail::cmd_identities(ctx, rep);
    else code = detail::cmd_validate(ctx, rep);
  } catch (const NumericFailure& e) {
    err << "curvlab: numeric failure: " << e.what() << '\n';
    rep.results["error"] = e.what();
    code = 3;
  } catch (const std::invalid_argument& e) {  // DomainError derives from domain_error
    err << "curvlab: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "curvlab: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "curvlab: " << e.what() << '\n';
    return 3;
  }
  if (code == 0 && !rep.pass()) code = 1;

  for (const auto& c : rep.checks)
    out << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << detail::num(c.value, 6)
        << "  reference=" << detail::num(c.reference, 6) << "  tolerance=" << detail::num(c.tolerance, 3) << '\n';

  const Json j = rep.to_json(detail::inputs_json(cfg), code);
  const auto path = dir / (command + ".json");
  std::ofstream os(path);
  if (!os || !(os << j.dump(2) << '\n')) {
    err << "curvlab: cannot write " << path.string() << '\n';
    return 3;
  }
  out << "report: " << path.string() << "  exit " << code << '\n';
  return code;
}

}  // namespace curvlab
