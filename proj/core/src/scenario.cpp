#include "hyfsi/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace hyfsi {

namespace pt = boost::property_tree;

namespace {

constexpr double kPi = std::numbers::pi;

std::string field_name(Field f) {
  switch (f) {
    case Field::Background: return "background";
    case Field::Patch: return "patch";
    case Field::Solid: return "solid";
  }
  return "?";
}

Field field_from_string(const std::string& s) {
  if (s == "background") return Field::Background;
  if (s == "patch") return Field::Patch;
  if (s == "solid") return Field::Solid;
  throw ConfigError("unknown field '" + s + "' (expected background, patch or solid)");
}

std::string curve_name(TimeCurve::Kind k) {
  switch (k) {
    case TimeCurve::Kind::Constant: return "constant";
    case TimeCurve::Kind::SinRamp: return "sin_ramp";
    case TimeCurve::Kind::Sine: return "sine";
  }
  return "?";
}

TimeCurve::Kind curve_from_string(const std::string& s) {
  if (s == "constant") return TimeCurve::Kind::Constant;
  if (s == "sin_ramp") return TimeCurve::Kind::SinRamp;
  if (s == "sine") return TimeCurve::Kind::Sine;
  throw ConfigError("unknown time curve '" + s + "' (expected constant, sin_ramp or sine)");
}

bool same_bc(const DirichletBC& a, const DirichletBC& b) {
  return a.field == b.field && a.tag == b.tag && a.point == b.point && a.components == b.components &&
         a.curve == b.curve && a.c0 == b.c0 && a.cx == b.cx && a.cy == b.cy;
}

// ---------------------------------------------------------------------------
// Emission. Doubles use the shortest representation that parses back to the
// same value.

class Writer {
 public:
  void section(const std::string& name) {
    if (!out_.empty()) out_ += '\n';
    out_ += fmt::format("[{}]\n", name);
  }
  void kv(const std::string& key, const std::string& value) { out_ += fmt::format("{} = {}\n", key, value); }
  void kv(const std::string& key, double v) { kv(key, fmt::format("{}", v)); }
  void kv(const std::string& key, int v) { kv(key, fmt::format("{}", v)); }
  void kv(const std::string& key, bool v) { kv(key, std::string(v ? "true" : "false")); }
  void kv(const std::string& key, const Vec2& v) { kv(key, fmt::format("{} {}", v.x(), v.y())); }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

// ---------------------------------------------------------------------------
// Parsing helpers over one INI section. Every key must be consumed.

class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {
    for (const auto& [k, v] : tree_) {
      if (!v.empty()) throw ConfigError(fmt::format("[{}]: nested keys are not supported", name_));
      if (!keys_.insert(k).second) throw ConfigError(fmt::format("[{}]: duplicate key '{}'", name_, k));
    }
  }
  ~Section() = default;

  void finish() const {
    for (const auto& k : keys_) {
      if (!used_.count(k)) throw ConfigError(fmt::format("[{}]: unknown key '{}'", name_, k));
    }
  }

  std::optional<std::string> raw(const std::string& key) {
    if (!keys_.count(key)) return std::nullopt;
    used_.insert(key);
    return tree_.get_child(pt::ptree::path_type(key, '\0')).data();
  }

  void get(const std::string& key, std::string& out) {
    if (auto s = raw(key)) out = *s;
  }
  void get(const std::string& key, double& out) {
    if (auto s = raw(key)) out = number(key, *s);
  }
  void get(const std::string& key, int& out) {
    if (auto s = raw(key)) {
      const double v = number(key, *s);
      if (v != std::floor(v) || std::abs(v) > 1e9) throw error(key, "expected an integer");
      out = static_cast<int>(v);
    }
  }
  void get(const std::string& key, bool& out) {
    if (auto s = raw(key)) {
      if (*s == "true") out = true;
      else if (*s == "false") out = false;
      else throw error(key, "expected true or false");
    }
  }
  void get(const std::string& key, Vec2& out) {
    if (auto s = raw(key)) {
      const auto v = numbers(key, *s);
      if (v.size() != 2) throw error(key, "expected two numbers");
      out = Vec2(v[0], v[1]);
    }
  }
  bool has(const std::string& key) const { return keys_.count(key) > 0; }
  std::vector<double> list(const std::string& key) {
    if (auto s = raw(key)) return numbers(key, *s);
    return {};
  }

  ConfigError error(const std::string& key, const std::string& what) const {
    return ConfigError(fmt::format("[{}] {}: {}", name_, key, what));
  }

 private:
  double number(const std::string& key, const std::string& s) const {
    const auto v = numbers(key, s);
    if (v.size() != 1) throw error(key, "expected one number");
    return v[0];
  }
  std::vector<double> numbers(const std::string& key, const std::string& s) const {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ';' || s[i] == ',')) ++i;
      if (i == s.size()) break;
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ';' && s[j] != ',') ++j;
      const std::string tok = s.substr(i, j - i);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) throw error(key, "'" + tok + "' is not a number");
      out.push_back(v);
      i = j;
    }
    return out;
  }

  std::string name_;
  const pt::ptree& tree_;
  std::set<std::string> keys_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Built-in scenarios

DirichletBC make_bc(Field f, std::string tag, std::vector<int> comps, double c0 = 0.0,
                    TimeCurve curve = {}) {
  DirichletBC bc;
  bc.field = f;
  bc.tag = std::move(tag);
  bc.components = std::move(comps);
  bc.c0 = c0;
  bc.curve = curve;
  return bc;
}

ScenarioConfig compressing_ball(bool desk, Mode mode) {
  ScenarioConfig c;
  c.name = desk ? "compressing_ball:desk" : "compressing_ball";
  c.mode = mode;
  auto& g = c.geometry;
  g.kind = "disc";
  g.domain_lo = Vec2(-2.0, -2.0);
  g.domain_hi = Vec2(2.0, 2.0);
  g.center = Vec2::Zero();
  g.radius = 0.75;
  g.n_circum = 48;
  g.patch_outer_radius = 0.9;
  g.patch_layers = desk ? 5 : 10;
  g.patch_grading = 1.0;
  const int n = mode == Mode::FixedGrid ? (desk ? 51 : 101) : (desk ? 28 : 55);
  g.background_nx = g.background_ny = n;

  c.fluid.rho = 1.0;
  c.fluid.mu = 1.0;
  c.solid.rho = 1.0;
  c.solid.E = 50.0;
  c.solid.nu = 0.3;
  c.time.t0 = 0.0;
  c.time.t_end = desk ? 1.0 : 8.0;
  c.time.dt = 0.01;
  c.time.theta = 1.0;

  TimeCurve ramp{TimeCurve::Kind::SinRamp, 0.0, 1.0, kPi, 0.0, 5.0};
  c.bcs.push_back(make_bc(Field::Background, "top", {0}, 0.0));
  c.bcs.push_back(make_bc(Field::Background, "top", {1}, -4.0, ramp));
  c.bcs.push_back(make_bc(Field::Background, "bottom", {0}, 0.0));
  c.bcs.push_back(make_bc(Field::Background, "bottom", {1}, 4.0, ramp));
  c.bcs.push_back(make_bc(Field::Solid, "center", {0, 1}, 0.0));
  c.output.probes = {Vec2(0.0, 0.75)};
  c.output.line_cut = LineCutConfig{Vec2(0.0, -2.0), Vec2(0.0, 2.0), 201};
  c.output.line_cut_times = {c.time.t_end};
  return c;
}

ScenarioConfig moving_cylinder(bool desk, Mode mode) {
  ScenarioConfig c;
  c.name = desk ? "moving_cylinder:desk" : "moving_cylinder";
  c.mode = mode;
  auto& g = c.geometry;
  g.kind = "disc";
  g.domain_lo = Vec2(0.0, 0.0);
  g.domain_hi = Vec2(2.2, 0.44);
  if (mode == Mode::FixedGrid) {
    g.background_nx = desk ? 150 : 450;
    g.background_ny = desk ? 30 : 90;
  } else {
    g.background_nx = desk ? 75 : 225;
    g.background_ny = desk ? 15 : 45;
  }
  g.center = Vec2(0.3, 0.23);
  g.radius = 0.1;
  g.n_circum = 48;
  g.patch_outer_radius = 0.15;
  g.patch_layers = desk ? 12 : 20;
  g.patch_grading = 1.0;

  c.fluid.rho = 1.0;
  c.fluid.mu = 0.001;
  c.solid.rho = 1.0;
  c.solid.E = 1.0;
  c.solid.nu = 0.3;
  c.time.t_end = desk ? 1.0 : 3.0;
  c.time.dt = desk ? 0.005 : 0.001;
  c.time.theta = 1.0;

  for (const char* wall : {"left", "top", "bottom"}) c.bcs.push_back(make_bc(Field::Background, wall, {0, 1}));
  // Center trajectory x(t) = 1.1 + 0.8 sin(2 pi/3 (t - 0.75)) read as the
  // absolute position, so the displacement is x(t) - 0.3.
  TimeCurve sine{TimeCurve::Kind::Sine, 0.8, 0.8, 2.0 * kPi / 3.0, 0.75};
  c.bcs.push_back(make_bc(Field::Solid, "*", {0}, 1.0, sine));
  c.bcs.push_back(make_bc(Field::Solid, "*", {1}, 0.0));
  c.output.probes = {g.center};
  c.output.line_cut = LineCutConfig{Vec2(0.7, 0.0), Vec2(0.7, 0.44), 221};
  c.output.line_cut_times = {0.5};
  return c;
}

ScenarioConfig vibrating_flag(bool desk, Mode mode) {
  ScenarioConfig c;
  c.name = desk ? "vibrating_flag:desk" : "vibrating_flag";
  c.mode = mode;
  auto& g = c.geometry;
  g.kind = "flag";
  g.domain_lo = Vec2(-5.5, -6.0);
  g.domain_hi = Vec2(12.0, 6.0);
  if (mode == Mode::FixedGrid) {
    g.background_nx = desk ? 80 : 240;
    g.background_ny = desk ? 28 : 82;
  } else {
    g.background_nx = desk ? 40 : 120;
    g.background_ny = desk ? 14 : 41;
  }
  g.flag_shift = 1e-3;
  g.flag_patch_lo = Vec2(-2.0, -1.5);
  g.flag_patch_hi = Vec2(5.0, 1.5);
  g.flag_tail_nx = 20;
  g.flag_tail_ny = 2;
  g.flag_head_cells = desk ? 6 : 10;
  g.flag_outer_cells = desk ? 4 : 8;
  g.flag_grading = 4.0;

  c.fluid.rho = 1.18e-3;
  c.fluid.mu = 1.82e-4;
  c.solid.rho = 2.0;
  c.solid.E = 2.0e6;
  c.solid.nu = 0.35;
  c.time.t_end = desk ? 0.2 : 5.0;
  c.time.dt = 0.001;
  c.time.theta = 0.55;

  TimeCurve ramp{TimeCurve::Kind::SinRamp, 0.0, 1.0, 10.0 * kPi, 0.0, 0.1};
  c.bcs.push_back(make_bc(Field::Background, "left", {0}, 51.3, ramp));
  c.bcs.push_back(make_bc(Field::Background, "left", {1}, 0.0));
  c.bcs.push_back(make_bc(Field::Background, "top", {1}, 0.0));
  c.bcs.push_back(make_bc(Field::Background, "bottom", {1}, 0.0));
  c.bcs.push_back(make_bc(Field::Solid, "clamped", {0, 1}, 0.0));
  c.output.probes = {Vec2(4.0, g.flag_shift)};
  c.output.line_cut = LineCutConfig{Vec2(2.0, -6.0), Vec2(2.0, 6.0), 241};
  return c;
}

// ---------------------------------------------------------------------------
// Geometry construction

void check_tags(const Problem& p, const std::vector<DirichletBC>& bcs) {
  for (const auto& bc : bcs) {
    const std::optional<QuadMesh>* m = nullptr;
    switch (bc.field) {
      case Field::Background: m = &p.background; break;
      case Field::Patch: m = &p.patch; break;
      case Field::Solid: m = &p.solid; break;
    }
    if (!m->has_value()) {
      throw ConfigError(fmt::format("boundary condition on {} but the scenario has no such mesh", field_name(bc.field)));
    }
    if (bc.point || bc.tag == "*") continue;
    const auto& mesh = **m;
    if (!mesh.has_tag(bc.tag) && !mesh.node_sets.count(bc.tag)) {
      throw ConfigError(fmt::format("boundary condition references unknown tag '{}' on the {} mesh", bc.tag,
                                    field_name(bc.field)));
    }
  }
}

void build_disc(const ScenarioConfig& c, Problem& p) {
  const auto& g = c.geometry;
  if (c.mode == Mode::SingleMesh) throw ConfigError("single_mesh mode needs geometry kind 'box'");
  p.background = generate_structured_rect(g.domain_lo, g.domain_hi - g.domain_lo, g.background_nx, g.background_ny);
  p.solid = generate_disc_mesh(g.center, g.radius, g.n_circum, g.solid_rings);
  if (c.mode == Mode::Hybrid) {
    p.patch = generate_annulus_patch(g.center, g.radius, g.patch_outer_radius, g.n_circum, g.patch_layers,
                                     g.patch_grading);
  }
}

void build_flag(const ScenarioConfig& c, Problem& p) {
  const auto& g = c.geometry;
  if (c.mode == Mode::SingleMesh) throw ConfigError("single_mesh mode needs geometry kind 'box'");
  const double s = g.flag_shift;
  const double gr = g.flag_grading;
  if (!(g.flag_patch_lo.x() < -1.0 && g.flag_patch_hi.x() > 4.0 && g.flag_patch_lo.y() < -0.5 &&
        g.flag_patch_hi.y() > 0.5)) {
    throw ConfigError("flag patch must enclose the flag [-1, 4] x [-0.5, 0.5]");
  }
  if (g.flag_head_cells < 2 || g.flag_outer_cells < 1 || g.flag_tail_nx < 1 || g.flag_tail_ny < 1 || !(gr > 0.0)) {
    throw ConfigError("flag cell counts must be positive (head cells >= 2)");
  }
  BlockGridSpec spec;
  spec.x_breaks = {g.flag_patch_lo.x(), -1.0, 0.0, 4.0, g.flag_patch_hi.x()};
  spec.y_breaks = {g.flag_patch_lo.y() + s, -0.5 + s, -0.03 + s, 0.03 + s, 0.5 + s, g.flag_patch_hi.y() + s};
  const int half = g.flag_head_cells / 2;
  spec.x_counts = {g.flag_outer_cells, g.flag_head_cells, g.flag_tail_nx, g.flag_outer_cells};
  spec.y_counts = {g.flag_outer_cells, half, g.flag_tail_ny, half, g.flag_outer_cells};
  spec.x_ratios = {1.0 / gr, 1.0, 1.0, gr};
  spec.y_ratios = {1.0 / gr, 1.0 / gr, 1.0, gr, gr};
  spec.is_hole = [](int ix, int iy) { return (ix == 1 && iy >= 1 && iy <= 3) || (ix == 2 && iy == 2); };
  auto blocks = generate_block_grid(spec);
  if (blocks.hole.num_elements() == 0) throw GeometryError("flag solid mesh is empty");

  auto& solid = blocks.hole;
  std::vector<int> clamped;
  for (int i = 0; i < solid.num_nodes(); ++i)
    if (solid.nodes[i].x() <= 1e-12) clamped.push_back(i);
  solid.node_sets["clamped"] = std::move(clamped);

  p.background = generate_structured_rect(g.domain_lo, g.domain_hi - g.domain_lo, g.background_nx, g.background_ny);
  p.solid = std::move(solid);
  if (c.mode == Mode::Hybrid) p.patch = std::move(blocks.grid);
}

void build_box(const ScenarioConfig& c, Problem& p) {
  const auto& g = c.geometry;
  if (c.mode != Mode::SingleMesh) throw ConfigError("geometry kind 'box' is only available in single_mesh mode");
  p.background = generate_structured_rect(g.domain_lo, g.domain_hi - g.domain_lo, g.background_nx, g.background_ny);
}

}  // namespace

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  if (!(name == o.name && mode == o.mode && geometry == o.geometry && fluid == o.fluid && solid == o.solid &&
        coupling == o.coupling && time == o.time && newton == o.newton &&
        nonlinear_mesh_motion == o.nonlinear_mesh_motion && output == o.output && bcs.size() == o.bcs.size())) {
    return false;
  }
  for (std::size_t i = 0; i < bcs.size(); ++i)
    if (!same_bc(bcs[i], o.bcs[i])) return false;
  return true;
}

std::vector<std::string> builtin_names() {
  return {"compressing_ball", "compressing_ball:desk", "moving_cylinder",
          "moving_cylinder:desk", "vibrating_flag", "vibrating_flag:desk"};
}

ScenarioConfig builtin_scenario(const std::string& name, Mode mode) {
  const auto colon = name.find(':');
  const std::string base = name.substr(0, colon);
  const std::string suffix = colon == std::string::npos ? "" : name.substr(colon + 1);
  if (suffix.empty() || suffix == "desk") {
    const bool desk = suffix == "desk";
    if (mode == Mode::SingleMesh) throw ConfigError("built-in scenarios support hybrid and fixed_grid modes");
    if (base == "compressing_ball") return compressing_ball(desk, mode);
    if (base == "moving_cylinder") return moving_cylinder(desk, mode);
    if (base == "vibrating_flag") return vibrating_flag(desk, mode);
  }
  std::string list;
  for (const auto& n : builtin_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError(fmt::format("unknown scenario '{}'; built-ins: {}", name, list));
}

std::string emit_config(const ScenarioConfig& c) {
  Writer w;
  w.section("scenario");
  w.kv("name", c.name);
  w.kv("mode", to_string(c.mode));

  const auto& g = c.geometry;
  w.section("geometry");
  w.kv("kind", g.kind);
  w.kv("domain_lo", g.domain_lo);
  w.kv("domain_hi", g.domain_hi);
  w.kv("background_cells", fmt::format("{} {}", g.background_nx, g.background_ny));
  w.kv("center", g.center);
  w.kv("radius", g.radius);
  w.kv("n_circum", g.n_circum);
  w.kv("solid_rings", g.solid_rings);
  w.kv("patch_outer_radius", g.patch_outer_radius);
  w.kv("patch_layers", g.patch_layers);
  w.kv("patch_grading", g.patch_grading);
  w.kv("flag_shift", g.flag_shift);
  w.kv("flag_patch_lo", g.flag_patch_lo);
  w.kv("flag_patch_hi", g.flag_patch_hi);
  w.kv("flag_tail_cells", fmt::format("{} {}", g.flag_tail_nx, g.flag_tail_ny));
  w.kv("flag_head_cells", g.flag_head_cells);
  w.kv("flag_outer_cells", g.flag_outer_cells);
  w.kv("flag_grading", g.flag_grading);

  w.section("fluid");
  w.kv("rho", c.fluid.rho);
  w.kv("mu", c.fluid.mu);

  w.section("solid");
  w.kv("rho", c.solid.rho);
  w.kv("E", c.solid.E);
  w.kv("nu", c.solid.nu);
  w.kv("body_force", c.solid.body_force);

  w.section("time");
  w.kv("steady", c.time.steady);
  w.kv("t0", c.time.t0);
  w.kv("t_end", c.time.t_end);
  w.kv("dt", c.time.dt);
  w.kv("theta", c.time.theta);
  w.kv("rho_inf", c.time.rho_inf);
  w.kv("grid_velocity", std::string(c.time.grid_velocity_one_step_theta ? "one_step_theta" : "backward_difference"));

  w.section("stabilization");
  w.kv("gamma", c.coupling.gamma);
  w.kv("C_tr", c.coupling.C_tr);
  w.kv("adjoint_sign", c.coupling.adjoint_sign);
  w.kv("mass_penalty_exponent", c.coupling.mass_penalty_exponent);
  w.kv("convective_interface_terms", c.coupling.convective);
  w.kv("C_I", c.fluid.C_I);
  w.kv("c_u", c.fluid.c_u);
  w.kv("c_sigma", c.fluid.c_sigma);
  w.kv("gamma_c", c.fluid.gamma_c);
  w.kv("gamma_u", c.fluid.gamma_u);
  w.kv("gamma_p", c.fluid.gamma_p);
  w.kv("ghost_penalty", c.fluid.ghost_penalty);

  w.section("newton");
  w.kv("rel_tol", c.newton.rel_tol);
  w.kv("abs_tol", c.newton.abs_tol);
  w.kv("max_iterations", c.newton.max_iterations);
  w.kv("max_cycles", c.newton.max_cycles);
  w.kv("max_halvings", c.newton.max_halvings);
  w.kv("line_search", c.newton.line_search);
  w.kv("nonlinear_mesh_motion", c.nonlinear_mesh_motion);

  w.section("output");
  w.kv("snapshot_every", c.output.snapshot_every);
  w.kv("checkpoint_every", c.output.checkpoint_every);
  std::string probes;
  for (const auto& q : c.output.probes) probes += fmt::format("{}{} {}", probes.empty() ? "" : "; ", q.x(), q.y());
  w.kv("probes", probes);
  if (c.output.line_cut) {
    const auto& lc = *c.output.line_cut;
    w.kv("line_cut", fmt::format("{} {} {} {}", lc.a.x(), lc.a.y(), lc.b.x(), lc.b.y()));
    w.kv("line_cut_samples", lc.samples);
  }
  std::string times;
  for (double t : c.output.line_cut_times) times += fmt::format("{}{}", times.empty() ? "" : " ", t);
  w.kv("line_cut_times", times);

  for (std::size_t i = 0; i < c.bcs.size(); ++i) {
    const auto& bc = c.bcs[i];
    w.section(fmt::format("bc:{}", i));
    w.kv("field", field_name(bc.field));
    w.kv("tag", bc.tag);
    if (bc.point) w.kv("point", *bc.point);
    std::string comps;
    for (int k : bc.components) comps += fmt::format("{}{}", comps.empty() ? "" : " ", k);
    w.kv("components", comps);
    w.kv("value", fmt::format("{} {} {}", bc.c0, bc.cx, bc.cy));
    w.kv("curve", curve_name(bc.curve.kind));
    w.kv("A", bc.curve.A);
    w.kv("B", bc.curve.B);
    w.kv("omega", bc.curve.omega);
    w.kv("t0", bc.curve.t0);
    w.kv("t_end", bc.curve.t_end);
  }
  return w.str();
}

ScenarioConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }

  ScenarioConfig c;
  c.bcs.clear();
  std::set<std::string> seen;
  for (const auto& [name, body] : tree) {
    if (!seen.insert(name).second) throw ConfigError("duplicate section [" + name + "]");
    Section s(name, body);
    if (name == "scenario") {
      s.get("name", c.name);
      std::string mode = to_string(c.mode);
      s.get("mode", mode);
      c.mode = mode_from_string(mode);
    } else if (name == "geometry") {
      auto& g = c.geometry;
      s.get("kind", g.kind);
      s.get("domain_lo", g.domain_lo);
      s.get("domain_hi", g.domain_hi);
      if (auto v = s.list("background_cells"); !v.empty()) {
        if (v.size() != 2) throw s.error("background_cells", "expected two integers");
        g.background_nx = static_cast<int>(v[0]);
        g.background_ny = static_cast<int>(v[1]);
      }
      s.get("center", g.center);
      s.get("radius", g.radius);
      s.get("n_circum", g.n_circum);
      s.get("solid_rings", g.solid_rings);
      s.get("patch_outer_radius", g.patch_outer_radius);
      s.get("patch_layers", g.patch_layers);
      s.get("patch_grading", g.patch_grading);
      s.get("flag_shift", g.flag_shift);
      s.get("flag_patch_lo", g.flag_patch_lo);
      s.get("flag_patch_hi", g.flag_patch_hi);
      if (auto v = s.list("flag_tail_cells"); !v.empty()) {
        if (v.size() != 2) throw s.error("flag_tail_cells", "expected two integers");
        g.flag_tail_nx = static_cast<int>(v[0]);
        g.flag_tail_ny = static_cast<int>(v[1]);
      }
      s.get("flag_head_cells", g.flag_head_cells);
      s.get("flag_outer_cells", g.flag_outer_cells);
      s.get("flag_grading", g.flag_grading);
    } else if (name == "fluid") {
      s.get("rho", c.fluid.rho);
      s.get("mu", c.fluid.mu);
    } else if (name == "solid") {
      s.get("rho", c.solid.rho);
      s.get("E", c.solid.E);
      s.get("nu", c.solid.nu);
      s.get("body_force", c.solid.body_force);
    } else if (name == "time") {
      s.get("steady", c.time.steady);
      s.get("t0", c.time.t0);
      s.get("t_end", c.time.t_end);
      s.get("dt", c.time.dt);
      s.get("theta", c.time.theta);
      s.get("rho_inf", c.time.rho_inf);
      c.solid.rho_inf = c.time.rho_inf;
      std::string gv = c.time.grid_velocity_one_step_theta ? "one_step_theta" : "backward_difference";
      s.get("grid_velocity", gv);
      if (gv != "one_step_theta" && gv != "backward_difference") {
        throw s.error("grid_velocity", "expected backward_difference or one_step_theta");
      }
      c.time.grid_velocity_one_step_theta = gv == "one_step_theta";
    } else if (name == "stabilization") {
      s.get("gamma", c.coupling.gamma);
      s.get("C_tr", c.coupling.C_tr);
      s.get("adjoint_sign", c.coupling.adjoint_sign);
      s.get("mass_penalty_exponent", c.coupling.mass_penalty_exponent);
      s.get("convective_interface_terms", c.coupling.convective);
      s.get("C_I", c.fluid.C_I);
      s.get("c_u", c.fluid.c_u);
      s.get("c_sigma", c.fluid.c_sigma);
      s.get("gamma_c", c.fluid.gamma_c);
      s.get("gamma_u", c.fluid.gamma_u);
      s.get("gamma_p", c.fluid.gamma_p);
      s.get("ghost_penalty", c.fluid.ghost_penalty);
    } else if (name == "newton") {
      s.get("rel_tol", c.newton.rel_tol);
      s.get("abs_tol", c.newton.abs_tol);
      s.get("max_iterations", c.newton.max_iterations);
      s.get("max_cycles", c.newton.max_cycles);
      s.get("max_halvings", c.newton.max_halvings);
      s.get("line_search", c.newton.line_search);
      s.get("nonlinear_mesh_motion", c.nonlinear_mesh_motion);
    } else if (name == "output") {
      s.get("snapshot_every", c.output.snapshot_every);
      s.get("checkpoint_every", c.output.checkpoint_every);
      const auto probes = s.list("probes");
      if (probes.size() % 2 != 0) throw s.error("probes", "expected x y pairs");
      c.output.probes.clear();
      for (std::size_t i = 0; i < probes.size(); i += 2) c.output.probes.emplace_back(probes[i], probes[i + 1]);
      if (auto v = s.list("line_cut"); !v.empty()) {
        if (v.size() != 4) throw s.error("line_cut", "expected x0 y0 x1 y1");
        c.output.line_cut = LineCutConfig{Vec2(v[0], v[1]), Vec2(v[2], v[3]), 101};
      }
      int samples = c.output.line_cut ? c.output.line_cut->samples : 101;
      s.get("line_cut_samples", samples);
      if (c.output.line_cut) c.output.line_cut->samples = samples;
      c.output.line_cut_times = s.list("line_cut_times");
    } else if (name.rfind("bc:", 0) == 0) {
      DirichletBC bc;
      std::string field = "background";
      s.get("field", field);
      bc.field = field_from_string(field);
      s.get("tag", bc.tag);
      Vec2 point = Vec2::Zero();
      if (s.has("point")) {
        s.get("point", point);
        bc.point = point;
      }
      for (double k : s.list("components")) {
        if (k != 0.0 && k != 1.0 && k != 2.0) throw s.error("components", "components are 0, 1 or 2");
        bc.components.push_back(static_cast<int>(k));
      }
      if (auto v = s.list("value"); !v.empty()) {
        if (v.size() != 1 && v.size() != 3) throw s.error("value", "expected c0 or c0 cx cy");
        bc.c0 = v[0];
        if (v.size() == 3) {
          bc.cx = v[1];
          bc.cy = v[2];
        }
      }
      std::string curve = "constant";
      s.get("curve", curve);
      bc.curve.kind = curve_from_string(curve);
      s.get("A", bc.curve.A);
      s.get("B", bc.curve.B);
      s.get("omega", bc.curve.omega);
      s.get("t0", bc.curve.t0);
      s.get("t_end", bc.curve.t_end);
      if (bc.components.empty()) throw s.error("components", "at least one component is required");
      c.bcs.push_back(std::move(bc));
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
    s.finish();
  }
  c.solid.rho_inf = c.time.rho_inf;
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const ScenarioConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << emit_config(c);
}

Problem build_problem(const ScenarioConfig& c) {
  Problem p;
  p.mode = c.mode;
  if (c.geometry.kind == "disc") build_disc(c, p);
  else if (c.geometry.kind == "flag") build_flag(c, p);
  else if (c.geometry.kind == "box") build_box(c, p);
  else throw ConfigError("unknown geometry kind '" + c.geometry.kind + "' (expected disc, flag or box)");

  p.fluid = c.fluid;
  p.solid_params = c.solid;
  p.solid_params.rho_inf = c.time.rho_inf;
  p.coupling = c.coupling;
  p.time = c.time;
  p.newton = c.newton;
  p.nonlinear_mesh_motion = c.nonlinear_mesh_motion;
  p.bcs = c.bcs;
  check_tags(p, p.bcs);
  p.validate();
  return p;
}

}  // namespace hyfsi
