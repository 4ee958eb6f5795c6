#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyfsi/driver.hpp"

namespace hyfsi {

// Geometry recipes. "disc": circular solid in a box (annulus patch in hybrid
// mode). "flag": clamped head with a flexible tail inside a block-grid patch.
struct GeometryConfig {
  std::string kind = "disc";
  Vec2 domain_lo{-2.0, -2.0};
  Vec2 domain_hi{2.0, 2.0};
  int background_nx = 28;
  int background_ny = 28;

  Vec2 center{0.0, 0.0};
  double radius = 0.75;
  int n_circum = 48;
  int solid_rings = 0;
  double patch_outer_radius = 0.9;
  int patch_layers = 5;
  double patch_grading = 1.0;

  double flag_shift = 1e-3;
  Vec2 flag_patch_lo{-2.0, -1.5};
  Vec2 flag_patch_hi{5.0, 1.5};
  int flag_tail_nx = 20;
  int flag_tail_ny = 2;
  int flag_head_cells = 8;
  int flag_outer_cells = 6;
  double flag_grading = 4.0;

  bool operator==(const GeometryConfig&) const = default;
};

struct LineCutConfig {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  int samples = 101;
  bool operator==(const LineCutConfig&) const = default;
};

struct OutputConfig {
  int snapshot_every = 0;
  int checkpoint_every = 0;
  std::vector<Vec2> probes;  // solid points reported as d1, d2
  std::optional<LineCutConfig> line_cut;
  std::vector<double> line_cut_times;
  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  Mode mode = Mode::Hybrid;
  GeometryConfig geometry;
  FluidParams fluid;
  SolidParams solid;
  CouplingParams coupling;
  TimeOptions time;
  NewtonOptions newton;
  bool nonlinear_mesh_motion = false;
  std::vector<DirichletBC> bcs;  // `function` is not representable and ignored
  OutputConfig output;

  bool operator==(const ScenarioConfig& o) const;
};

// Names: compressing_ball, moving_cylinder, vibrating_flag, each optionally
// with a ":desk" suffix for the reduced resolution preset. The mode selects
// the mode-specific mesh defaults.
ScenarioConfig builtin_scenario(const std::string& name, Mode mode = Mode::Hybrid);
std::vector<std::string> builtin_names();

std::string emit_config(const ScenarioConfig& c);
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& c, const std::string& path);

// Meshes, materials and boundary conditions of a scenario.
Problem build_problem(const ScenarioConfig& c);

}  // namespace hyfsi
