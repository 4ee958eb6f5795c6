#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyfsi/ale.hpp"
#include "hyfsi/assembly.hpp"
#include "hyfsi/cutcell.hpp"
#include "hyfsi/fluid.hpp"
#include "hyfsi/mesh.hpp"
#include "hyfsi/nitsche.hpp"
#include "hyfsi/solid.hpp"

namespace hyfsi {

enum class Mode { Hybrid, FixedGrid, SingleMesh };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

// Scalar time law multiplying a Dirichlet value.
struct TimeCurve {
  enum class Kind { Constant, SinRamp, Sine };
  Kind kind = Kind::Constant;
  double A = 0.0;
  double B = 1.0;
  double omega = 0.0;
  double t0 = 0.0;
  double t_end = std::numeric_limits<double>::infinity();

  // Constant: 1. SinRamp: (1 + sin(omega t - pi/2))/2, held after t_end.
  // Sine: A + B sin(omega (t - t0)).
  double operator()(double t) const;
  bool operator==(const TimeCurve&) const = default;
};

using DirichletFunction = std::function<double(const Vec2& X, double t, int component)>;

// Strong condition on the nodes selected by `tag` (boundary facet tag, node
// set name or "*" for every node) or, if `point` is set, on the node nearest
// to it. The value is curve(t) * (c0 + cx X + cy Y) in reference coordinates
// unless `function` is given. Components 0, 1 are vector components, 2 is
// the fluid pressure.
struct DirichletBC {
  Field field = Field::Background;
  std::string tag;
  std::optional<Vec2> point;
  std::vector<int> components;
  TimeCurve curve;
  double c0 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  DirichletFunction function;

  double value(const Vec2& X, double t, int component) const;
};

struct TimeOptions {
  bool steady = false;
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 0.01;
  double theta = 1.0;
  double rho_inf = 1.0;
  bool grid_velocity_one_step_theta = false;
  bool operator==(const TimeOptions&) const = default;
};

struct NewtonOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int max_iterations = 25;
  int max_cycles = 5;
  int max_halvings = 4;
  bool line_search = true;
  bool operator==(const NewtonOptions&) const = default;
};

struct Problem {
  Mode mode = Mode::Hybrid;
  std::optional<QuadMesh> background;
  std::optional<QuadMesh> patch;
  std::optional<QuadMesh> solid;
  FluidParams fluid;
  SolidParams solid_params;
  CouplingParams coupling;
  CutOptions cut;
  TimeOptions time;
  NewtonOptions newton;
  bool nonlinear_mesh_motion = false;
  int interface_points = 2;
  BodyForce fluid_body;
  std::vector<DirichletBC> bcs;

  void validate() const;
};

struct FluidFields {
  std::vector<double> u;      // 2 per node
  std::vector<double> p;      // 1 per node
  std::vector<double> a;      // 2 per node
  std::vector<char> valued;   // node carries meaningful values

  bool operator==(const FluidFields&) const = default;
};

struct FieldState {
  double t = 0.0;
  int step = 0;
  FluidFields background;
  FluidFields patch;
  std::vector<double> d, v, a;       // solid
  std::vector<double> f_int, c_sf2;  // archived solid-row terms of this level
  std::vector<double> d_grid, u_grid;

  bool operator==(const FieldState&) const = default;
};

// Everything that depends on the solid displacement of an iterate.
struct Geometry {
  std::vector<double> d_grid;
  std::vector<Vec2> patch_coords;
  std::vector<Vec2> solid_coords;
  std::optional<CutState> cut;
  DofMap dofs;
  std::vector<FluidFluidPoint> ff;
  std::vector<FluidSolidPoint> fs;

  std::vector<char> background_active() const;
};

struct StepReport {
  double t = 0.0;
  int iterations = 0;
  int cycles = 0;
  int halvings = 0;
  bool predictor_fallback = false;
  std::vector<double> residual_history;
  Vec2 interface_force = Vec2::Zero();  // force of the fluid on the solid
};

struct Assembled {
  Vector residual;
  SparseMatrix jacobian;
  Vector c_sf2;  // solid-row coupling residual, full length
};

class Solver {
 public:
  explicit Solver(Problem problem);
  ~Solver();
  // Internal objects keep pointers into the problem's meshes.
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  const Problem& problem() const { return problem_; }
  FieldState initial_state() const;

  // One time step (or the steady solve when the problem is steady). The
  // state is replaced by the converged state of the new level.
  StepReport advance(FieldState& state) const;

  // Geometry for a solid displacement (empty d means zero).
  Geometry geometry(std::span<const double> d) const;

  // Residual/tangent at `iterate` on `geo`, with stabilization frozen at
  // `lin` and previous-level data `prev` (already transcribed to geo).
  Assembled assemble(const Geometry& geo, const FieldState& iterate, const FieldState& lin,
                     const FieldState& prev, double t, bool with_matrix) const;

  Vector pack(const Geometry& geo, const FieldState& s) const;
  void unpack(const Geometry& geo, const Vector& x, FieldState& s) const;

  // Fills background values on nodes active in `geo` but not valued, from
  // the nearest valued node (ties: lowest id). Marks active nodes valued.
  void transcribe(const Geometry& geo, FluidFields& f, bool with_pressure) const;

  void apply_dirichlet(FieldState& s, double t) const;

  // Interface node lists (patch "fsi" nodes and their solid partners).
  const std::vector<int>& patch_interface_nodes() const { return patch_fsi_nodes_; }
  const std::vector<int>& solid_interface_partner() const { return solid_partner_; }
  bool has_mesh_motion() const { return motion_ != nullptr; }

  FluidTimeScheme fluid_scheme() const;
  SolidTimeScheme solid_scheme() const;

 private:
  struct ResolvedBC {
    Field field;
    int node;
    int component;
    const DirichletBC* bc;
  };
  void resolve_bcs();
  Vector solid_velocity(const FieldState& iterate, const FieldState& prev) const;

  Problem problem_;
  std::vector<ResolvedBC> resolved_;
  std::vector<int> patch_ff_loop_;
  std::vector<int> patch_fsi_nodes_;
  std::vector<int> solid_partner_;      // per entry of patch_fsi_nodes_
  std::vector<int> patch_fsi_facets_;   // boundary facet ids
  std::vector<int> solid_fsi_loop_;
  std::vector<int> patch_to_solid_;     // per patch node, -1 if none
  std::unique_ptr<MeshMotion> motion_;
};

}  // namespace hyfsi
