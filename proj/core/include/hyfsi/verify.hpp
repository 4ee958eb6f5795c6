#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hyfsi/run.hpp"

namespace hyfsi {

struct CriterionResult {
  std::string id;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
};

// "PASS <id>: <detail> [value=..., threshold=..., t=...s]"
std::string format_result(const CriterionResult& r);

// Fixtures shared by the suites, the unit tests and the benchmarks.
namespace fixtures {

// Steady single-mesh flow on [0,1]^2 with n x n cells and the manufactured
// solution u = (sin pi x sin pi y, cos pi x cos pi y), p = cos pi x cos pi y.
Problem manufactured_flow(int n, double mu = 1.0, double rho = 1.0);
Vec2 manufactured_velocity(const Vec2& x);
double manufactured_pressure(const Vec2& x);

// Plane Couette flow in [0,2]x[0,1] (lid speed 1), on the background alone
// or with an embedded rectangular patch.
Problem couette(bool with_patch);

// Steady flow past a fixed cylinder at refinement level k (0, 1, 2, ...).
Problem fixed_cylinder(int level);

// Fixed-grid channel [0,1]^2 (8x8 cells) around the rigid block
// [x_cut, 0.9] x [0.2, 0.8].
Problem straight_cut(double x_cut, bool ghost_penalty);

// Small hybrid problem with a deformable solid (under 300 unknowns).
Problem small_hybrid();

}  // namespace fixtures

// Discrete L2 errors of a single fluid mesh against an exact solution.
// The pressure error is computed after removing the mean difference.
struct FluidErrors {
  double velocity = 0.0;
  double pressure = 0.0;
};
FluidErrors fluid_l2_errors(const QuadMesh& mesh, const FluidFields& f, const std::function<Vec2(const Vec2&)>& u,
                            const std::function<double(const Vec2&)>& p);

// Individual criteria. Run-based criteria write into `work_dir`.
CriterionResult check_cutter_sweep(int positions = 1000);
CriterionResult check_manufactured_rates();
CriterionResult check_ghost_penalty_conditioning();
CriterionResult check_couette_patch();
CriterionResult check_fluid_solid_rate();
CriterionResult check_oscillator();
CriterionResult check_jacobian();
CriterionResult check_moving_cylinder(const std::string& work_dir);
CriterionResult check_ball_cross_validation(const std::string& work_dir);
CriterionResult check_determinism(const std::string& work_dir);

std::vector<std::string> verify_suite_names();
// Suites: geometry, fluid, solid, coupling, monolithic.
std::vector<CriterionResult> run_verify_suite(const std::string& name, const std::string& work_dir = "");

}  // namespace hyfsi
