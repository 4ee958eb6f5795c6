#include "hyfsi/verify.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>

#include "hyfsi/linear_solver.hpp"
#include "hyfsi/polygon.hpp"

namespace hyfsi {

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void retag_boundary(QuadMesh& mesh, const std::string& tag) {
  for (auto& f : mesh.boundary_facets) f.tag = tag;
}

DirichletBC function_bc(Field f, const std::string& tag, std::vector<int> comps, DirichletFunction fn) {
  DirichletBC bc;
  bc.field = f;
  bc.tag = tag;
  bc.components = std::move(comps);
  bc.function = std::move(fn);
  return bc;
}

DirichletBC zero_bc(Field f, const std::string& tag, std::vector<int> comps) {
  DirichletBC bc;
  bc.field = f;
  bc.tag = tag;
  bc.components = std::move(comps);
  return bc;
}

DirichletBC pressure_pin(const Vec2& at, double value = 0.0) {
  DirichletBC bc;
  bc.field = Field::Background;
  bc.point = at;
  bc.components = {2};
  bc.c0 = value;
  return bc;
}

double log2_ratio(double coarse, double fine) { return std::log2(coarse / fine); }

std::string temp_dir(const std::string& work_dir, const std::string& leaf) {
  namespace fs = std::filesystem;
  const fs::path base = work_dir.empty() ? fs::temp_directory_path() / "hyfsi_verify" : fs::path(work_dir);
  const fs::path dir = base / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

FluidView background_view(const Problem& p, const Geometry& geo, const FieldState& s) {
  FluidView v;
  v.mesh = &*p.background;
  v.coords = p.background->nodes;
  v.field = Field::Background;
  v.dofs = &geo.dofs;
  v.cut = geo.cut ? &*geo.cut : nullptr;
  v.u = s.background.u;
  v.p = s.background.p;
  return v;
}

FluidView patch_view(const Problem& p, const Geometry& geo, const FieldState& s) {
  FluidView v;
  v.mesh = &*p.patch;
  v.coords = geo.patch_coords;
  v.field = Field::Patch;
  v.dofs = &geo.dofs;
  v.u = s.patch.u;
  v.p = s.patch.p;
  return v;
}

// Star-shaped random polygon inside [0.05, 0.95]^2.
Polygon random_cutter(std::mt19937_64& rng, bool snap, double h) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = 6 + static_cast<int>(U(rng) * 30.0);
  const double r0 = 0.08 + 0.25 * U(rng);
  const double wobble = 0.4 * U(rng);
  const double margin = 0.05 + r0 * (1.0 + wobble);
  Vec2 c(margin + (1.0 - 2.0 * margin) * U(rng), margin + (1.0 - 2.0 * margin) * U(rng));
  const double phase = 2.0 * kPi * U(rng);
  Polygon poly;
  for (int i = 0; i < n; ++i) {
    const double t = phase + 2.0 * kPi * i / n;
    const double r = r0 * (1.0 + wobble * (2.0 * U(rng) - 1.0));
    Vec2 v = c + r * Vec2(std::cos(t), std::sin(t));
    // Snapped vertices land on grid lines and nodes, the degenerate cases.
    if (snap) v = (v / (0.5 * h)).array().round().matrix() * (0.5 * h);
    if (poly.empty() || (v - poly.back()).norm() > 1e-9) poly.push_back(v);
  }
  if (poly.size() > 1 && (poly.front() - poly.back()).norm() < 1e-9) poly.pop_back();
  return poly;
}

std::vector<double> flatten(const FieldState& s) {
  std::vector<double> out;
  for (const auto* v : {&s.background.u, &s.background.p, &s.patch.u, &s.patch.p, &s.d, &s.v, &s.a})
    out.insert(out.end(), v->begin(), v->end());
  return out;
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  return fmt::format("{} {}: {} [value={:.6g}, threshold={:.6g}, t={:.1f}s]", r.passed ? "PASS" : "FAIL", r.id,
                     r.detail, r.value, r.threshold, r.seconds);
}

// ---------------------------------------------------------------------------
// Fixtures

namespace fixtures {

Vec2 manufactured_velocity(const Vec2& x) {
  const double sx = std::sin(kPi * x.x()), cx = std::cos(kPi * x.x());
  const double sy = std::sin(kPi * x.y()), cy = std::cos(kPi * x.y());
  return {sx * sy, cx * cy};
}

double manufactured_pressure(const Vec2& x) { return std::cos(kPi * x.x()) * std::cos(kPi * x.y()); }

Problem manufactured_flow(int n, double mu, double rho) {
  Problem p;
  p.mode = Mode::SingleMesh;
  p.background = generate_structured_rect(Vec2(0.0, 0.0), Vec2(1.0, 1.0), n, n);
  p.fluid.mu = mu;
  p.fluid.rho = rho;
  p.time.steady = true;
  p.fluid_body = [mu, rho](const Vec2& x) {
    const double sx = std::sin(kPi * x.x()), cx = std::cos(kPi * x.x());
    const double sy = std::sin(kPi * x.y()), cy = std::cos(kPi * x.y());
    const Vec2 u(sx * sy, cx * cy);
    Mat2 g;  // g(i, j) = du_i/dx_j
    g << kPi * cx * sy, kPi * sx * cy, -kPi * sx * cy, -kPi * cx * sy;
    const Vec2 conv = g * u;
    const Vec2 lap = -2.0 * kPi * kPi * u;
    const Vec2 grad_p(-kPi * sx * cy, -kPi * cx * sy);
    return Vec2((rho * conv - mu * lap + grad_p) / rho);
  };
  auto exact = [](const Vec2& X, double, int comp) {
    return comp == 2 ? manufactured_pressure(X) : manufactured_velocity(X)[comp];
  };
  for (const char* side : {"left", "right", "bottom", "top"})
    p.bcs.push_back(function_bc(Field::Background, side, {0, 1}, exact));
  auto pin = function_bc(Field::Background, "", {2}, exact);
  pin.point = Vec2(0.0, 0.0);
  p.bcs.push_back(pin);
  return p;
}

Problem couette(bool with_patch) {
  Problem p;
  p.mode = with_patch ? Mode::Hybrid : Mode::SingleMesh;
  p.background = generate_structured_rect(Vec2(0.0, 0.0), Vec2(2.0, 1.0), 16, 8);
  if (with_patch) {
    QuadMesh patch = generate_structured_rect(Vec2(0.63, 0.29), Vec2(0.74, 0.42), 6, 4);
    retag_boundary(patch, "ff");
    p.patch = std::move(patch);
  }
  p.fluid.mu = 0.1;
  p.fluid.rho = 1.0;
  p.time.steady = true;
  auto profile = [](const Vec2& X, double, int comp) { return comp == 0 ? X.y() : 0.0; };
  for (const char* side : {"left", "right", "bottom", "top"})
    p.bcs.push_back(function_bc(Field::Background, side, {0, 1}, profile));
  p.bcs.push_back(pressure_pin(Vec2(0.0, 0.0)));
  return p;
}

Problem fixed_cylinder(int level) {
  const int s = 1 << level;
  const Vec2 c(0.6, 0.5);
  Problem p;
  p.mode = Mode::Hybrid;
  p.background = generate_structured_rect(Vec2(0.0, 0.0), Vec2(2.0, 1.0), 16 * s, 8 * s);
  p.patch = generate_annulus_patch(c, 0.15, 0.3, 16 * s, 2 * s, 1.0);
  p.solid = generate_disc_mesh(c, 0.15, 16 * s);
  p.fluid.mu = 1.0;
  p.fluid.rho = 1.0;
  p.solid_params.E = 1.0;
  p.time.steady = true;
  p.bcs.push_back(function_bc(Field::Background, "left", {0, 1},
                              [](const Vec2& X, double, int comp) { return comp == 0 ? 4.0 * X.y() * (1.0 - X.y()) : 0.0; }));
  p.bcs.push_back(zero_bc(Field::Background, "bottom", {0, 1}));
  p.bcs.push_back(zero_bc(Field::Background, "top", {0, 1}));
  p.bcs.push_back(zero_bc(Field::Solid, "*", {0, 1}));
  return p;
}

Problem straight_cut(double x_cut, bool ghost_penalty) {
  Problem p;
  p.mode = Mode::FixedGrid;
  p.background = generate_structured_rect(Vec2(0.0, 0.0), Vec2(1.0, 1.0), 8, 8);
  QuadMesh block = generate_structured_rect(Vec2(x_cut, 0.2), Vec2(0.9 - x_cut, 0.6), 2, 4);
  retag_boundary(block, "fsi");
  p.solid = std::move(block);
  p.fluid.mu = 1.0;
  p.fluid.rho = 1.0;
  p.fluid.ghost_penalty = ghost_penalty;
  p.time.steady = true;
  p.bcs.push_back(function_bc(Field::Background, "left", {0, 1},
                              [](const Vec2& X, double, int comp) { return comp == 0 ? X.y() * (1.0 - X.y()) : 0.0; }));
  p.bcs.push_back(zero_bc(Field::Background, "bottom", {0, 1}));
  p.bcs.push_back(zero_bc(Field::Background, "top", {0, 1}));
  p.bcs.push_back(pressure_pin(Vec2(0.0, 0.0)));
  p.bcs.push_back(zero_bc(Field::Solid, "*", {0, 1}));
  return p;
}

Problem small_hybrid() {
  const Vec2 c(0.5, 0.5);
  Problem p;
  p.mode = Mode::Hybrid;
  p.background = generate_structured_rect(Vec2(0.0, 0.0), Vec2(1.0, 1.0), 5, 5);
  p.patch = generate_annulus_patch(c, 0.15, 0.3, 8, 1, 1.0);
  p.solid = generate_disc_mesh(c, 0.15, 8);
  p.fluid.mu = 0.05;
  p.fluid.rho = 1.0;
  p.solid_params.E = 20.0;
  p.solid_params.nu = 0.3;
  p.solid_params.rho = 2.0;
  p.time.dt = 0.05;
  p.time.theta = 0.7;
  p.time.rho_inf = 0.8;
  p.solid_params.rho_inf = 0.8;
  p.bcs.push_back(function_bc(Field::Background, "left", {0, 1},
                              [](const Vec2& X, double, int comp) { return comp == 0 ? X.y() * (1.0 - X.y()) : 0.0; }));
  p.bcs.push_back(zero_bc(Field::Background, "bottom", {0, 1}));
  p.bcs.push_back(zero_bc(Field::Background, "top", {0, 1}));
  p.bcs.push_back(zero_bc(Field::Solid, "center", {0, 1}));
  return p;
}

}  // namespace fixtures

FluidErrors fluid_l2_errors(const QuadMesh& mesh, const FluidFields& f, const std::function<Vec2(const Vec2&)>& u,
                            const std::function<double(const Vec2&)>& p) {
  const auto rule = gauss_quad(3);
  double eu = 0.0, area = 0.0, mean_diff = 0.0;
  // First pass: mean pressure difference.
  for (int pass = 0; pass < 2; ++pass) {
    double ep = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto q = mesh.corners(e);
      const auto& el = mesh.elements[e];
      for (const auto& qp : rule) {
        const auto B = eval_basis(q, qp.x, false, e);
        Vec2 uh = Vec2::Zero();
        double ph = 0.0;
        for (int a = 0; a < 4; ++a) {
          uh += B.N[a] * Vec2(f.u[2 * el[a]], f.u[2 * el[a] + 1]);
          ph += B.N[a] * f.p[el[a]];
        }
        const double w = qp.w * B.detJ;
        if (pass == 0) {
          eu += w * (uh - u(B.x)).squaredNorm();
          mean_diff += w * (ph - p(B.x));
          area += w;
        } else {
          ep += w * std::pow(ph - p(B.x) - mean_diff, 2);
        }
      }
    }
    if (pass == 0) {
      mean_diff /= area;
    } else {
      return {std::sqrt(eu), std::sqrt(ep)};
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Criteria

CriterionResult check_cutter_sweep(int positions) {
  Stopwatch sw;
  CriterionResult r;
  r.id = "geometry.cutter_sweep";
  r.threshold = 1e-10;
  const QuadMesh bg = generate_structured_rect(Vec2(0.0, 0.0), Vec2(1.0, 1.0), 20, 20);
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  int crashes = 0;
  for (int k = 0; k < positions; ++k) {
    const Polygon cutter = random_cutter(rng, k % 4 == 3, 0.05);
    try {
      const CutState cut = classify_and_cut(bg, cutter);
      double fluid = 0.0;
      for (double a : cut.physical_area) fluid += a;
      worst = std::max(worst, std::abs(fluid + polygon_signed_area(cut.cutter) - 1.0));
    } catch (const std::exception& e) {
      ++crashes;
      spdlog::warn("cutter sweep position {}: {}", k, e.what());
    }
  }
  r.seconds = sw.seconds();
  r.value = worst;
  r.passed = crashes == 0 && worst < r.threshold && r.seconds < 60.0;
  r.detail = fmt::format("{} positions, max area error {:.3g}, {} failures", positions, worst, crashes);
  return r;
}

CriterionResult check_manufactured_rates() {
  Stopwatch sw;
  CriterionResult r;
  r.id = "fluid.manufactured_rates";
  r.threshold = 1.8;
  std::vector<FluidErrors> errs;
  const std::vector<int> levels{8, 16, 32, 64};
  for (int n : levels) {
    Solver s(fixtures::manufactured_flow(n));
    FieldState st = s.initial_state();
    s.advance(st);
    errs.push_back(fluid_l2_errors(*s.problem().background, st.background, fixtures::manufactured_velocity,
                                   fixtures::manufactured_pressure));
  }
  const std::size_t L = errs.size();
  const double ru = log2_ratio(errs[L - 2].velocity, errs[L - 1].velocity);
  const double rp = log2_ratio(errs[L - 2].pressure, errs[L - 1].pressure);
  std::string table;
  for (std::size_t i = 0; i < L; ++i)
    table += fmt::format("{}n={} eu={:.3e} ep={:.3e}", i ? "; " : "", levels[i], errs[i].velocity, errs[i].pressure);
  r.seconds = sw.seconds();
  r.value = ru;
  r.passed = ru >= 1.8 && rp >= 0.9 && r.seconds < 300.0;
  r.detail = fmt::format("velocity rate {:.3f} (>= 1.8), pressure rate {:.3f} (>= 0.9); {}", ru, rp, table);
  return r;
}

CriterionResult check_ghost_penalty_conditioning() {
  Stopwatch sw;
  CriterionResult r;
  r.id = "fluid.ghost_penalty_conditioning";
  r.threshold = 1e3;
  const double h = 0.125;
  std::vector<double> x_cuts;
  for (double delta : {0.5, 0.3, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) x_cuts.push_back(0.5 + delta * h);
  for (double delta : {1e-6, 1e-4, 1e-2}) x_cuts.push_back(0.625 - delta * h);
  auto spread = [&](bool gp) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double xc : x_cuts) {
      Solver s(fixtures::straight_cut(xc, gp));
      FieldState st = s.initial_state();
      const Geometry geo = s.geometry(st.d);
      const auto A = s.assemble(geo, st, st, st, st.t, true);
      const double k = condition_number(A.jacobian);
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    return std::make_pair(hi / lo, hi);
  };
  const auto [with_gp, max_gp] = spread(true);
  const auto [without_gp, max_nogp] = spread(false);
  r.seconds = sw.seconds();
  r.value = with_gp;
  r.passed = with_gp < 1e3 && without_gp > 1e3 && r.seconds < 180.0;
  r.detail = fmt::format("condition spread with ghost penalty {:.3g} (max {:.3g}), without {:.3g} (max {:.3g}); "
                         "smallest cut fraction 1e-6",
                         with_gp, max_gp, without_gp, max_nogp);
  return r;
}

CriterionResult check_couette_patch() {
  Stopwatch sw;
  CriterionResult r;
  r.id = "coupling.fluid_fluid_couette";
  r.threshold = 1e-8;
  Solver single(fixtures::couette(false));
  FieldState s1 = single.initial_state();
  single.advance(s1);
  Solver hybrid(fixtures::couette(true));
  FieldState s2 = hybrid.initial_state();
  hybrid.advance(s2);
  const Geometry g1 = single.geometry(s1.d), g2 = hybrid.geometry(s2.d);
  const Vec2 a(0.01, 0.02), b(1.99, 0.98);
  const auto c1 = sample_line_cut(single, s1, g1, a, b, 100);
  const auto c2 = sample_line_cut(hybrid, s2, g2, a, b, 100);
  double mismatch = 0.0, exact = 0.0;
  int in_patch = 0;
  for (std::size_t i = 0; i < c1.samples.size(); ++i) {
    mismatch = std::max(mismatch, (c1.samples[i].u - c2.samples[i].u).norm());
    exact = std::max(exact, (c2.samples[i].u - Vec2(c2.samples[i].x.y(), 0.0)).norm());
    in_patch += c2.samples[i].source == "patch";
  }
  const double jump = interface_jump_integral(background_view(hybrid.problem(), g2, s2),
                                              patch_view(hybrid.problem(), g2, s2), g2.ff);
  r.seconds = sw.seconds();
  r.value = std::max(mismatch, jump);
  r.passed = mismatch < 1e-8 && jump < 1e-8;
  r.detail = fmt::format("max sample mismatch {:.3g} over 100 points ({} in the patch), jump integral {:.3g}, "
                         "deviation from the linear profile {:.3g}",
                         mismatch, in_patch, jump, exact);
  return r;
}

CriterionResult check_fluid_solid_rate() {
  Stopwatch sw;
  CriterionResult r;
  r.id = "coupling.fluid_solid_rate";
  r.threshold = 1.4;
  std::vector<double> jumps;
  for (int level = 0; level < 3; ++level) {
    Solver s(fixtures::fixed_cylinder(level));
    FieldState st = s.initial_state();
    s.advance(st);
    const Geometry geo = s.geometry(st.d);
    SolidTrace trace{&geo.dofs, st.v, 0.0};
    jumps.push_back(interface_slip_l2(patch_view(s.problem(), geo, st), trace, geo.fs));
  }
  const double r1 = log2_ratio(jumps[0], jumps[1]), r2 = log2_ratio(jumps[1], jumps[2]);
  r.seconds = sw.seconds();
  r.value = std::min(r1, r2);
  r.passed = r.value >= 1.4;
  r.detail = fmt::format("interface L2 jump {:.3e}, {:.3e}, {:.3e}; rates {:.3f}, {:.3f}", jumps[0], jumps[1],
                         jumps[2], r1, r2);
  return r;
}

CriterionResult check_oscillator() {
  Stopwatch sw;
  CriterionResult r;
  r.id = "solid.generalized_alpha_oscillator";
  r.threshold = 1e-3;
  const auto ga = GeneralizedAlpha::from_spectral_radius(1.0);
  const bool exact = ga.alpha_f == 0.5 && ga.alpha_m == 0.5 && ga.beta == 0.25 && ga.gamma == 0.5;
  const double m = 1.0, k = 4.0 * kPi * kPi, T = 1.0, dt = T / 200.0;
  double d = 1.0, v = 0.0, a = -k * d / m;
  const double e0 = 0.5 * m * v * v + 0.5 * k * d * d;
  double drift = 0.0;
  for (int n = 0; n < 200; ++n) {
    // m a_{n+1-am} + k d_{n+1-af} = 0 is linear in the new displacement.
    auto residual = [&](double dn) {
      const double an = ga.acceleration(dn, d, v, a, dt);
      return m * ((1.0 - ga.alpha_m) * an + ga.alpha_m * a) + k * ((1.0 - ga.alpha_f) * dn + ga.alpha_f * d);
    };
    const double slope = m * (1.0 - ga.alpha_m) * ga.da_dd(dt) + k * (1.0 - ga.alpha_f);
    const double dn = -residual(0.0) / slope;
    const double an = ga.acceleration(dn, d, v, a, dt);
    v = ga.velocity(an, v, a, dt);
    a = an;
    d = dn;
    drift = std::max(drift, std::abs(0.5 * m * v * v + 0.5 * k * d * d - e0) / e0);
  }
  r.seconds = sw.seconds();
  r.value = drift;
  r.passed = exact && drift < 1e-3;
  r.detail = fmt::format("energy drift {:.3e} over one period (dt = T/200); rho_inf=1 gives alpha_f={}, "
                         "alpha_m={}, beta={}, gamma={}",
                         drift, ga.alpha_f, ga.alpha_m, ga.beta, ga.gamma);
  return r;
}

CriterionResult check_jacobian() {
  Stopwatch sw;
  CriterionResult r;
  r.id = "coupling.jacobian_fd";
  r.threshold = 1e-4;
  Solver s(fixtures::small_hybrid());
  FieldState st = s.initial_state();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto randomize = [&](std::vector<double>& v, double scale) {
    for (double& x : v) x += scale * U(rng);
  };
  randomize(st.d, 5e-3);
  randomize(st.v, 0.1);
  randomize(st.a, 0.1);
  randomize(st.background.u, 0.5);
  randomize(st.background.p, 0.5);
  randomize(st.background.a, 0.5);
  randomize(st.patch.u, 0.5);
  randomize(st.patch.p, 0.5);
  randomize(st.patch.a, 0.5);
  FieldState prev = st;
  randomize(prev.d, 5e-3);
  randomize(prev.background.u, 0.2);
  randomize(prev.patch.u, 0.2);
  randomize(st.u_grid, 0.1);
  const Geometry geo = s.geometry(st.d);
  s.transcribe(geo, st.background, true);
  s.transcribe(geo, prev.background, true);
  const double t = st.t + s.problem().time.dt;
  const auto A = s.assemble(geo, st, st, prev, t, true);
  const Vector x = s.pack(geo, st);
  const Eigen::MatrixXd J(A.jacobian);
  Eigen::MatrixXd Jfd(J.rows(), J.cols());
  FieldState it = st;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double eps = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    s.unpack(geo, xp, it);
    const Vector rp = s.assemble(geo, it, st, prev, t, false).residual;
    s.unpack(geo, xm, it);
    const Vector rm = s.assemble(geo, it, st, prev, t, false).residual;
    Jfd.col(j) = (rp - rm) / (2.0 * eps);
  }
  const double rel = (J - Jfd).norm() / J.norm();
  Eigen::Index wi = 0, wj = 0;
  (J - Jfd).cwiseAbs().maxCoeff(&wi, &wj);
  r.seconds = sw.seconds();
  r.value = rel;
  r.passed = x.size() <= 300 && rel < 1e-4;
  r.detail = fmt::format("{} unknowns, relative Frobenius mismatch {:.3e} (largest at row {}, column {})", x.size(),
                         rel, wi, wj);
  return r;
}

CriterionResult check_moving_cylinder(const std::string& work_dir) {
  Stopwatch sw;
  CriterionResult r;
  r.id = "monolithic.moving_cylinder";
  const double wall_speed = 0.8 * (2.0 * kPi / 3.0) * std::cos(2.0 * kPi / 3.0 * (0.5 - 0.75));
  r.threshold = 0.02 * wall_speed;
  auto cfg = builtin_scenario("moving_cylinder:desk");
  RunOptions opt;
  opt.out_dir = temp_dir(work_dir, "moving_cylinder_desk");
  opt.quiet = true;
  const auto rep = run(cfg, opt);
  int max_cycles = 0;
  for (const auto& s : rep.step_reports) max_cycles = std::max(max_cycles, s.cycles);
  double jump = std::numeric_limits<double>::quiet_NaN();
  int crossings = 0;
  for (const auto& cut : rep.line_cuts) {
    if (std::abs(cut.t - 0.5) > 1e-9) continue;
    jump = 0.0;
    for (const auto& c : cut.crossings) {
      jump = std::max(jump, c.jump);
      ++crossings;
    }
  }
  const bool finished = rep.ok && !rep.final_state.d.empty() && rep.final_state.t >= 1.0 - 1e-9;
  r.seconds = sw.seconds();
  r.value = jump;
  r.passed = finished && max_cycles <= 3 && crossings >= 2 && jump < r.threshold;
  r.detail = fmt::format("{} steps{}, max cycles {}, line cut x=0.7 at t=0.5: {} crossings, max jump {:.3g} "
                         "(wall speed {:.4f})",
                         rep.steps, rep.ok ? "" : " FAILED: " + rep.error, max_cycles, crossings, jump, wall_speed);
  return r;
}

CriterionResult check_ball_cross_validation(const std::string& work_dir) {
  Stopwatch sw;
  CriterionResult r;
  r.id = "monolithic.ball_hybrid_vs_fixed_grid";
  r.threshold = 0.05;
  RunOptions opt;
  opt.quiet = true;
  opt.out_dir = temp_dir(work_dir, "ball_hybrid");
  const auto hy = run(builtin_scenario("compressing_ball:desk", Mode::Hybrid), opt);
  opt.out_dir = temp_dir(work_dir, "ball_fixed_grid");
  const auto fg = run(builtin_scenario("compressing_ball:desk", Mode::FixedGrid), opt);
  double diff = 0.0, scale = 0.0;
  const std::size_t n = std::min(hy.rows.size(), fg.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    diff = std::max(diff, std::abs(hy.rows[i].probe[1] - fg.rows[i].probe[1]));
    scale = std::max(scale, std::abs(fg.rows[i].probe[1]));
  }
  const double rel = scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
  const bool complete = hy.ok && fg.ok && n > 0 && std::abs(hy.rows[n - 1].t - 1.0) < 1e-9;
  r.seconds = sw.seconds();
  r.value = rel;
  r.passed = complete && rel < r.threshold;
  r.detail = fmt::format("top point d2 relative Linf difference {:.4f} over {} steps (max |d2| {:.4g}){}{}", rel, n,
                         scale, hy.ok ? "" : "; hybrid failed: " + hy.error, fg.ok ? "" : "; fixed grid failed: " + fg.error);
  return r;
}

CriterionResult check_determinism(const std::string& work_dir) {
  Stopwatch sw;
  CriterionResult r;
  r.id = "determinism";
  r.threshold = 0.0;
  // Every suite fixture, twice, compared bit for bit.
  auto fingerprint = [&](int pass) {
    std::vector<double> out;
    const QuadMesh bg = generate_structured_rect(Vec2(0.0, 0.0), Vec2(1.0, 1.0), 20, 20);
    std::mt19937_64 rng(99);
    for (int k = 0; k < 50; ++k) {
      const auto cut = classify_and_cut(bg, random_cutter(rng, k % 4 == 3, 0.05));
      out.insert(out.end(), cut.physical_area.begin(), cut.physical_area.end());
    }
    for (auto make : {+[] { return fixtures::manufactured_flow(16); }, +[] { return fixtures::couette(true); },
                      +[] { return fixtures::fixed_cylinder(0); }, +[] { return fixtures::straight_cut(0.5 + 1e-4, true); }}) {
      Solver s(make());
      FieldState st = s.initial_state();
      s.advance(st);
      const auto f = flatten(st);
      out.insert(out.end(), f.begin(), f.end());
    }
    {
      Solver s(fixtures::small_hybrid());
      FieldState st = s.initial_state();
      for (int i = 0; i < 3; ++i) s.advance(st);
      const auto f = flatten(st);
      out.insert(out.end(), f.begin(), f.end());
    }
    RunOptions opt;
    opt.quiet = true;
    opt.max_steps = 10;
    opt.out_dir = temp_dir(work_dir, fmt::format("determinism_{}", pass));
    const auto rep = run(builtin_scenario("moving_cylinder:desk"), opt);
    const auto f = flatten(rep.final_state);
    out.insert(out.end(), f.begin(), f.end());
    for (const auto& row : rep.rows) {
      out.push_back(row.force.x());
      out.push_back(row.force.y());
    }
    return out;
  };
  const auto a = fingerprint(0), b = fingerprint(1);
  std::size_t differing = a.size() == b.size() ? 0 : std::max(a.size(), b.size());
  if (a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) ++differing;
  }
  r.seconds = sw.seconds();
  r.value = static_cast<double>(differing);
  r.passed = differing == 0;
  r.detail = fmt::format("{} values compared across two runs of every fixture, {} differ", a.size(), differing);
  return r;
}

std::vector<std::string> verify_suite_names() { return {"geometry", "fluid", "solid", "coupling", "monolithic"}; }

std::vector<CriterionResult> run_verify_suite(const std::string& name, const std::string& work_dir) {
  if (name == "geometry") return {check_cutter_sweep()};
  if (name == "fluid") return {check_manufactured_rates(), check_ghost_penalty_conditioning()};
  if (name == "solid") return {check_oscillator()};
  if (name == "coupling") return {check_couette_patch(), check_fluid_solid_rate(), check_jacobian()};
  if (name == "monolithic") {
    return {check_moving_cylinder(work_dir), check_ball_cross_validation(work_dir), check_determinism(work_dir)};
  }
  throw ConfigError("unknown verify suite '" + name + "'");
}

}  // namespace hyfsi
