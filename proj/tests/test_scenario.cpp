#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hyfsi/run.hpp"
#include "hyfsi/scenario.hpp"
#include "hyfsi/verify.hpp"

namespace hyfsi {
namespace {

namespace fs = std::filesystem;

std::string fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "hyfsi_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The compressing ball on a coarse grid with a short horizon.
ScenarioConfig tiny_ball() {
  auto c = builtin_scenario("compressing_ball:desk");
  c.name = "tiny_ball";
  c.geometry.background_nx = c.geometry.background_ny = 10;
  c.geometry.n_circum = 16;
  c.geometry.patch_outer_radius = 1.1;
  c.geometry.patch_layers = 2;
  c.time.dt = 0.05;
  c.time.t_end = 0.2;
  c.output.line_cut_times = {0.2};
  c.output.line_cut->samples = 41;
  return c;
}

const DirichletBC& find_bc(const ScenarioConfig& c, Field f, const std::string& tag, int comp) {
  for (const auto& bc : c.bcs)
    if (bc.field == f && bc.tag == tag && std::find(bc.components.begin(), bc.components.end(), comp) != bc.components.end())
      return bc;
  throw std::runtime_error("no such condition");
}

TEST(Builtins, BallInflowAfterRamp) {
  const auto c = builtin_scenario("compressing_ball");
  EXPECT_NEAR(find_bc(c, Field::Background, "bottom", 1).value(Vec2::Zero(), 5.0, 1), 4.0, 1e-14);
  EXPECT_NEAR(find_bc(c, Field::Background, "top", 1).value(Vec2::Zero(), 5.0, 1), -4.0, 1e-14);
  EXPECT_NEAR(find_bc(c, Field::Background, "top", 1).value(Vec2::Zero(), 6.3, 1), -4.0, 1e-14);
  EXPECT_NEAR(find_bc(c, Field::Background, "top", 1).value(Vec2::Zero(), 0.0, 1), 0.0, 1e-14);
}

TEST(Builtins, CylinderTrajectory) {
  const auto c = builtin_scenario("moving_cylinder");
  const auto& bc = find_bc(c, Field::Solid, "*", 0);
  auto center = [&](double t) { return c.geometry.center.x() + bc.value(c.geometry.center, t, 0); };
  EXPECT_NEAR(center(0.0), 0.3, 1e-14);
  EXPECT_NEAR(center(1.5), 1.9, 1e-14);
  EXPECT_NEAR(center(3.0), 0.3, 1e-14);
  EXPECT_NEAR(find_bc(c, Field::Solid, "*", 1).value(c.geometry.center, 1.0, 1), 0.0, 0.0);
}

TEST(Builtins, UnknownNameListsBuiltins) {
  try {
    builtin_scenario("moving_sphere");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& name : builtin_names()) EXPECT_NE(msg.find(name), std::string::npos) << name;
  }
  EXPECT_THROW(builtin_scenario("compressing_ball:huge"), ConfigError);
  EXPECT_THROW(builtin_scenario("compressing_ball", Mode::SingleMesh), ConfigError);
}

TEST(Builtins, ProblemsBuild) {
  for (const auto& name : {"compressing_ball:desk", "moving_cylinder:desk", "vibrating_flag:desk"}) {
    for (Mode m : {Mode::Hybrid, Mode::FixedGrid}) {
      const auto p = build_problem(builtin_scenario(name, m));
      EXPECT_NO_THROW(p.validate()) << name;
      EXPECT_EQ(p.patch.has_value(), m == Mode::Hybrid) << name;
      EXPECT_TRUE(p.solid.has_value());
    }
  }
}

TEST(Config, RoundTripsEveryBuiltin) {
  for (const auto& name : builtin_names()) {
    for (Mode m : {Mode::Hybrid, Mode::FixedGrid}) {
      const auto c = builtin_scenario(name, m);
      const auto text = emit_config(c);
      const auto back = parse_config(text);
      EXPECT_TRUE(back == c) << name;
      EXPECT_EQ(emit_config(back), text) << name;
    }
  }
}

TEST(Config, FileRoundTrip) {
  const auto dir = fresh_dir("config");
  const auto c = tiny_ball();
  save_config(c, dir + "/c.ini");
  EXPECT_TRUE(load_config(dir + "/c.ini") == c);
  EXPECT_THROW(load_config(dir + "/missing.ini"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndSections) {
  const auto text = emit_config(tiny_ball());
  EXPECT_THROW(parse_config(text + "\n[fluid_extra]\nrho = 1\n"), ConfigError);
  std::string bad = text;
  bad.replace(bad.find("[fluid]"), 7, "[fluid]\nviscosity = 3");
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST(Config, RejectsDuplicatesAndBadValues) {
  const auto text = emit_config(tiny_ball());
  std::string dup = text;
  dup.replace(dup.find("[fluid]"), 7, "[fluid]\nrho = 2");
  EXPECT_THROW(parse_config(dup), ConfigError);
  std::string bad = text;
  const auto pos = bad.find("dt = ");
  bad.replace(pos, bad.find('\n', pos) - pos, "dt = fast");
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST(Config, RejectsMissingTag) {
  auto c = tiny_ball();
  c.bcs.back().tag = "equator";
  EXPECT_THROW(build_problem(c), ConfigError);
}

TEST(Run, ZeroInflowKeepsForcesAtZero) {
  auto c = tiny_ball();
  for (auto& bc : c.bcs) bc.c0 = 0.0;
  RunOptions opt;
  opt.out_dir = fresh_dir("zero_inflow");
  opt.quiet = true;
  opt.max_steps = 2;
  const auto rep = run(c, opt);
  ASSERT_TRUE(rep.ok) << rep.error;
  for (const auto& r : rep.rows) EXPECT_LT(r.force.norm(), 1e-8);
}

TEST(Run, OutputsAndManifest) {
  auto c = tiny_ball();
  c.output.snapshot_every = 2;
  c.output.checkpoint_every = 2;
  RunOptions opt;
  opt.out_dir = fresh_dir("outputs");
  opt.quiet = true;
  const auto rep = run(c, opt);
  ASSERT_TRUE(rep.ok) << rep.error;
  EXPECT_EQ(rep.steps, 4);
  const fs::path d(opt.out_dir);
  for (const char* f : {"config.ini", "series.csv", "manifest.json", "checkpoint_000002.json", "checkpoint_000004.json",
                        "line_cut_t0.200000.csv", "line_cut_t0.200000_crossings.csv"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  int vtk = 0;
  for (const auto& e : fs::directory_iterator(d / "snapshots")) vtk += e.path().extension() == ".vtk";
  EXPECT_EQ(vtk, 3 * 3);  // steps 0, 2, 4 for background, patch and solid
  const auto series = read_file(d / "series.csv");
  EXPECT_EQ(series.substr(0, series.find('\n')), "t,d1,d2,f1,f2,iters,cycles");
  EXPECT_EQ(std::count(series.begin(), series.end(), '\n'), 5);
  ASSERT_EQ(rep.line_cuts.size(), 1u);
  EXPECT_EQ(rep.line_cuts[0].samples.size(), 41u);
}

TEST(Run, SnapshotCadenceZeroWritesNoVtk) {
  auto c = tiny_ball();
  c.output.snapshot_every = 0;
  RunOptions opt;
  opt.out_dir = fresh_dir("no_snapshots");
  opt.quiet = true;
  opt.max_steps = 1;
  ASSERT_TRUE(run(c, opt).ok);
  for (const auto& e : fs::recursive_directory_iterator(opt.out_dir)) EXPECT_NE(e.path().extension(), ".vtk");
}

TEST(Run, RestartIsBitwiseEquivalent) {
  auto c = tiny_ball();
  c.output.checkpoint_every = 2;
  RunOptions full;
  full.out_dir = fresh_dir("restart_full");
  full.quiet = true;
  const auto a = run(c, full);
  ASSERT_TRUE(a.ok) << a.error;

  RunOptions first = full;
  first.out_dir = fresh_dir("restart_part");
  first.max_steps = 2;
  ASSERT_TRUE(run(c, first).ok);
  RunOptions second = first;
  second.max_steps.reset();
  second.restart = first.out_dir + "/checkpoint_000002.json";
  const auto b = run(c, second);
  ASSERT_TRUE(b.ok) << b.error;
  EXPECT_EQ(b.steps, 2);
  EXPECT_TRUE(a.final_state == b.final_state);
  EXPECT_EQ(read_file(fs::path(full.out_dir) / "series.csv"), read_file(fs::path(first.out_dir) / "series.csv"));
}

TEST(Run, RestartRejectsForeignCheckpoint) {
  auto c = tiny_ball();
  RunOptions opt;
  opt.out_dir = fresh_dir("foreign");
  opt.quiet = true;
  opt.max_steps = 1;
  ASSERT_TRUE(run(c, opt).ok);
  c.fluid.mu = 2.0;
  RunOptions again = opt;
  again.restart = opt.out_dir + "/checkpoint_000001.json";
  EXPECT_THROW(run(c, again), ConfigError);
}

TEST(Checkpoint, RoundTripsState) {
  Solver s(fixtures::small_hybrid());
  auto st = s.initial_state();
  s.advance(st);
  const auto dir = fresh_dir("checkpoint");
  Checkpoint cp{"[scenario]\nname = x\n", st, {SeriesRow{0.05, {1.0, 2.0}, Vec2(3, 4), 2, 1}}};
  save_checkpoint(dir + "/c.json", cp);
  const auto back = load_checkpoint(dir + "/c.json");
  EXPECT_EQ(back.config, cp.config);
  EXPECT_TRUE(back.state == st);
  EXPECT_TRUE(back.rows == cp.rows);
}

class LineCutTest : public ::testing::Test {
 protected:
  Solver solver{build_problem(tiny_ball())};
  FieldState state = solver.initial_state();
  Geometry geo = solver.geometry(state.d);

  void fill(FluidFields& f, const Vec2& u, double p) {
    for (std::size_t i = 0; i < f.p.size(); ++i) {
      f.u[2 * i] = u.x();
      f.u[2 * i + 1] = u.y();
      f.p[i] = p;
    }
  }
};

TEST_F(LineCutTest, ConstantFieldGivesConstantSamples) {
  fill(state.background, Vec2(1, 2), 3);
  fill(state.patch, Vec2(1, 2), 3);
  const auto cut = sample_line_cut(solver, state, geo, Vec2(-1.9, -1.3), Vec2(1.9, 1.7), 57);
  int fluid = 0, solid = 0;
  for (const auto& s : cut.samples) {
    if (s.source == "solid") {
      ++solid;
      EXPECT_TRUE(std::isnan(s.p));
      continue;
    }
    ++fluid;
    EXPECT_NEAR(s.u.x(), 1.0, 1e-12);
    EXPECT_NEAR(s.u.y(), 2.0, 1e-12);
    EXPECT_NEAR(s.p, 3.0, 1e-12);
  }
  EXPECT_GT(fluid, 0);
  EXPECT_GT(solid, 0);
  for (const auto& x : cut.crossings) EXPECT_NEAR(x.jump, 0.0, 1e-12);
  EXPECT_EQ(cut.crossings.size(), 2u);
}

TEST_F(LineCutTest, PatchTakesPrecedenceOnItsBoundary) {
  fill(state.background, Vec2(1, 0), 0);
  fill(state.patch, Vec2(5, 0), 0);
  const auto& patch = *solver.problem().patch;
  const auto ff = patch.tagged_nodes("ff");
  const Vec2 x = patch.nodes[ff.front()];
  const auto cut = sample_line_cut(solver, state, geo, x, x + Vec2(1e-3, 0), 2);
  EXPECT_EQ(cut.samples.front().source, "patch");
  EXPECT_NEAR(cut.samples.front().u.x(), 5.0, 1e-12);
}

TEST_F(LineCutTest, OutsidePointsAreMarked) {
  const auto cut = sample_line_cut(solver, state, geo, Vec2(2.5, 0), Vec2(3, 0), 3);
  for (const auto& s : cut.samples) EXPECT_EQ(s.source, "outside");
}

TEST(LineCut, CouetteProfileIsLinear) {
  Solver s(fixtures::couette(true));
  auto st = s.initial_state();
  s.advance(st);
  const auto geo = s.geometry(st.d);
  const auto cut = sample_line_cut(s, st, geo, Vec2(1.0, 0.0), Vec2(1.0, 1.0), 101);
  bool saw_patch = false;
  for (const auto& x : cut.samples) {
    saw_patch = saw_patch || x.source == "patch";
    EXPECT_NEAR(x.u.x(), x.x.y(), 1e-8);
    EXPECT_NEAR(x.u.y(), 0.0, 1e-8);
  }
  EXPECT_TRUE(saw_patch);
  EXPECT_EQ(cut.crossings.size(), 2u);
}

TEST(LineCut, CsvLayout) {
  LineCut cut;
  cut.samples.push_back({0.0, Vec2(1, 2), Vec2(3, 4), 5.0, "patch"});
  cut.samples.push_back({0.5, Vec2(1, 2.5), Vec2(NAN, NAN), NAN, "solid"});
  const auto dir = fresh_dir("csv");
  write_line_cut_csv(dir + "/l.csv", cut);
  const auto text = read_file(dir + "/l.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "s,x,y,u1,u2,p,source");
  EXPECT_NE(text.find("nan,nan,nan,solid"), std::string::npos);
}

}  // namespace
}  // namespace hyfsi
