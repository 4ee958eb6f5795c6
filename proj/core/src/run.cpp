#include "hyfsi/run.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

namespace hyfsi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json doubles(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error("checkpoint: non-finite value in state");
  return json(v);
}

json fluid_json(const FluidFields& f) {
  std::vector<int> valued(f.valued.begin(), f.valued.end());
  return {{"u", doubles(f.u)}, {"p", doubles(f.p)}, {"a", doubles(f.a)}, {"valued", valued}};
}

FluidFields fluid_from_json(const json& j) {
  FluidFields f;
  f.u = j.at("u").get<std::vector<double>>();
  f.p = j.at("p").get<std::vector<double>>();
  f.a = j.at("a").get<std::vector<double>>();
  const auto valued = j.at("valued").get<std::vector<int>>();
  f.valued.assign(valued.begin(), valued.end());
  return f;
}

std::string row_csv(const SeriesRow& r) {
  std::string line = fmt::format("{}", r.t);
  for (double d : r.probe) line += fmt::format(",{}", d);
  line += fmt::format(",{},{},{},{}\n", r.force.x(), r.force.y(), r.iterations, r.cycles);
  return line;
}

std::vector<int> probe_nodes(const Problem& p, const std::vector<Vec2>& probes) {
  std::vector<int> out;
  if (!p.solid) return out;
  for (const auto& q : probes) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.solid->num_nodes(); ++i) {
      const double d = (p.solid->nodes[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<std::string> scenario_notes(const ScenarioConfig& c) {
  std::vector<std::string> notes;
  if (c.geometry.kind == "disc") {
    notes.push_back(fmt::format(
        "solid disc boundary uses {} segments; all-quad disc meshes need a multiple of 4", c.geometry.n_circum));
  }
  if (c.name.rfind("moving_cylinder", 0) == 0) {
    notes.push_back(
        "cylinder motion law 0.8 + 0.8 sin(2 pi/3 (t - 0.75)) is the displacement of the center; its "
        "position is 0.3 plus that value");
  }
  if (c.name.rfind("vibrating_flag", 0) == 0) {
    notes.push_back(fmt::format("flag Young's modulus E = {}", c.solid.E));
  }
  return notes;
}

void write_manifest(const fs::path& dir, const ScenarioConfig& c, const RunReport& rep) {
  json m;
  m["format"] = "hyfsi-run";
  m["version"] = 1;
  m["scenario"] = c.name;
  m["mode"] = to_string(c.mode);
  m["config"] = "config.ini";
  m["series"] = {{"file", "series.csv"}, {"columns", series_columns(c)}};
  std::vector<std::string> snapshots, cuts, crossings, checkpoints;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("line_cut_", 0) == 0 && name.ends_with("_crossings.csv")) crossings.push_back(name);
    else if (name.rfind("line_cut_", 0) == 0) cuts.push_back(name);
    else if (name.rfind("checkpoint_", 0) == 0) checkpoints.push_back(name);
  }
  if (fs::exists(dir / "snapshots")) {
    for (const auto& entry : fs::directory_iterator(dir / "snapshots"))
      snapshots.push_back("snapshots/" + entry.path().filename().string());
  }
  for (auto* v : {&snapshots, &cuts, &crossings, &checkpoints}) std::sort(v->begin(), v->end());
  m["snapshots"] = snapshots;
  m["line_cuts"] = cuts;
  m["line_cut_crossings"] = crossings;
  m["line_cut_columns"] = {"s", "x", "y", "u1", "u2", "p", "source"};
  m["checkpoints"] = checkpoints;
  m["notes"] = scenario_notes(c);
  m["completed"] = rep.ok;
  if (!rep.ok) m["error"] = rep.error;
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  const auto& s = c.state;
  json j;
  j["format"] = "hyfsi-checkpoint";
  j["config"] = c.config;
  j["t"] = s.t;
  j["step"] = s.step;
  j["background"] = fluid_json(s.background);
  j["patch"] = fluid_json(s.patch);
  j["d"] = doubles(s.d);
  j["v"] = doubles(s.v);
  j["a"] = doubles(s.a);
  j["f_int"] = doubles(s.f_int);
  j["c_sf2"] = doubles(s.c_sf2);
  j["d_grid"] = doubles(s.d_grid);
  j["u_grid"] = doubles(s.u_grid);
  json rows = json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"t", r.t},
                    {"probe", r.probe},
                    {"force", {r.force.x(), r.force.y()}},
                    {"iterations", r.iterations},
                    {"cycles", r.cycles}});
  }
  j["rows"] = rows;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write checkpoint " + path);
    out << j.dump() << '\n';
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "hyfsi-checkpoint") throw ConfigError("not a checkpoint file: " + path);
    Checkpoint c;
    c.config = j.at("config").get<std::string>();
    auto& s = c.state;
    s.t = j.at("t").get<double>();
    s.step = j.at("step").get<int>();
    s.background = fluid_from_json(j.at("background"));
    s.patch = fluid_from_json(j.at("patch"));
    s.d = j.at("d").get<std::vector<double>>();
    s.v = j.at("v").get<std::vector<double>>();
    s.a = j.at("a").get<std::vector<double>>();
    s.f_int = j.at("f_int").get<std::vector<double>>();
    s.c_sf2 = j.at("c_sf2").get<std::vector<double>>();
    s.d_grid = j.at("d_grid").get<std::vector<double>>();
    s.u_grid = j.at("u_grid").get<std::vector<double>>();
    for (const auto& r : j.at("rows")) {
      SeriesRow row;
      row.t = r.at("t").get<double>();
      row.probe = r.at("probe").get<std::vector<double>>();
      const auto f = r.at("force").get<std::vector<double>>();
      row.force = Vec2(f.at(0), f.at(1));
      row.iterations = r.at("iterations").get<int>();
      row.cycles = r.at("cycles").get<int>();
      c.rows.push_back(std::move(row));
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path + " is malformed: " + e.what());
  }
}

std::vector<std::string> series_columns(const ScenarioConfig& c) {
  std::vector<std::string> cols{"t"};
  const std::size_t n = std::max<std::size_t>(1, c.output.probes.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string suffix = i == 0 ? "" : fmt::format("_{}", i);
    cols.push_back("d1" + suffix);
    cols.push_back("d2" + suffix);
  }
  for (const char* name : {"f1", "f2", "iters", "cycles"}) cols.emplace_back(name);
  return cols;
}

RunReport run(const ScenarioConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (options.out_dir.empty()) throw ConfigError("run needs an output directory");
  const fs::path dir(options.out_dir);
  fs::create_directories(dir);
  const std::string config_text = emit_config(config);
  {
    std::ofstream out(dir / "config.ini");
    if (!out) throw ConfigError("output directory " + options.out_dir + " is not writable");
    out << config_text;
  }

  Solver solver(build_problem(config));
  const Problem& problem = solver.problem();
  const auto probes = probe_nodes(problem, config.output.probes);
  const std::size_t n_probe_values = 2 * std::max<std::size_t>(1, probes.size());

  RunReport rep;
  FieldState state;
  if (options.restart) {
    auto cp = load_checkpoint(*options.restart);
    if (cp.config != config_text) throw ConfigError("checkpoint was written for a different configuration");
    state = std::move(cp.state);
    rep.rows = std::move(cp.rows);
  } else {
    state = solver.initial_state();
  }

  std::ofstream series(dir / "series.csv");
  {
    const auto cols = series_columns(config);
    std::string header;
    for (const auto& c : cols) header += (header.empty() ? "" : ",") + c;
    series << header << '\n';
    for (const auto& r : rep.rows) series << row_csv(r);
    series.flush();
  }

  auto checkpoint = [&](const std::string& name) {
    save_checkpoint((dir / name).string(), Checkpoint{config_text, state, rep.rows});
  };

  const auto& out_cfg = config.output;
  const double dt = problem.time.dt;
  auto outputs = [&](bool initial) {
    const bool snapshot = out_cfg.snapshot_every > 0 && state.step % out_cfg.snapshot_every == 0;
    std::vector<double> cut_times;
    if (out_cfg.line_cut) {
      for (double tc : out_cfg.line_cut_times) {
        const bool hit = initial ? std::abs(tc - state.t) <= 1e-12 * std::max(1.0, std::abs(tc))
                                 : std::abs(tc - state.t) <= 0.5 * dt;
        if (hit) cut_times.push_back(tc);
      }
    }
    if (!snapshot && cut_times.empty()) return;
    const Geometry geo = solver.geometry(state.d);
    if (snapshot) write_snapshot((dir / "snapshots").string(), fmt::format("{:06d}", state.step), solver, state, geo);
    for (double tc : cut_times) {
      const auto& lc = *out_cfg.line_cut;
      auto cut = sample_line_cut(solver, state, geo, lc.a, lc.b, lc.samples);
      const std::string stem = fmt::format("line_cut_t{:.6f}", tc);
      write_line_cut_csv((dir / (stem + ".csv")).string(), cut);
      write_crossings_csv((dir / (stem + "_crossings.csv")).string(), cut);
      rep.line_cuts.push_back(std::move(cut));
    }
  };

  try {
    if (!options.restart) outputs(true);
    const double t_end = problem.time.t_end;
    auto more = [&] {
      if (problem.time.steady) return state.step == 0;
      return state.t < t_end - 0.5 * dt;
    };
    while (more() && (!options.max_steps || rep.steps < *options.max_steps)) {
      FieldState before = state;
      StepReport sr;
      try {
        sr = solver.advance(state);
      } catch (const Error&) {
        state = std::move(before);
        throw;
      }
      ++rep.steps;
      SeriesRow row;
      row.t = state.t;
      row.probe.assign(n_probe_values, std::numeric_limits<double>::quiet_NaN());
      for (std::size_t i = 0; i < probes.size(); ++i) {
        row.probe[2 * i] = state.d[2 * probes[i]];
        row.probe[2 * i + 1] = state.d[2 * probes[i] + 1];
      }
      row.force = sr.interface_force;
      row.iterations = sr.iterations;
      row.cycles = sr.cycles;
      series << row_csv(row);
      series.flush();
      rep.rows.push_back(row);
      if (!options.quiet) {
        spdlog::info("step {} t={:.6g} newton={} cycles={} halvings={}", state.step, state.t, sr.iterations,
                     sr.cycles, sr.halvings);
      }
      rep.step_reports.push_back(std::move(sr));
      outputs(false);
      if (out_cfg.checkpoint_every > 0 && state.step % out_cfg.checkpoint_every == 0) {
        checkpoint(fmt::format("checkpoint_{:06d}.json", state.step));
      }
    }
    checkpoint(fmt::format("checkpoint_{:06d}.json", state.step));
  } catch (const Error& e) {
    rep.ok = false;
    rep.error = e.what();
    spdlog::error("run stopped at t={}: {}", state.t, e.what());
    try {
      checkpoint("checkpoint_final.json");
    } catch (const Error& e2) {
      spdlog::error("final checkpoint failed: {}", e2.what());
    }
  }
  rep.final_state = state;
  write_manifest(dir, config, rep);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace hyfsi
