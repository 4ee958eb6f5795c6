#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyfsi/output.hpp"
#include "hyfsi/scenario.hpp"

namespace hyfsi {

// One row of series.csv.
struct SeriesRow {
  double t = 0.0;
  std::vector<double> probe;  // d1, d2 per probe
  Vec2 force = Vec2::Zero();
  int iterations = 0;
  int cycles = 0;
  bool operator==(const SeriesRow&) const = default;
};

struct Checkpoint {
  std::string config;  // emitted scenario config the state belongs to
  FieldState state;
  std::vector<SeriesRow> rows;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

struct RunOptions {
  std::string out_dir;
  std::optional<int> max_steps;
  std::optional<std::string> restart;
  bool quiet = false;
};

struct RunReport {
  bool ok = true;
  std::string error;
  int steps = 0;  // steps taken by this invocation
  FieldState final_state;
  std::vector<SeriesRow> rows;  // including rows restored from a checkpoint
  std::vector<StepReport> step_reports;
  std::vector<LineCut> line_cuts;
  double wall_seconds = 0.0;
};

std::vector<std::string> series_columns(const ScenarioConfig& c);

// Time loop with every file output of a run. Solver errors end the loop with
// a final checkpoint; they are reported through `ok`/`error`.
RunReport run(const ScenarioConfig& config, const RunOptions& options);

}  // namespace hyfsi
