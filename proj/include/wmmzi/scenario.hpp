#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmmzi/analysis.hpp"
#include "wmmzi/config.hpp"
#include "wmmzi/simulator.hpp"

namespace wmmzi {

/// Runtime overrides supplied on the command line.
struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  int threads = 1;
  bool deterministic = false;  ///< suppress timestamps in plot comments
};

struct ScenarioOutcome {
  nlohmann::json report;
  std::string summary;                  ///< one-line result digest
  std::vector<std::string> files;       ///< artifacts written, in order
  std::optional<DualityMetrics> duality;
};

/// Runs one scenario end to end: simulation, analysis, artifacts on disk
/// (scan CSV/JSON, report JSON, SVG plots) under the output directory.
ScenarioOutcome run_scenario(const ScenarioConfig& config,
                             const RunFlags& flags = {});

/// Figure shorthands accepted by the `reproduce` subcommand.
enum class FigureId : std::uint8_t { fig3c, fig4ab, fig4cd };

std::optional<FigureId> parse_figure_id(const std::string& name);

/// Built-in scenario for a figure shorthand (identical to the matching file
/// shipped under configs/).
ScenarioConfig builtin_config(FigureId figure);

}  // namespace wmmzi
