#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "referee/backend.hpp"
#include "referee/datasets.hpp"
#include "referee/debate.hpp"
#include "referee/metrics.hpp"
#include "referee/prompting.hpp"

namespace referee {

struct BackendDef {
  std::string id;
  std::string kind;  // "openai" or "mock"
  std::string endpoint;
  std::string model;
  std::string api_key_env;
  std::optional<double> requests_per_minute;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  double timeout_seconds = 60.0;
  std::optional<std::string> cache_file;
  std::vector<MockBackend::Rule> rules;
};

/// Everything one evaluation run needs. Paths are kept as written and
/// resolved against `base_dir`, the directory of the config file.
struct RunConfig {
  std::filesystem::path base_dir = ".";

  std::string dataset_path;
  DatasetKind dataset_kind = DatasetKind::Pairwise;
  std::vector<std::string> dimensions;  // scoring only; empty means every scaled dimension
  std::optional<std::size_t> sample;    // evaluate a seeded random subset of this size
  std::uint64_t seed = 0;

  Strategy strategy = Strategy::OneByOne;
  int num_agents = 2;
  std::vector<AgentSpec> agents;  // explicit roster; overrides num_agents when set
  std::string agent_backend;
  int turns = 2;
  bool position_calibration = true;
  bool diverse_roles = true;
  std::optional<std::string> summarizer_backend;
  bool literal_one_by_one = false;
  std::size_t max_prompt_chars = 0;

  std::vector<BackendDef> backends;
  std::optional<std::string> pairwise_template;
  std::optional<std::string> dimension_template;
  std::optional<std::string> summarizer_template;
  std::optional<std::string> personas_file;

  std::string output_dir = "out";
  int parallelism = 1;

  std::filesystem::path resolve(const std::string& path) const;
};

/// Parses a config object. Unknown keys and bad values throw InvalidConfig.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// The effective configuration, as embedded in every transcript. Holds the
/// name of each API key variable, never the key.
Json to_json(const RunConfig& config);

struct Overrides {
  std::optional<Strategy> strategy;
  std::optional<int> agents;
  std::optional<int> turns;
  bool no_calibration = false;
  std::optional<std::string> dataset;
  std::optional<std::string> out;
};

void apply(RunConfig& config, const Overrides& overrides);

/// Roster for `count` agents: built-in roles in library order with fixed
/// display names.
std::vector<AgentSpec> default_roster(int count, const std::string& backend_id);

/// The debate configuration for one evaluation mode.
DebateConfig make_debate_config(const RunConfig& config, const EvalMode& mode);

PromptSet build_prompts(const RunConfig& config);

/// Instantiates every backend. Reads API keys from the environment.
BackendRegistry build_registry(const RunConfig& config);

/// Checks the whole configuration without touching the network: dataset
/// presence, templates, personas, backends, keys and every debate config.
void validate(const RunConfig& config);

/// The dataset items a run covers: all of them, or the seeded sample.
Dataset load_run_dataset(const RunConfig& config);

struct RunPaths {
  std::filesystem::path transcripts;
  std::filesystem::path report_text;
  std::filesystem::path report_json;
  std::filesystem::path errors;
};

RunPaths run_paths(const RunConfig& config);

struct RunSummary {
  std::size_t debates = 0;  // debate runs executed now
  std::size_t skipped = 0;  // jobs already present in the transcript file
  std::vector<std::string> errors;
  std::optional<Report> report;
};

/// Runs every pending debate, appends transcripts in dataset order and
/// writes the report. Existing records with the same configuration are
/// reused unless `force` is set.
RunSummary cmd_run(const RunConfig& config, bool force, std::ostream& log);

/// Uses a caller-supplied registry instead of building one from the config.
RunSummary cmd_run(const RunConfig& config, const BackendRegistry& registry, bool force,
                   std::ostream& log);

struct SweepAxis {
  std::vector<int> agents;  // empty: keep the configured roster size
  std::vector<int> turns;   // empty: keep the configured turn count
};

struct SweepRow {
  int agents = 0;
  int turns = 0;
  Report report;
};

/// Throws InvalidSweep for an empty grid or non-positive values.
void validate(const SweepAxis& axis);

/// One run per grid point under <out>/sweep/, plus sweep.txt and sweep.json.
std::vector<SweepRow> cmd_sweep(const RunConfig& config, const SweepAxis& axis, bool force,
                                std::ostream& log);
std::string sweep_table(const std::vector<SweepRow>& rows);

std::vector<Transcript> read_transcripts(const std::filesystem::path& path);

struct ReplayResult {
  std::size_t records = 0;
  std::vector<std::string> mismatches;  // "item_id (order)" entries
  std::optional<Report> report;
};

/// Re-parses and re-aggregates every stored record without calling any
/// backend. Mismatches are collected, not thrown.
ReplayResult replay(const std::vector<Transcript>& transcripts, const Dataset* dataset);

/// As replay, but throws ReplayMismatch naming the offending items.
Report cmd_replay(const std::filesystem::path& transcript_path, const Dataset& dataset);

/// Recomputes the report from the run's transcript file.
Report cmd_report(const RunConfig& config);

}  // namespace referee
