// referee_cli: run, sweep, replay and report multi-agent evaluation debates.
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "referee/cli.hpp"
#include "referee/error.hpp"

namespace {

using namespace referee;

// Errors go to stderr as one JSON object; stdout stays for reports.
int fail(const std::string& code, const std::string& message, const Json& extra = Json::object()) {
  Json j{{"status", "error"}, {"code", code}, {"message", message}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << "\n";
  return 1;
}

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      int v = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidSweep, "not an integer: '" + part + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent referee debates for text evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  Overrides ov;
  std::string strategy;
  int agents = 0;
  int turns = 0;
  std::string dataset;
  std::string out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
    cmd->add_flag("--force", force, "Ignore existing transcripts");
    cmd->add_option("--strategy", strategy, "one_by_one | simultaneous_talk | simultaneous_talk_with_summarizer");
    cmd->add_option("--agents", agents, "Number of debater agents");
    cmd->add_option("--turns", turns, "Discussion turns");
    cmd->add_flag("--no-calibration", ov.no_calibration, "Skip the swapped-order run");
    cmd->add_option("--dataset", dataset, "Dataset file");
    cmd->add_option("--out", out, "Output directory");
  };

  auto* run = app.add_subcommand("run", "Evaluate every dataset item");
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "One run per (agents, turns) grid point");
  add_common(sweep);
  std::string sweep_agents;
  std::string sweep_turns;
  sweep->add_option("--sweep-agents", sweep_agents, "Comma-separated agent counts, e.g. 2,3,4,5");
  sweep->add_option("--sweep-turns", sweep_turns, "Comma-separated turn counts");

  auto* replay_cmd = app.add_subcommand("replay", "Recompute verdicts and metrics from a transcript file");
  std::string transcript_path;
  std::string replay_kind = "pairwise";
  replay_cmd->add_option("transcripts", transcript_path, "Transcript file (JSONL)")->required();
  replay_cmd->add_option("--config", config_path, "Take the dataset from this run configuration");
  replay_cmd->add_option("--dataset", dataset, "Dataset file");
  replay_cmd->add_option("--kind", replay_kind, "Dataset kind with --dataset: pairwise | scoring");

  auto* report = app.add_subcommand("report", "Recompute the report of a finished run");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    auto load = [&] {
      auto config = load_run_config(config_path);
      if (!strategy.empty()) ov.strategy = parse_strategy(strategy);
      if (agents != 0) ov.agents = agents;
      if (turns != 0) ov.turns = turns;
      if (!dataset.empty()) ov.dataset = dataset;
      if (!out.empty()) ov.out = out;
      apply(config, ov);
      return config;
    };

    if (*run) {
      auto config = load();
      auto summary = cmd_run(config, force, std::cerr);
      if (!summary.report) {
        Json extra{{"debates", summary.debates}, {"skipped", summary.skipped}, {"failures", summary.errors}};
        if (std::filesystem::exists(run_paths(config).errors)) {
          extra["errors_file"] = run_paths(config).errors.string();
        }
        return fail("RunFailed", std::to_string(summary.errors.size()) + " debate(s) failed", extra);
      }
      std::cerr << "debates run: " << summary.debates << ", skipped: " << summary.skipped << "\n";
      std::cout << summary.report->to_text();
    } else if (*sweep) {
      auto config = load();
      SweepAxis axis{parse_list(sweep_agents), parse_list(sweep_turns)};
      auto rows = cmd_sweep(config, axis, force, std::cerr);
      std::cout << sweep_table(rows);
    } else if (*replay_cmd) {
      Dataset data;
      if (!config_path.empty()) {
        auto config = load_run_config(config_path);
        if (!dataset.empty()) ov.dataset = dataset;
        apply(config, ov);
        data = load_run_dataset(config);
      } else if (!dataset.empty()) {
        data = load_dataset(dataset, parse_dataset_kind(replay_kind));
      } else {
        return fail("InvalidConfig", "replay needs --config or --dataset");
      }
      std::cout << cmd_replay(transcript_path, data).to_text();
    } else if (*report) {
      auto config = load();
      std::cout << cmd_report(config).to_text();
    }
  } catch (const Error& e) {
    return fail(std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("Internal", e.what());
  }
  return 0;
}
