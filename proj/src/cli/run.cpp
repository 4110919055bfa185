#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "referee/cli.hpp"
#include "referee/error.hpp"
#include "referee/extraction.hpp"

namespace referee {
namespace {

struct Job {
  DebateItem item;
  DebateConfig config;
  std::vector<PositionOrder> pending;
};

struct JobResult {
  std::vector<Transcript> transcripts;
  std::optional<Error> error;
};

using RecordKey = std::tuple<std::string, std::string, PositionOrder>;

RecordKey key_of(const Transcript& t) {
  return {t.item_id, t.config.mode.dimension, t.position_order};
}

}  // namespace

Dataset load_run_dataset(const RunConfig& config) {
  auto data = load_dataset(config.resolve(config.dataset_path), config.dataset_kind);
  if (!config.sample || *config.sample >= data.size()) return data;

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed);
  // Fisher-Yates with modulo draws: reproducible across standard libraries.
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng() % (i + 1)]);
  }
  order.resize(*config.sample);
  std::sort(order.begin(), order.end());

  Dataset picked;
  picked.kind = data.kind;
  picked.scales = data.scales;
  picked.warnings = data.warnings;
  for (auto i : order) {
    if (data.kind == DatasetKind::Pairwise) {
      picked.pairwise.push_back(data.pairwise[i]);
    } else {
      picked.scoring.push_back(data.scoring[i]);
    }
  }
  return picked;
}

namespace {

std::vector<EvalMode> modes_for(const RunConfig& config, const Dataset& data) {
  if (data.kind == DatasetKind::Pairwise) return {EvalMode::pairwise()};
  std::vector<EvalMode> modes;
  for (const auto& dim : scoring_dimensions()) {
    auto scale = data.scales.find(dim);
    if (scale == data.scales.end()) continue;
    if (!config.dimensions.empty() &&
        std::find(config.dimensions.begin(), config.dimensions.end(), dim) == config.dimensions.end()) {
      continue;
    }
    modes.push_back(EvalMode::dimension_score(dim, scale->second));
  }
  return modes;
}

// Transcripts that belong to the current configuration, deduplicated with
// later records winning.
std::vector<Transcript> current_records(const RunConfig& config, const Dataset& data,
                                        std::vector<Transcript> all) {
  std::map<std::string, DebateConfig> expected;
  for (const auto& mode : modes_for(config, data)) {
    expected.emplace(mode.dimension, make_debate_config(config, mode));
  }
  std::map<RecordKey, std::size_t> latest;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto it = expected.find(all[i].config.mode.dimension);
    if (it != expected.end() && it->second == all[i].config) latest[key_of(all[i])] = i;
  }
  std::vector<std::size_t> keep;
  for (const auto& [key, index] : latest) keep.push_back(index);
  std::sort(keep.begin(), keep.end());
  std::vector<Transcript> out;
  for (auto i : keep) out.push_back(std::move(all[i]));
  return out;
}

void write_report(const Report& report, const RunPaths& paths) {
  std::ofstream(paths.report_text, std::ios::binary) << report.to_text();
  std::ofstream(paths.report_json, std::ios::binary) << report.to_json().dump(2) << "\n";
}

JobResult run_job(const Job& job, const DebateRunner& runner) {
  JobResult result;
  try {
    const bool both = job.pending.size() == 2;
    if (both) {
      auto run = calibrate_positions(job.config, job.item, runner);
      result.transcripts.push_back(std::move(run.original));
      result.transcripts.push_back(std::move(*run.swapped));
    } else {
      for (auto order : job.pending) {
        result.transcripts.push_back(runner.run_debate(job.config, job.item, order));
      }
    }
  } catch (const Error& e) {
    result.error = e;
    result.transcripts.clear();
  }
  return result;
}

}  // namespace

RunPaths run_paths(const RunConfig& config) {
  const auto dir = config.resolve(config.output_dir);
  return {dir / "transcripts.jsonl", dir / "report.txt", dir / "report.json", dir / "errors.json"};
}

std::vector<Transcript> read_transcripts(const std::filesystem::path& path) {
  std::vector<Transcript> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      out.push_back(from_record<Transcript>(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

RunSummary cmd_run(const RunConfig& config, bool force, std::ostream& log) {
  validate(config);
  const auto registry = build_registry(config);
  return cmd_run(config, registry, force, log);
}

RunSummary cmd_run(const RunConfig& config, const BackendRegistry& registry, bool force,
                   std::ostream& log) {
  const auto prompts = build_prompts(config);
  const DebateRunner runner(registry, prompts);
  const auto data = load_run_dataset(config);
  for (const auto& w : data.warnings) log << "warning: " << w << "\n";
  const auto modes = modes_for(config, data);
  for (const auto& mode : modes) runner.check(make_debate_config(config, mode));

  const auto paths = run_paths(config);
  std::filesystem::create_directories(paths.transcripts.parent_path());
  if (force) std::filesystem::remove(paths.transcripts);

  std::map<RecordKey, DebateConfig> existing;
  for (auto& t : read_transcripts(paths.transcripts)) {
    auto key = key_of(t);
    existing.insert_or_assign(std::move(key), std::move(t.config));
  }

  RunSummary summary;
  std::vector<Job> jobs;
  auto plan = [&](const DebateItem& item, const EvalMode& mode) {
    Job job{item, make_debate_config(config, mode), {}};
    std::vector<PositionOrder> orders{PositionOrder::Original};
    if (job.config.position_calibration) orders.push_back(PositionOrder::Swapped);
    for (auto order : orders) {
      auto it = existing.find({item.item_id, mode.dimension, order});
      if (it == existing.end() || !(it->second == job.config)) job.pending.push_back(order);
    }
    if (job.pending.empty()) {
      ++summary.skipped;
    } else {
      jobs.push_back(std::move(job));
    }
  };
  if (data.kind == DatasetKind::Pairwise) {
    for (const auto& item : data.pairwise) plan(to_debate_item(item), modes.front());
  } else {
    for (const auto& item : data.scoring) {
      for (const auto& mode : modes) {
        if (item.human_scores.count(mode.dimension)) plan(to_debate_item(item), mode);
      }
    }
  }

  // Workers take jobs in any order; results are committed in job order so
  // the transcript file does not depend on scheduling.
  std::vector<std::optional<JobResult>> results(jobs.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      auto result = run_job(jobs[i], runner);
      std::lock_guard lock(mutex);
      results[i] = std::move(result);
      ready.notify_all();
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), jobs.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

  const auto run_config = to_json(config);
  std::ofstream out(paths.transcripts, std::ios::binary | std::ios::app);
  Json errors = Json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    JobResult result;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return results[i].has_value(); });
      result = std::move(*results[i]);
      results[i].reset();
    }
    const auto& job = jobs[i];
    const auto label = job.item.item_id + (job.config.mode.is_pairwise() ? "" : "/" + job.config.mode.dimension);
    if (result.error) {
      log << "[" << (i + 1) << "/" << jobs.size() << "] " << label << " failed: " << result.error->what() << "\n";
      summary.errors.push_back(label + ": " + result.error->what());
      errors.push_back({{"item_id", job.item.item_id},
                        {"dimension", job.config.mode.dimension},
                        {"code", to_string(result.error->code())},
                        {"message", result.error->what()}});
      continue;
    }
    for (auto& t : result.transcripts) {
      t.run_config = run_config;
      out << to_record(t) << "\n";
      ++summary.debates;
    }
    out.flush();
    log << "[" << (i + 1) << "/" << jobs.size() << "] " << label << " done\n";
  }
  out.close();
  pool.clear();

  if (!errors.empty()) {
    std::ofstream(paths.errors, std::ios::binary) << Json{{"errors", errors}}.dump(2) << "\n";
    return summary;
  }
  std::filesystem::remove(paths.errors);
  const auto records = current_records(config, data, read_transcripts(paths.transcripts));
  try {
    summary.report = evaluate_run(records, data);
  } catch (const Error& e) {
    summary.errors.push_back(e.what());
    return summary;
  }
  write_report(*summary.report, paths);
  return summary;
}

Report cmd_report(const RunConfig& config) {
  const auto data = load_run_dataset(config);
  const auto paths = run_paths(config);
  if (!std::filesystem::exists(paths.transcripts)) {
    throw Error(ErrorCode::Io, "no transcripts at " + paths.transcripts.string());
  }
  const auto records = current_records(config, data, read_transcripts(paths.transcripts));
  auto report = evaluate_run(records, data);
  write_report(report, paths);
  return report;
}

void validate(const SweepAxis& axis) {
  if (axis.agents.empty() && axis.turns.empty()) {
    throw Error(ErrorCode::InvalidSweep, "sweep needs at least one non-empty axis");
  }
  for (int v : axis.agents) {
    if (v < 1) throw Error(ErrorCode::InvalidSweep, "agent counts must be positive");
  }
  for (int v : axis.turns) {
    if (v < 1) throw Error(ErrorCode::InvalidSweep, "turn counts must be positive");
  }
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  auto fixed4 = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.resize(w, ' ');
    else s += ' ';
    return s;
  };
  std::string out;
  const bool pairwise = rows.empty() || std::holds_alternative<PairwiseReport>(rows.front().report.body);
  out += pad("agents", 8) + pad("turns", 7) + (pairwise ? pad("Acc.", 8) + "Kap.\n" : pad("rho", 8) + "tau\n");
  for (const auto& row : rows) {
    out += pad(std::to_string(row.agents), 8) + pad(std::to_string(row.turns), 7);
    if (const auto* p = std::get_if<PairwiseReport>(&row.report.body)) {
      out += pad(fixed4(p->accuracy), 8) + fixed4(p->kappa) + "\n";
    } else {
      const auto& s = std::get<ScoringReport>(row.report.body);
      out += pad(fixed4(s.average_spearman), 8) + fixed4(s.average_kendall) + "\n";
    }
  }
  return out;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const SweepAxis& axis, bool force,
                                std::ostream& log) {
  validate(axis);
  validate(config);
  const std::vector<int> agent_values =
      axis.agents.empty() ? std::vector<int>{config.agents.empty() ? config.num_agents
                                                                   : static_cast<int>(config.agents.size())}
                          : axis.agents;
  const std::vector<int> turn_values = axis.turns.empty() ? std::vector<int>{config.turns} : axis.turns;

  const auto root = config.resolve(config.output_dir);
  // Check every grid point before the first debate starts.
  std::vector<RunConfig> points;
  for (int agents : agent_values) {
    for (int turns : turn_values) {
      RunConfig point = config;
      if (!axis.agents.empty()) {
        point.num_agents = agents;
        point.agents.clear();
      }
      point.turns = turns;
      point.output_dir =
          (root / "sweep" / ("agents-" + std::to_string(agents) + "_turns-" + std::to_string(turns))).string();
      validate(point);
      points.push_back(std::move(point));
    }
  }

  const auto registry = build_registry(config);
  std::vector<SweepRow> rows;
  for (const auto& point : points) {
    const int agents = point.agents.empty() ? point.num_agents : static_cast<int>(point.agents.size());
    log << "sweep point agents=" << agents << " turns=" << point.turns << "\n";
    auto summary = cmd_run(point, registry, force, log);
    if (!summary.report) {
      throw Error(ErrorCode::MissingResults, "sweep point agents=" + std::to_string(agents) +
                                                 " turns=" + std::to_string(point.turns) + " has " +
                                                 std::to_string(summary.errors.size()) + " failure(s)");
    }
    rows.push_back({agents, point.turns, *summary.report});
  }

  std::filesystem::create_directories(root);
  std::ofstream(root / "sweep.txt", std::ios::binary) << sweep_table(rows);
  Json j = Json::array();
  for (const auto& row : rows) {
    j.push_back({{"agents", row.agents}, {"turns", row.turns}, {"report", row.report.to_json()}});
  }
  std::ofstream(root / "sweep.json", std::ios::binary) << j.dump(2) << "\n";
  return rows;
}

namespace {

// Hands back the stored utterances in generation order.
class StoredReplies : public Backend {
 public:
  explicit StoredReplies(const std::vector<ChatMessage>& messages) {
    for (const auto& m : messages) replies_.push_back(m.content);
  }
  std::string chat(const ChatRequest&) override {
    if (next_ >= replies_.size()) throw Error(ErrorCode::ReplayMismatch, "more calls than stored utterances");
    return replies_[next_++];
  }
  bool exhausted() const { return next_ == replies_.size(); }

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

constexpr std::string_view kOpen = "<<history>>";
constexpr std::string_view kClose = "<</history>>";

// Re-drives the debate with templates that render only the discussion
// history, then checks each stored prompt embeds the history the strategy
// implies. Catches edits to any utterance, not only the final ones.
bool consistent(const Transcript& t) {
  PromptSet prompts;
  const std::string body = std::string(kOpen) + "{chat_history}" + std::string(kClose);
  prompts.pairwise = PromptTemplate(body);
  prompts.dimension = PromptTemplate(body);
  prompts.summarizer = PromptTemplate(body);
  for (const auto& agent : t.config.agents) {
    if (!prompts.personas.contains(agent.persona_id)) prompts.personas.add({agent.persona_id, "-"});
  }
  auto replies = std::make_shared<StoredReplies>(t.messages);
  BackendRegistry registry;
  for (const auto& agent : t.config.agents) {
    if (!registry.contains(agent.backend_id)) registry.add(agent.backend_id, replies);
  }
  if (t.config.summarizer_backend_id && !registry.contains(*t.config.summarizer_backend_id)) {
    registry.add(*t.config.summarizer_backend_id, replies);
  }
  auto config = t.config;
  config.max_prompt_chars = 0;
  const DebateRunner runner(registry, prompts);
  const auto again = runner.run_debate(config, DebateItem{t.item_id, "", "", "", ""}, t.position_order);

  if (!replies->exhausted() || again.messages != t.messages || again.prompts.size() != t.prompts.size()) {
    return false;
  }
  for (std::size_t i = 0; i < t.prompts.size(); ++i) {
    const auto& stored = t.prompts[i];
    const auto& fresh = again.prompts[i];
    if (stored.agent_id != fresh.agent_id || stored.turn != fresh.turn) return false;
    // Truncated prompts only hold a suffix of the history.
    if (t.config.max_prompt_chars > 0) continue;
    auto history = fresh.user_prompt.substr(kOpen.size(), fresh.user_prompt.size() - kOpen.size() - kClose.size());
    if (stored.user_prompt.find(history) == std::string::npos) return false;
  }
  return again.verdicts == t.verdicts && again.final_result == t.final_result;
}

}  // namespace

ReplayResult replay(const std::vector<Transcript>& transcripts, const Dataset* dataset) {
  ReplayResult result;
  result.records = transcripts.size();
  for (const auto& t : transcripts) {
    const auto label = t.item_id + (t.config.mode.is_pairwise() ? "" : "/" + t.config.mode.dimension) +
                       " (" + std::string(to_string(t.position_order)) + ")";
    bool ok = false;
    try {
      ok = consistent(t);
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) result.mismatches.push_back(label);
  }
  if (dataset) result.report = evaluate_run(transcripts, *dataset);
  return result;
}

Report cmd_replay(const std::filesystem::path& transcript_path, const Dataset& dataset) {
  if (!std::filesystem::exists(transcript_path)) {
    throw Error(ErrorCode::Io, "no transcript file " + transcript_path.string());
  }
  auto result = replay(read_transcripts(transcript_path), nullptr);
  if (!result.mismatches.empty()) {
    std::string list;
    for (const auto& m : result.mismatches) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::ReplayMismatch, list);
  }
  return evaluate_run(read_transcripts(transcript_path), dataset);
}

}  // namespace referee
