// Acceptance checks: one PASS/FAIL/SKIPPED line per criterion.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "referee/cli.hpp"
#include "referee/error.hpp"
#include "referee/extraction.hpp"
#include "support.hpp"

using namespace referee;

namespace {

struct Outcome {
  enum Status { Pass, Fail, Skipped } status = Pass;
  std::string detail;
};

// Collects failures inside one criterion.
struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  int failed = 0;
  Outcome outcome(const std::string& summary) const {
    if (failed == 0) return {Outcome::Pass, summary};
    std::string d = std::to_string(failed) + " failure(s): ";
    for (const auto& f : failures) d += f + "; ";
    return {Outcome::Fail, d};
  }
};

// ---- criterion 1 -----------------------------------------------------------

const char* const kNames[] = {"Alice", "Bob", "Carol"};
const char* const kRoles[] = {"general_public", "critic", "news_author"};

struct Event {
  std::string speaker;  // display name, or "Summarizer"
  int turn;
  std::vector<std::string> history;  // embedded history lines
  bool operator==(const Event&) const = default;
};

std::string utterance(const std::string& name, int turn) { return name + "#" + std::to_string(turn) + " Scores: 8 6"; }

// Independent walk through the three communication algorithms. Lines are the
// rendered "<speaker>: <content>" strings an agent's history would hold.
std::vector<Event> oracle_trace(Strategy s, int n, int turns) {
  std::vector<std::vector<std::string>> h(static_cast<std::size_t>(n));
  std::vector<Event> events;
  for (int t = 1; t <= turns; ++t) {
    std::vector<std::string> buffer;
    for (int i = 0; i < n; ++i) {
      events.push_back({kNames[i], t, h[static_cast<std::size_t>(i)]});
      const auto said = std::string(kNames[i]) + ": " + utterance(kNames[i], t);
      if (s == Strategy::OneByOne) {
        for (auto& hist : h) hist.push_back(said);
      } else {
        buffer.push_back(said);
      }
    }
    if (s == Strategy::SimultaneousTalk) {
      for (auto& hist : h) hist.insert(hist.end(), buffer.begin(), buffer.end());
    } else if (s == Strategy::SimultaneousTalkWithSummarizer) {
      events.push_back({"Summarizer", t, buffer});
      for (auto& hist : h) hist.push_back("Summarizer: summary " + std::to_string(t));
    }
  }
  return events;
}

// A few traces written out by hand, to keep the walk above honest.
std::vector<Event> hand_table(Strategy s) {
  const std::string a1 = "Alice: " + utterance("Alice", 1), b1 = "Bob: " + utterance("Bob", 1),
                    c1 = "Carol: " + utterance("Carol", 1);
  switch (s) {
    case Strategy::OneByOne:
      return {{"Alice", 1, {}},           {"Bob", 1, {a1}},          {"Carol", 1, {a1, b1}},
              {"Alice", 2, {a1, b1, c1}}, {"Bob", 2, {a1, b1, c1, "Alice: " + utterance("Alice", 2)}},
              {"Carol", 2, {a1, b1, c1, "Alice: " + utterance("Alice", 2), "Bob: " + utterance("Bob", 2)}}};
    case Strategy::SimultaneousTalk:
      return {{"Alice", 1, {}},           {"Bob", 1, {}},           {"Carol", 1, {}},
              {"Alice", 2, {a1, b1, c1}}, {"Bob", 2, {a1, b1, c1}}, {"Carol", 2, {a1, b1, c1}}};
    case Strategy::SimultaneousTalkWithSummarizer:
      return {{"Alice", 1, {}},
              {"Bob", 1, {}},
              {"Carol", 1, {}},
              {"Summarizer", 1, {a1, b1, c1}},
              {"Alice", 2, {"Summarizer: summary 1"}},
              {"Bob", 2, {"Summarizer: summary 1"}},
              {"Carol", 2, {"Summarizer: summary 1"}},
              {"Summarizer", 2,
               {"Alice: " + utterance("Alice", 2), "Bob: " + utterance("Bob", 2), "Carol: " + utterance("Carol", 2)}}};
  }
  return {};
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<Event> observed_trace(Strategy s, int n, int turns) {
  std::vector<MockBackend::Rule> rules;
  for (int i = 0; i < n; ++i) {
    for (int t = 1; t <= turns; ++t) {
      rules.push_back({MockBackend::Matcher::regex(std::string("^") + kNames[i] + "\\|"), utterance(kNames[i], t), true});
    }
  }
  std::vector<std::string> sums;
  for (int t = 1; t <= turns; ++t) sums.push_back("summary " + std::to_string(t));
  BackendRegistry reg;
  reg.add("mock", std::make_shared<MockBackend>(rules));
  reg.add("sum", MockBackend::queue(sums));
  PromptSet prompts;
  prompts.pairwise = PromptTemplate("{agent_name}|{chat_history}");
  prompts.summarizer = PromptTemplate("Summarizer|{chat_history}");

  DebateConfig c;
  c.strategy = s;
  c.turns = turns;
  c.position_calibration = false;
  for (int i = 0; i < n; ++i) c.agents.push_back({"agent_" + std::to_string(i + 1), kNames[i], kRoles[i], "mock"});
  if (s == Strategy::SimultaneousTalkWithSummarizer) c.summarizer_backend_id = "sum";

  const auto t = DebateRunner(reg, prompts).run_debate(c, {"item", "q", "one", "two", ""});
  std::vector<Event> events;
  for (std::size_t k = 0; k < t.prompts.size(); ++k) {
    const auto& p = t.prompts[k];
    const auto bar = p.user_prompt.find('|');
    const auto speaker = p.user_prompt.substr(0, bar);
    events.push_back({speaker, p.turn, split_lines(p.user_prompt.substr(bar + 1))});
    // Each prompt is answered by the message generated at the same step.
    if (t.messages[k].speaker != speaker || t.messages[k].turn != p.turn) events.push_back({"<misaligned>", 0, {}});
  }
  return events;
}

Outcome criterion_1() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  int configs = 0;
  for (auto s : {Strategy::OneByOne, Strategy::SimultaneousTalk, Strategy::SimultaneousTalkWithSummarizer}) {
    check.expect(oracle_trace(s, 3, 2) == hand_table(s), "oracle disagrees with hand table for " + std::string(to_string(s)));
    for (int n = 1; n <= 3; ++n) {
      for (int turns = 1; turns <= 3; ++turns) {
        ++configs;
        const auto label = std::string(to_string(s)) + " N=" + std::to_string(n) + " T=" + std::to_string(turns);
        try {
          check.expect(observed_trace(s, n, turns) == oracle_trace(s, n, turns), label);
        } catch (const std::exception& e) {
          check.expect(false, label + ": " + e.what());
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check.expect(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d strategy/N/T combinations match, %.2f s", configs, secs);
  return check.outcome(buf);
}

// ---- criterion 2 -----------------------------------------------------------

Outcome criterion_2() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<int> len(2, 50);
  const char* names[] = {"Assistant1Wins", "Assistant2Wins", "Tie"};
  double worst = 0;
  int correlation_cases = 0;
  auto compare = [&](double got, double want, const std::string& what) {
    const double diff = std::abs(got - want);
    worst = std::max(worst, diff);
    check.expect(diff <= 1e-9, what);
  };
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    std::uniform_int_distribution<int> label(0, 1 + trial % 2);
    LabelSeries l;
    for (int i = 0; i < n; ++i) {
      l.system.push_back(names[label(rng)]);
      l.human.push_back(names[label(rng)]);
    }
    compare(accuracy(l), oracle::accuracy(l.system, l.human), "accuracy trial " + std::to_string(trial));
    compare(cohen_kappa(l), oracle::kappa(l.system, l.human), "kappa trial " + std::to_string(trial));
  }
  // Correlations: redraw until neither vector is constant, so every one of
  // the 500 instances is a defined case. Few distinct values force ties.
  while (correlation_cases < 500) {
    const int n = len(rng);
    std::uniform_int_distribution<int> value(1, 2 + correlation_cases % 8);
    ScoreSeries s;
    for (int i = 0; i < n; ++i) {
      s.system.push_back(value(rng));
      s.human.push_back(value(rng) / 3.0);
    }
    if (oracle::constant(s.system) || oracle::constant(s.human)) continue;
    ++correlation_cases;
    compare(spearman(s), oracle::spearman(s.system, s.human), "spearman case " + std::to_string(correlation_cases));
    compare(kendall_tau(s), oracle::kendall_b(s.system, s.human), "kendall case " + std::to_string(correlation_cases));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check.expect(secs < 30.0, "runtime " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "4 metrics x 500 instances, max |diff| %.2e, %.2f s", worst, secs);
  return check.outcome(buf);
}

// ---- criterion 3 -----------------------------------------------------------

Outcome criterion_3() {
  Checker check;
  const Report report{summarize_dimensions({{"naturalness", 360, 0.630, std::nullopt},
                                            {"coherence", 360, 0.619, std::nullopt},
                                            {"engagingness", 360, 0.765, std::nullopt},
                                            {"groundedness", 360, 0.722, std::nullopt}})};
  const auto& s = std::get<ScoringReport>(report.body);
  const double avg = s.average_spearman.value_or(-1);
  check.expect(std::abs(avg - 0.684) <= 0.0005, "average " + std::to_string(avg));
  check.expect(report.to_text().find("Average              0.6840") != std::string::npos, "Average row in table");
  char buf[64];
  std::snprintf(buf, sizeof buf, "Average rho %.4f (target 0.684 +/- 0.0005)", avg);
  return check.outcome(buf);
}

// ---- criterion 4 -----------------------------------------------------------

Outcome criterion_4() {
  Checker check;
  using P = Preference;
  const P all[] = {P::Assistant1Wins, P::Assistant2Wins, P::Tie};
  int lists = 0;
  for (int n = 1; n <= 6; ++n) {
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<P> v;
      for (int i = 0, c = code; i < n; ++i, c /= 3) v.push_back(all[c % 3]);
      const auto expected = majority_vote(v);
      std::sort(v.begin(), v.end());
      do {
        check.expect(majority_vote(v) == expected, "permutation changed the vote");
      } while (std::next_permutation(v.begin(), v.end()));
      ++lists;
    }
  }
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> score(1, 10);
  for (int i = 0; i < 10000; ++i) {
    const double a = i < 100 ? 1 + i % 10 : score(rng);
    const double b = i < 100 ? 1 + i / 10 : score(rng);
    const auto fwd = derive_preference({a, b});
    const auto back = derive_preference({b, a});
    const auto mirrored = fwd == P::Tie ? P::Tie : (fwd == P::Assistant1Wins ? P::Assistant2Wins : P::Assistant1Wins);
    check.expect(back == mirrored, "antisymmetry");
  }
  Transcript original, swapped;
  original.position_order = PositionOrder::Original;
  original.verdicts = {{"a", "", PairScores{8, 6}}};
  swapped.position_order = PositionOrder::Swapped;
  swapped.verdicts = {{"a", "", PairScores{8, 6}}};  // presented order; {6, 8} once remapped
  check.expect(to_original(PairScores{8, 6}, PositionOrder::Swapped) == PairScores{6, 8}, "swap remap");
  check.expect(averaged_scores(original, swapped) == PairScores{7, 7}, "averaged scores");
  check.expect(combine_calibrated(original, swapped) == AggregateResult::label(P::Tie), "calibration tie");
  return check.outcome(std::to_string(lists) + " vote lists under all permutations, antisymmetry, {8,6}+{6,8} -> Tie");
}

// ---- criterion 5 -----------------------------------------------------------

int cli(const std::string& args) {
  const auto cmd = std::string(REFEREE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_5() {
  Checker check;
  testing::TempDir tmp;
  for (const char* f : {"mock_pairwise.json", "pairwise10.jsonl"}) {
    std::filesystem::copy_file(testing::fixture(f), tmp / f);
  }
  const auto config = (tmp / "mock_pairwise.json").string();
  const auto out = tmp / "out";

  check.expect(cli("run --config " + config) == 0, "first run");
  const auto transcripts_1 = testing::slurp(out / "transcripts.jsonl");
  const auto report_1 = testing::slurp(out / "report.txt");
  const auto report_json_1 = testing::slurp(out / "report.json");
  check.expect(cli("run --config " + config + " --force") == 0, "second run");
  const auto transcripts_2 = testing::slurp(out / "transcripts.jsonl");
  check.expect(!transcripts_1.empty() && transcripts_1 == transcripts_2, "transcripts differ between runs");
  check.expect(report_1 == testing::slurp(out / "report.txt"), "report.txt differs between runs");
  check.expect(report_json_1 == testing::slurp(out / "report.json"), "report.json differs between runs");

  // The shipped golden files were produced by the same pipeline.
  const auto golden = testing::fixture("golden");
  check.expect(transcripts_1 == testing::slurp(golden / "transcripts.jsonl"), "run differs from golden transcripts");
  check.expect(report_1 == testing::slurp(golden / "report.txt"), "run differs from golden report");

  const auto data = load_dataset(tmp / "pairwise10.jsonl", DatasetKind::Pairwise);
  std::size_t records = 0;
  try {
    const auto result = replay(read_transcripts(out / "transcripts.jsonl"), &data);
    records = result.records;
    check.expect(result.mismatches.empty(), std::to_string(result.mismatches.size()) + " replay mismatches");
    check.expect(cmd_replay(golden / "transcripts.jsonl", data).to_text() == testing::slurp(golden / "report.txt"),
                 "golden replay report differs");
  } catch (const std::exception& e) {
    check.expect(false, std::string("replay: ") + e.what());
  }
  check.expect(cli("replay " + (out / "transcripts.jsonl").string() + " --config " + config) == 0, "cli replay");

  // One utterance edited by hand.
  auto lines = split_lines(transcripts_1);
  auto record = Json::parse(lines.at(4));
  record["messages"][0]["content"] = record["messages"][0]["content"].get<std::string>() + " (edited)";
  lines[4] = record.dump();
  std::string tampered;
  for (const auto& l : lines) tampered += l + "\n";
  testing::write_file(tmp / "tampered.jsonl", tampered);
  bool caught = false;
  try {
    cmd_replay(tmp / "tampered.jsonl", data);
  } catch (const Error& e) {
    caught = e.code() == ErrorCode::ReplayMismatch;
  }
  check.expect(caught, "tampered utterance not detected");
  check.expect(cli("replay " + (tmp / "tampered.jsonl").string() + " --config " + config) == 1, "cli tamper exit status");
  return check.outcome(std::to_string(records) + " records byte-identical across runs and to golden; replay clean; tamper caught");
}

// ---- criterion 6 -----------------------------------------------------------

Outcome criterion_6() {
  Checker check;
  const std::string annotator = "You are now an Annotator, one of the referees in the text evaluation task.";
  const std::string general_public =
      "You are now General Public, one of the referees in this task. You are interested in the story and looking for "
      "updates on the investigation. Please think critically by yourself and note that it's your responsibility to "
      "choose one of which is the better first.";
  const std::string critic =
      "You are now Critic, one of the referees in this task. You will check fluent writing, clear sentences, and good "
      "wording in summary writing. Your job is to question others judgment to make sure their judgment is "
      "well-considered and offer an alternative solution if two responses are at the same level.";

  BackendRegistry reg;
  reg.add("mock", std::make_shared<MockBackend>(std::vector<MockBackend::Rule>{{MockBackend::Matcher::always(), "Scores: 7 5", false}}));
  PromptSet prompts;
  const DebateRunner runner(reg, prompts);
  RunConfig rc;
  rc.agent_backend = "mock";
  const DebateItem item{"q", "question", "one", "two", ""};
  int checked = 0;

  for (int n = 2; n <= 5; ++n) {
    rc.num_agents = n;
    rc.diverse_roles = false;
    const auto t = runner.run_debate(make_debate_config(rc, EvalMode::pairwise()), item);
    for (const auto& p : t.prompts) {
      check.expect(p.system_prompt.find(annotator) != std::string::npos, "uniform system prompt");
      check.expect(p.user_prompt.find(annotator) != std::string::npos, "uniform role slot");
      ++checked;
    }
  }
  rc.num_agents = 2;
  rc.diverse_roles = true;
  const auto t = runner.run_debate(make_debate_config(rc, EvalMode::pairwise()), item);
  check.expect(t.prompts.size() == 4, "prompt count");
  for (std::size_t i = 0; i < t.prompts.size(); ++i) {
    const auto& want = i % 2 == 0 ? general_public : critic;
    check.expect(t.prompts[i].system_prompt.find(want) != std::string::npos, "diverse system prompt " + std::to_string(i));
    check.expect(t.prompts[i].user_prompt.find(want) != std::string::npos, "diverse role slot " + std::to_string(i));
    check.expect(t.prompts[i].system_prompt.find(annotator) == std::string::npos, "no annotator text");
    ++checked;
  }
  return check.outcome(std::to_string(checked) + " rendered prompts carry the expected role text");
}

// ---- criterion 7 -----------------------------------------------------------

Outcome criterion_7() {
  const char* path = std::getenv("REFEREE_LIVE_CONFIG");
  if (!path || !*path) {
    return {Outcome::Skipped, "live endpoint check; set REFEREE_LIVE_CONFIG to a run config over the 80-item set"};
  }
  try {
    auto config = load_run_config(path);
    std::ostringstream log;
    const auto summary = cmd_run(config, false, log);
    if (!summary.report) return {Outcome::Fail, std::to_string(summary.errors.size()) + " debate(s) failed"};
    const auto* p = std::get_if<PairwiseReport>(&summary.report->body);
    if (!p) return {Outcome::Fail, "live config must use a pairwise dataset"};
    const double acc = 100 * p->accuracy;
    char buf[160];
    std::snprintf(buf, sizeof buf, "Acc. %.1f%% over %zu items (reference 63.8%%, deviation %+.1f points, band +/-8), Kap. %.3f",
                  acc, p->items, acc - 63.8, p->kappa);
    // Reported, not asserted: model versions drift.
    return {Outcome::Pass, buf};
  } catch (const std::exception& e) {
    return {Outcome::Fail, e.what()};
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"strategy trace oracles", criterion_1},   {"metric oracles", criterion_2},
      {"table arithmetic", criterion_3},         {"aggregation properties", criterion_4},
      {"determinism and replay", criterion_5},   {"ablation plumbing", criterion_6},
      {"live endpoint (optional)", criterion_7},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("uncaught: ") + e.what()};
    }
    const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIPPED";
    std::cout << "criterion " << (i + 1) << " [" << tag << "] " << criteria[i].first << ": " << o.detail << std::endl;
    failed += o.status == Outcome::Fail;
  }
  return failed == 0 ? 0 : 1;
}
