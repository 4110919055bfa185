#include "referee/extraction.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <regex>
#include <sstream>

#include "referee/error.hpp"

namespace referee {
namespace {

// Decimal literals in `s`. A number right after '/' is a denominator ("8/10")
// and is skipped, as are digits glued to letters ("GPT4").
std::vector<double> numbers_in(std::string_view s) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i + 1 < s.size() && s[i] == '.' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      ++i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    }
    const char before = start > 0 ? s[start - 1] : ' ';
    const char after = i < s.size() ? s[i] : ' ';
    if (before == '/' || before == '.' || std::isalpha(static_cast<unsigned char>(before)) ||
        std::isalpha(static_cast<unsigned char>(after))) {
      continue;
    }
    out.push_back(std::stod(std::string(s.substr(start, i - start))));
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Lines after the last blank (or whitespace-only) line.
std::string final_paragraph(const std::string& text) {
  const auto lines = split_lines(trim(text));
  std::size_t start = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) start = i + 1;
  }
  std::string out;
  for (std::size_t i = start; i < lines.size(); ++i) out += lines[i] + "\n";
  return out;
}

}  // namespace

Verdict parse_verdict(const std::string& agent_id, const std::string& text, const EvalMode& mode) {
  const bool pairwise = mode.is_pairwise();
  const std::size_t wanted = pairwise ? 2 : 1;
  const auto& scale = mode.scale;
  static const std::regex pair_re(R"(\bscores[*_\s]*:)", std::regex::icase);
  static const std::regex dim_re(R"(\bscore[*_\s]*:)", std::regex::icase);
  const auto& keyword = pairwise ? pair_re : dim_re;

  auto make = [&](const std::vector<double>& v) {
    Verdict verdict{agent_id, text, {}};
    if (pairwise) {
      verdict.payload = PairScores{v[0], v[1]};
    } else {
      verdict.payload = DimScore{v[0]};
    }
    return verdict;
  };

  const auto lines = split_lines(text);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::smatch match;
    if (!std::regex_search(*it, match, keyword)) continue;
    auto values = numbers_in(std::string_view(*it).substr(match.position(0) + match.length(0)));
    if (values.size() < wanted) continue;
    values.resize(wanted);
    for (double v : values) {
      if (!scale.contains(v)) {
        throw Error(ErrorCode::OutOfRangeScore,
                    "agent " + agent_id + ": score " + format_number(v) + " outside [" +
                        format_number(scale.min) + ", " + format_number(scale.max) + "]");
      }
    }
    return make(values);
  }

  std::vector<double> candidates;
  for (double v : numbers_in(final_paragraph(text))) {
    if (scale.contains(v)) candidates.push_back(v);
  }
  if (candidates.size() < wanted) {
    throw Error(ErrorCode::UnparseableVerdict, "agent " + agent_id + ": no scores found");
  }
  return make(std::vector<double>(candidates.end() - static_cast<std::ptrdiff_t>(wanted),
                                  candidates.end()));
}

Preference derive_preference(const PairScores& scores) {
  if (scores.score_1 > scores.score_2) return Preference::Assistant1Wins;
  if (scores.score_1 < scores.score_2) return Preference::Assistant2Wins;
  return Preference::Tie;
}

Preference majority_vote(std::span<const Preference> preferences) {
  if (preferences.empty()) throw Error(ErrorCode::EmptySeries, "majority vote over no preferences");
  std::array<int, 3> counts{};
  for (auto p : preferences) ++counts[static_cast<std::size_t>(p)];
  const int top = *std::max_element(counts.begin(), counts.end());
  if (std::count(counts.begin(), counts.end(), top) > 1) return Preference::Tie;
  return static_cast<Preference>(std::find(counts.begin(), counts.end(), top) - counts.begin());
}

double average_score(std::span<const DimScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptySeries, "average over no scores");
  double sum = 0;
  for (const auto& s : scores) sum += s.value;
  return sum / static_cast<double>(scores.size());
}

PairScores to_original(const PairScores& scores, PositionOrder order) {
  if (order == PositionOrder::Original) return scores;
  return {scores.score_2, scores.score_1};
}

std::vector<Verdict> collect_verdicts(const DebateConfig& config,
                                      std::span<const ChatMessage> messages) {
  std::vector<Verdict> verdicts;
  std::string failures;
  for (const auto& agent : config.agents) {
    auto it = std::find_if(messages.rbegin(), messages.rend(), [&](const ChatMessage& m) {
      return m.speaker == agent.display_name && m.turn == config.turns;
    });
    if (it == messages.rend()) {
      throw Error(ErrorCode::UnparseableVerdict, "agent " + agent.agent_id + " never spoke in the final turn");
    }
    try {
      verdicts.push_back(parse_verdict(agent.agent_id, it->content, config.mode));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnparseableVerdict && e.code() != ErrorCode::OutOfRangeScore) throw;
      failures += std::string(failures.empty() ? "" : "; ") + e.what();
    }
  }
  if (verdicts.empty()) throw Error(ErrorCode::UnparseableVerdict, "no agent gave a usable verdict: " + failures);
  return verdicts;
}

AggregateResult aggregate(std::span<const Verdict> verdicts, const EvalMode& mode, PositionOrder order) {
  if (mode.is_pairwise()) {
    std::vector<Preference> prefs;
    for (const auto& v : verdicts) {
      prefs.push_back(derive_preference(to_original(std::get<PairScores>(v.payload), order)));
    }
    return AggregateResult::label(majority_vote(prefs));
  }
  std::vector<DimScore> scores;
  for (const auto& v : verdicts) scores.push_back(std::get<DimScore>(v.payload));
  return AggregateResult::mean(average_score(scores));
}

PairScores averaged_scores(const Transcript& original, const Transcript& swapped) {
  PairScores sum;
  std::size_t count = 0;
  for (const auto* run : {&original, &swapped}) {
    for (const auto& v : run->verdicts) {
      const auto s = to_original(std::get<PairScores>(v.payload), run->position_order);
      sum.score_1 += s.score_1;
      sum.score_2 += s.score_2;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::EmptySeries, "calibration over runs without verdicts");
  return {sum.score_1 / static_cast<double>(count), sum.score_2 / static_cast<double>(count)};
}

AggregateResult combine_calibrated(const Transcript& original, const Transcript& swapped) {
  if (original.position_order != PositionOrder::Original ||
      swapped.position_order != PositionOrder::Swapped) {
    throw Error(ErrorCode::InvalidConfig, "calibration needs one original and one swapped run");
  }
  return AggregateResult::label(derive_preference(averaged_scores(original, swapped)));
}

CalibratedRun calibrate_positions(const DebateConfig& config, const DebateItem& item,
                                  const DebateRunner& runner) {
  CalibratedRun run;
  try {
    run.original = runner.run_debate(config, item, PositionOrder::Original);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("original order: ") + e.what());
  }
  if (!config.position_calibration || !config.mode.is_pairwise()) {
    run.result = run.original.final_result;
    return run;
  }
  try {
    run.swapped = runner.run_debate(config, item, PositionOrder::Swapped);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("swapped order: ") + e.what());
  }
  run.result = combine_calibrated(run.original, *run.swapped);
  return run;
}

}  // namespace referee
