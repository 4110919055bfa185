#pragma once

#include <span>
#include <string>
#include <vector>

#include "referee/debate.hpp"
#include "referee/types.hpp"

namespace referee {

/// Reads an agent's judgment out of free text.
///
/// The last line carrying "Scores: <s1> <s2>" (pairwise) or "Score: <v>"
/// (dimension) wins. Without such a line, the last in-bounds numbers of the
/// final paragraph are used. Throws UnparseableVerdict when nothing usable is
/// found and OutOfRangeScore when the structured line holds an out-of-scale
/// number.
Verdict parse_verdict(const std::string& agent_id, const std::string& text, const EvalMode& mode);

Preference derive_preference(const PairScores& scores);

/// Most frequent label; a shared top count is a Tie. Throws EmptySeries.
Preference majority_vote(std::span<const Preference> preferences);

/// Arithmetic mean. Throws EmptySeries.
double average_score(std::span<const DimScore> scores);

/// Maps scores parsed under `order` back to original assistant identities.
PairScores to_original(const PairScores& scores, PositionOrder order);

/// Parses the final-turn utterance of every agent, in roster order. Agents
/// whose utterance yields no usable verdict are left out; throws
/// UnparseableVerdict when none is usable.
std::vector<Verdict> collect_verdicts(const DebateConfig& config,
                                      std::span<const ChatMessage> messages);

/// Final result of one debate run: majority vote over per-agent preferences
/// (pairwise, after re-mapping to original identities) or the mean score.
AggregateResult aggregate(std::span<const Verdict> verdicts, const EvalMode& mode,
                          PositionOrder order);

/// Per-assistant mean of the agents' scores over an Original and a Swapped
/// run, in original identities.
PairScores averaged_scores(const Transcript& original, const Transcript& swapped);

/// Balanced position calibration over two completed runs of the same item.
AggregateResult combine_calibrated(const Transcript& original, const Transcript& swapped);

struct CalibratedRun {
  Transcript original;
  std::optional<Transcript> swapped;  // empty when calibration is off
  AggregateResult result;
};

/// Runs the debate in original order and, when the config asks for it, again
/// with the two responses exchanged, combining both by averaged scores.
CalibratedRun calibrate_positions(const DebateConfig& config, const DebateItem& item,
                                  const DebateRunner& runner);

}  // namespace referee
