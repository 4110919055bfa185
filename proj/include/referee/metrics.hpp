#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "referee/datasets.hpp"
#include "referee/types.hpp"

namespace referee {

/// System and human labels, aligned by position.
struct LabelSeries {
  std::vector<std::string> system;
  std::vector<std::string> human;
};

/// System and human scores, aligned by position.
struct ScoreSeries {
  std::vector<double> system;
  std::vector<double> human;
};

/// Fraction of positions where the labels agree. Throws EmptySeries, LengthMismatch.
double accuracy(const LabelSeries& series);

/// Cohen's kappa with chance agreement from the two raters' marginals. When
/// chance agreement is 1 (both raters constant on the same label) returns 1.
double cohen_kappa(const LabelSeries& series);

/// Pearson correlation of average ranks. Throws ZeroVariance when either
/// vector is constant, EmptySeries below two points.
double spearman(const ScoreSeries& series);

/// Kendall tau-b. Throws as spearman.
double kendall_tau(const ScoreSeries& series);

/// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

struct PairwiseReport {
  std::size_t items = 0;
  double accuracy = 0;
  double kappa = 0;

  bool operator==(const PairwiseReport&) const = default;
};

struct DimensionRow {
  std::string dimension;
  std::size_t items = 0;
  std::optional<double> spearman;  // empty when undefined (constant scores)
  std::optional<double> kendall;

  bool operator==(const DimensionRow&) const = default;
};

struct ScoringReport {
  std::vector<DimensionRow> rows;
  std::optional<double> average_spearman;
  std::optional<double> average_kendall;

  bool operator==(const ScoringReport&) const = default;
};

/// Fills the unweighted "Average" column over the rows that have values.
ScoringReport summarize_dimensions(std::vector<DimensionRow> rows);

struct Report {
  std::variant<PairwiseReport, ScoringReport> body;

  /// Aligned plain-text table.
  std::string to_text() const;
  Json to_json() const;
  bool operator==(const Report&) const = default;
};

/// The label a pairwise item ends up with: the calibrated combination when
/// both position orders are present and the run asked for calibration,
/// otherwise the original-order result.
Preference final_label(const Transcript& original, const Transcript* swapped);

/// Scores a set of debate transcripts against the dataset's human judgments.
/// Throws MissingResults listing the items that have no result.
Report evaluate_run(std::span<const Transcript> transcripts, const Dataset& dataset);

}  // namespace referee
