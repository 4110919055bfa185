#include "referee/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "referee/error.hpp"
#include "referee/extraction.hpp"

namespace referee {
namespace {

template <typename Series>
void check_lengths(const Series& series, std::size_t minimum) {
  if (series.system.size() != series.human.size()) {
    throw Error(ErrorCode::LengthMismatch, "series lengths differ: " +
                                               std::to_string(series.system.size()) + " vs " +
                                               std::to_string(series.human.size()));
  }
  if (series.system.size() < minimum) {
    throw Error(ErrorCode::EmptySeries,
                "need at least " + std::to_string(minimum) + " paired values");
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw Error(ErrorCode::ZeroVariance, "constant rank vector");
  return sxy / std::sqrt(sxx * syy);
}

// Pairs tied within runs of equal values of an already-sorted sequence.
template <typename It, typename Eq>
std::uint64_t tied_pairs(It first, It last, Eq eq) {
  std::uint64_t total = 0;
  while (first != last) {
    auto run_end = std::find_if_not(first, last, [&](const auto& v) { return eq(*first, v); });
    const auto run = static_cast<std::uint64_t>(std::distance(first, run_end));
    total += run * (run - 1) / 2;
    first = run_end;
  }
  return total;
}

// Merge sort counting inversions (Knight's algorithm step).
std::uint64_t sort_counting_swaps(std::vector<double>& v, std::vector<double>& scratch,
                                  std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = sort_counting_swaps(v, scratch, lo, mid) + sort_counting_swaps(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi), v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fixed4(*v) : "n/a"; }

Json json_cell(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

double accuracy(const LabelSeries& series) {
  check_lengths(series, 1);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < series.system.size(); ++i) {
    if (series.system[i] == series.human[i]) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(series.system.size());
}

double cohen_kappa(const LabelSeries& series) {
  check_lengths(series, 1);
  const double n = static_cast<double>(series.system.size());
  std::map<std::string, double> sys_count, hum_count;
  double agree = 0;
  for (std::size_t i = 0; i < series.system.size(); ++i) {
    sys_count[series.system[i]] += 1;
    hum_count[series.human[i]] += 1;
    if (series.system[i] == series.human[i]) agree += 1;
  }
  const double p_o = agree / n;
  double p_e = 0;
  for (const auto& [label, count] : sys_count) {
    auto it = hum_count.find(label);
    if (it != hum_count.end()) p_e += (count / n) * (it->second / n);
  }
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

static bool constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

double spearman(const ScoreSeries& series) {
  check_lengths(series, 2);
  if (constant(series.system) || constant(series.human)) {
    throw Error(ErrorCode::ZeroVariance, "constant score vector");
  }
  const auto rx = average_ranks(series.system);
  const auto ry = average_ranks(series.human);
  return pearson(rx, ry);
}

double kendall_tau(const ScoreSeries& series) {
  check_lengths(series, 2);
  const std::size_t n = series.system.size();
  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {series.system[i], series.human[i]};
  std::sort(pairs.begin(), pairs.end());

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_x =
      tied_pairs(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first == b.first; });
  const std::uint64_t ties_xy = tied_pairs(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a == b; });

  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = pairs[i].second;
  // Within an x-tie run y is already ascending, so swaps count only discordant pairs.
  const std::uint64_t swaps = sort_counting_swaps(ys, scratch, 0, n);
  const std::uint64_t ties_y = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  if (ties_x == n0 || ties_y == n0) throw Error(ErrorCode::ZeroVariance, "constant score vector");
  const double numerator = static_cast<double>(n0) - static_cast<double>(ties_x) -
                           static_cast<double>(ties_y) + static_cast<double>(ties_xy) -
                           2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt(static_cast<double>(n0 - ties_x)) * std::sqrt(static_cast<double>(n0 - ties_y));
  return numerator / denom;
}

ScoringReport summarize_dimensions(std::vector<DimensionRow> rows) {
  ScoringReport report;
  double rho_sum = 0, tau_sum = 0;
  int rho_n = 0, tau_n = 0;
  for (const auto& row : rows) {
    if (row.spearman) rho_sum += *row.spearman, ++rho_n;
    if (row.kendall) tau_sum += *row.kendall, ++tau_n;
  }
  if (rho_n > 0) report.average_spearman = rho_sum / rho_n;
  if (tau_n > 0) report.average_kendall = tau_sum / tau_n;
  report.rows = std::move(rows);
  return report;
}

std::string Report::to_text() const {
  std::ostringstream out;
  if (const auto* p = std::get_if<PairwiseReport>(&body)) {
    out << pad("items", 8) << pad("Acc.", 8) << "Kap.\n";
    out << pad(std::to_string(p->items), 8) << pad(fixed4(p->accuracy), 8) << fixed4(p->kappa) << "\n";
    return out.str();
  }
  const auto& s = std::get<ScoringReport>(body);
  constexpr std::size_t w = 14;
  out << pad("dimension", w) << pad("items", 7) << pad("rho", 9) << "tau\n";
  for (const auto& row : s.rows) {
    out << pad(row.dimension, w) << pad(std::to_string(row.items), 7) << pad(cell(row.spearman), 9)
        << cell(row.kendall) << "\n";
  }
  out << pad("Average", w) << pad("", 7) << pad(cell(s.average_spearman), 9) << cell(s.average_kendall)
      << "\n";
  return out.str();
}

Json Report::to_json() const {
  if (const auto* p = std::get_if<PairwiseReport>(&body)) {
    return Json{{"kind", "pairwise"}, {"items", p->items}, {"accuracy", p->accuracy}, {"kappa", p->kappa}};
  }
  const auto& s = std::get<ScoringReport>(body);
  Json rows = Json::array();
  for (const auto& row : s.rows) {
    rows.push_back({{"dimension", row.dimension},
                    {"items", row.items},
                    {"spearman", json_cell(row.spearman)},
                    {"kendall", json_cell(row.kendall)}});
  }
  return Json{{"kind", "scoring"},
              {"dimensions", rows},
              {"average", {{"spearman", json_cell(s.average_spearman)},
                           {"kendall", json_cell(s.average_kendall)}}}};
}

Preference final_label(const Transcript& original, const Transcript* swapped) {
  if (swapped && original.config.position_calibration) {
    return combine_calibrated(original, *swapped).preference();
  }
  return original.final_result.preference();
}

Report evaluate_run(std::span<const Transcript> transcripts, const Dataset& dataset) {
  // (item_id, dimension, order) -> transcript; later records replace earlier ones.
  using Key = std::tuple<std::string, std::string, PositionOrder>;
  std::map<Key, const Transcript*> index;
  for (const auto& t : transcripts) {
    index[{t.item_id, t.config.mode.dimension, t.position_order}] = &t;
  }
  auto find = [&](const std::string& id, const std::string& dim, PositionOrder order) -> const Transcript* {
    auto it = index.find({id, dim, order});
    return it == index.end() ? nullptr : it->second;
  };
  auto missing_error = [](const std::vector<std::string>& ids) {
    std::string list;
    for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
    return Error(ErrorCode::MissingResults, std::to_string(ids.size()) + " item(s) without results: " + list);
  };

  if (dataset.kind == DatasetKind::Pairwise) {
    LabelSeries series;
    std::vector<std::string> missing;
    for (const auto& item : dataset.pairwise) {
      const auto* original = find(item.item_id, "", PositionOrder::Original);
      if (!original || !original->final_result.is_label()) {
        missing.push_back(item.item_id);
        continue;
      }
      const auto* swapped = find(item.item_id, "", PositionOrder::Swapped);
      series.system.emplace_back(to_string(final_label(*original, swapped)));
      series.human.emplace_back(to_string(item.human_label));
    }
    if (!missing.empty()) throw missing_error(missing);
    if (series.system.empty()) throw Error(ErrorCode::EmptySeries, "dataset has no items");
    return Report{PairwiseReport{series.system.size(), accuracy(series), cohen_kappa(series)}};
  }

  std::vector<DimensionRow> rows;
  std::vector<std::string> missing;
  for (const auto& dim : scoring_dimensions()) {
    const bool evaluated = std::any_of(transcripts.begin(), transcripts.end(), [&](const Transcript& t) {
      return t.config.mode.dimension == dim;
    });
    if (!evaluated) continue;
    ScoreSeries series;
    for (const auto& item : dataset.scoring) {
      auto human = item.human_scores.find(dim);
      if (human == item.human_scores.end()) continue;
      const auto* t = find(item.item_id, dim, PositionOrder::Original);
      if (!t || t->final_result.is_label()) {
        missing.push_back(item.item_id + "/" + dim);
        continue;
      }
      series.system.push_back(t->final_result.score());
      series.human.push_back(human->second);
    }
    DimensionRow row{dim, series.system.size(), std::nullopt, std::nullopt};
    if (series.system.size() >= 2) {
      try {
        row.spearman = spearman(series);
        row.kendall = kendall_tau(series);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVariance) throw;
      }
    }
    rows.push_back(std::move(row));
  }
  if (!missing.empty()) throw missing_error(missing);
  return Report{summarize_dimensions(std::move(rows))};
}

}  // namespace referee
