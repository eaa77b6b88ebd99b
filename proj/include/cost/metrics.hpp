#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cost/error.hpp"
#include "cost/types.hpp"

namespace cost {

/// Count Score: percentage of ground-truth object counts matched by the
/// prediction. Each GT noun contributes min/max of the two counts, or 0 when
/// the prediction lacks it. Throws UndefinedScoreError for an empty GT.
inline double count_score(const ObjectCountMap& gt, const ObjectCountMap& pred) {
  if (gt.empty()) throw UndefinedScoreError("count score undefined: ground truth has no objects");
  double sum = 0.0;
  for (const auto& [noun, g] : gt) {
    const int p = pred.count(noun);
    if (p > 0) sum += static_cast<double>(std::min(g, p)) / static_cast<double>(std::max(g, p));
  }
  return 100.0 / static_cast<double>(gt.size()) * sum;
}

/// Hallucination Score: percentage of predicted object mass that is absent
/// from, or exceeds, the ground truth. Throws UndefinedScoreError for an empty
/// prediction.
inline double hallucination_score(const ObjectCountMap& gt, const ObjectCountMap& pred) {
  if (pred.empty())
    throw UndefinedScoreError("hallucination score undefined: prediction has no objects");
  double sum = 0.0;
  for (const auto& [noun, p] : pred) {
    const int g = gt.count(noun);
    if (g > 0)
      sum += 1.0 - static_cast<double>(std::min(p, g)) / static_cast<double>(std::max(p, g));
    else
      sum += 1.0;
  }
  return 100.0 / static_cast<double>(pred.size()) * sum;
}

/// Positions (1-based) of every base noun in a depth order.
struct PositionIndex {
  std::map<std::string, std::vector<int>> positions;
  int order_num = 0;
};

/// Base noun of a depth label: the text before the first '-', trimmed.
inline std::string base_noun(const std::string& label) {
  std::string base = label.substr(0, label.find('-'));
  while (!base.empty() && base.back() == ' ') base.pop_back();
  while (!base.empty() && base.front() == ' ') base.erase(base.begin());
  return base;
}

inline PositionIndex position_index(const DepthOrder& order) {
  PositionIndex idx;
  for (const auto& item : order.items) {
    ++idx.order_num;
    idx.positions[base_noun(item.str())].push_back(idx.order_num);
  }
  return idx;
}

/// Penalty used both to pad unequal instance lists and for missing nouns.
inline constexpr int kDepthPenalty = 100;

/// Depth Score: mean absolute position error between GT and predicted
/// orders, normalized by the GT length. Lower is better.
///
/// Unequal per-noun instance lists are padded with position 100. A GT noun
/// missing from the prediction adds a single 100, whatever its instance
/// count; prediction-only nouns add nothing. Throws UndefinedScoreError for
/// an empty GT.
inline double depth_score(const DepthOrder& gt, const DepthOrder& pred) {
  const auto g = position_index(gt);
  if (g.order_num == 0) throw UndefinedScoreError("depth score undefined: ground truth is empty");
  const auto p = position_index(pred);

  long long total = 0;
  for (const auto& [noun, gt_pos] : g.positions) {
    auto it = p.positions.find(noun);
    if (it == p.positions.end()) {
      total += kDepthPenalty;
      continue;
    }
    const auto& pred_pos = it->second;
    const std::size_t n = std::max(gt_pos.size(), pred_pos.size());
    for (std::size_t i = 0; i < n; ++i) {
      const int a = i < gt_pos.size() ? gt_pos[i] : kDepthPenalty;
      const int b = i < pred_pos.size() ? pred_pos[i] : kDepthPenalty;
      total += std::abs(a - b);
    }
  }
  return static_cast<double>(total) / static_cast<double>(g.order_num);
}

/// Scores for one image; absent when undefined for that image.
struct ImageScores {
  std::string image_id;
  std::optional<double> cs;
  std::optional<double> hs;
  std::optional<double> ds;
};

struct ScoreReport {
  std::vector<ImageScores> per_image;  // sorted by image_id
  std::optional<double> aggregate_cs;
  std::optional<double> aggregate_hs;
  std::optional<double> aggregate_ds;
  std::size_t image_count = 0;  // images with at least one defined score
  std::size_t cs_count = 0;
  std::size_t hs_count = 0;
  std::size_t ds_count = 0;
  std::vector<std::string> cs_excluded;
  std::vector<std::string> hs_excluded;
  std::vector<std::string> ds_excluded;
};

/// Means each metric over the images where it is defined. Images are folded
/// in image_id order, so the result does not depend on input order. Throws
/// EmptyReportError when no image has any defined score.
inline ScoreReport aggregate(std::vector<ImageScores> per_image) {
  std::stable_sort(per_image.begin(), per_image.end(),
                   [](const ImageScores& a, const ImageScores& b) { return a.image_id < b.image_id; });
  ScoreReport r;
  double cs = 0.0, hs = 0.0, ds = 0.0;
  for (const auto& s : per_image) {
    if (s.cs) { cs += *s.cs; ++r.cs_count; }
    else r.cs_excluded.push_back(s.image_id);
    if (s.hs) { hs += *s.hs; ++r.hs_count; }
    else r.hs_excluded.push_back(s.image_id);
    if (s.ds) { ds += *s.ds; ++r.ds_count; }
    else r.ds_excluded.push_back(s.image_id);
    if (s.cs || s.hs || s.ds) ++r.image_count;
  }
  if (r.image_count == 0) throw EmptyReportError("no scorable images");
  if (r.cs_count) r.aggregate_cs = cs / static_cast<double>(r.cs_count);
  if (r.hs_count) r.aggregate_hs = hs / static_cast<double>(r.hs_count);
  if (r.ds_count) r.aggregate_ds = ds / static_cast<double>(r.ds_count);
  r.per_image = std::move(per_image);
  return r;
}

/// One-decimal display rounding used by every rendered table.
inline double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace cost
