#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cost/answer_parser.hpp"
#include "cost/default_data.hpp"
#include "cost/error.hpp"
#include "cost/lexicon.hpp"
#include "cost/segmentation.hpp"
#include "cost/types.hpp"

namespace cost {

/// Object counts a given task's answer should list.
///
/// panoptic: things with instance counts, stuff categories once.
/// instance: things with instance counts only.
/// semantic: every present category once.
inline ObjectCountMap counts_from_segmentation(const SegmentationRecord& rec, TaskKind task) {
  if (task == TaskKind::depth) throw ConfigError("depth task has no object counts");
  std::map<std::string, int> things;
  std::map<std::string, bool> stuff;
  for (const auto& s : rec.segments) {
    if (s.is_thing) ++things[s.category];
    else stuff[s.category] = true;
  }
  ObjectCountMap out;
  switch (task) {
    case TaskKind::instance:
      for (const auto& [noun, n] : things) out.add(noun, n);
      break;
    case TaskKind::panoptic:
      for (const auto& [noun, n] : things) out.add(noun, n);
      for (const auto& [noun, _] : stuff)
        if (!out.contains(noun)) out.add(noun, 1);
      break;
    case TaskKind::semantic:
      for (const auto& [noun, _] : things) out.add(noun, 1);
      for (const auto& [noun, _] : stuff)
        if (!out.contains(noun)) out.add(noun, 1);
      break;
    case TaskKind::depth: break;
  }
  return out;
}

/// "The objects present in the image are: two people, car." Entries run by
/// descending count, ties alphabetical.
inline std::string render_answer(const ObjectCountMap& counts, const Lexicon& lex) {
  if (counts.empty()) return std::string(kNoObjectsSentence);
  std::vector<std::pair<std::string, int>> entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string out(kCountTemplatePrefix);
  bool first = true;
  for (const auto& [noun, n] : entries) {
    out += first ? " " : ", ";
    first = false;
    if (n > 1) {
      out += count_to_words(n);
      out += ' ';
    }
    out += lex.pluralize(noun, n);
  }
  out += '.';
  return out;
}

inline std::string render_depth_answer(const DepthOrder& order) {
  if (order.empty()) return std::string(kNoObjectsSentence);
  std::string out(kDepthTemplatePrefix);
  for (std::size_t i = 0; i < order.items.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += order.items[i].str();
  }
  out += '.';
  return out;
}

/// Nearest-first instance order: each segment is keyed by the maximum depth
/// over its region, sorted ascending with ties broken by segment id. Repeated
/// categories get "-2", "-3", ... after the first occurrence.
inline DepthOrder depth_order_from_maps(const SegmentationRecord& rec, const DepthMap& depth) {
  if (depth.width != rec.width || depth.height != rec.height)
    throw FormatError(rec.image_id + ": depth map is " + std::to_string(depth.width) + "x" +
                      std::to_string(depth.height) + ", mask is " + std::to_string(rec.width) +
                      "x" + std::to_string(rec.height));
  struct Keyed {
    double key;
    std::uint32_t id;
    const std::string* category;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(rec.segments.size());
  for (const auto& s : rec.segments) {
    double m = -std::numeric_limits<double>::infinity();
    for (auto p : s.pixels) m = std::max(m, depth.values[p]);
    keyed.push_back({m, s.id, &s.category});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.id < b.id;
  });
  DepthOrder order;
  std::map<std::string, int> seen;
  for (const auto& k : keyed) order.items.push_back({*k.category, ++seen[*k.category]});
  return order;
}

/// Per-task pools of paraphrased questions.
struct QuestionBucket {
  std::map<TaskKind, std::vector<std::string>> questions;

  const std::vector<std::string>& for_task(TaskKind t) const {
    static const std::vector<std::string> none;
    auto it = questions.find(t);
    return it == questions.end() ? none : it->second;
  }

  static QuestionBucket from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw FormatError("question buckets must be a JSON object");
    QuestionBucket b;
    for (const auto& [name, list] : doc.items()) {
      const auto task = parse_task(name);
      if (!task) throw FormatError("unknown task '" + name + "' in question buckets");
      if (!list.is_array()) throw FormatError("bucket '" + name + "' must be an array");
      auto& dst = b.questions[*task];
      for (const auto& q : list) {
        if (!q.is_string()) throw FormatError("bucket '" + name + "' holds a non-string");
        dst.push_back(q.get<std::string>());
      }
    }
    return b;
  }

  static QuestionBucket load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open question buckets '" + path.string() + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }

  /// The shipped 4 x 20 buckets.
  static const QuestionBucket& builtin() {
    static const QuestionBucket b = from_json(nlohmann::json::parse(detail::kDefaultQuestionsJson));
    return b;
  }
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic uniform pick from a task's bucket, keyed on (seed, index, task).
/// Uses its own generator so datasets are identical across standard libraries.
inline const std::string& sample_question(const QuestionBucket& bucket, TaskKind task,
                                          std::uint64_t seed, std::uint64_t index = 0) {
  const auto& pool = bucket.for_task(task);
  if (pool.empty())
    throw ConfigError("question bucket for task '" + std::string(to_string(task)) + "' is empty");
  const std::uint64_t n = pool.size();
  std::uint64_t state = detail::splitmix64(seed) ^ detail::splitmix64(index * 4 + static_cast<std::uint64_t>(task) + 1);
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    state = detail::splitmix64(state);
    if (state < limit) return pool[static_cast<std::size_t>(state % n)];
  }
}

inline constexpr std::string_view kEvalPromptSuffix =
    "Return the answer in the paragraph format: 'The objects present in the image are: ...' "
    "and then list the objects with their count in word format (if greater than 1) in front of "
    "them, like 'two people'.";

/// "<question>. Return the answer in the paragraph format: ..." A trailing
/// '.', '?' or '!' on the question replaces the joining period.
inline std::string format_eval_prompt(std::string_view question) {
  const auto q = text::trim(question);
  if (q.empty()) return std::string(kEvalPromptSuffix);
  std::string out(q);
  const char last = out.back();
  if (last != '.' && last != '?' && last != '!') out += '.';
  out += ' ';
  out += kEvalPromptSuffix;
  return out;
}

/// One dataset row. Count tasks carry gt_counts, the depth task gt_order.
struct QARecord {
  std::string image_id;
  TaskKind task = TaskKind::panoptic;
  std::string question;
  std::string answer;
  ObjectCountMap gt_counts;
  DepthOrder gt_order;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

/// Builds the record for one image and task. `depth` is required for the
/// depth task only.
inline QARecord make_record(const SegmentationRecord& rec, const DepthMap* depth, TaskKind task,
                            const QuestionBucket& buckets, std::uint64_t seed,
                            std::uint64_t image_index, const Lexicon& lex) {
  QARecord r;
  r.image_id = rec.image_id;
  r.task = task;
  r.question = sample_question(buckets, task, seed, image_index);
  if (task == TaskKind::depth) {
    if (!depth) throw ConfigError(rec.image_id + ": depth task needs a depth map");
    r.gt_order = depth_order_from_maps(rec, *depth);
    r.answer = render_depth_answer(r.gt_order);
  } else {
    r.gt_counts = counts_from_segmentation(rec, task);
    r.answer = render_answer(r.gt_counts, lex);
  }
  return r;
}

}  // namespace cost
