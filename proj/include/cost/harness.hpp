#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cost/answer_parser.hpp"
#include "cost/builder.hpp"
#include "cost/lexicon.hpp"
#include "cost/metrics.hpp"
#include "cost/parallel.hpp"
#include "cost/records.hpp"
#include "cost/segmentation.hpp"

namespace cost {

namespace fs = std::filesystem;

enum class ReportFormat { table, json, csv };

inline std::optional<ReportFormat> parse_format(std::string_view s) {
  if (s == "table") return ReportFormat::table;
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  return std::nullopt;
}

/// Tasks selected by a "--task" value; "all" keeps every task.
inline std::vector<TaskKind> select_tasks(std::string_view name) {
  if (name == "all") return {kAllTasks.begin(), kAllTasks.end()};
  return {task_from_string(name)};
}

inline std::string format_score(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << round1(*v);
  return os.str();
}

inline nlohmann::ordered_json score_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

// ---------------------------------------------------------------------------
// build

struct BuildConfig {
  fs::path meta;                    // panoptic metadata JSON
  fs::path masks;                   // directory of panoptic PNGs
  std::optional<fs::path> depth;    // directory of 16-bit depth PNGs
  std::vector<TaskKind> tasks{TaskKind::panoptic};
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  bool with_prompt = false;
};

struct BuildLogEntry {
  std::string image_id;
  std::string task;  // "*" when the whole image was skipped
  std::string reason;
  bool hard_error = false;
};

struct BuildResult {
  std::vector<QARecord> records;
  std::vector<BuildLogEntry> log;
  std::size_t images = 0;

  std::size_t hard_errors() const {
    return static_cast<std::size_t>(
        std::count_if(log.begin(), log.end(), [](const BuildLogEntry& e) { return e.hard_error; }));
  }
};

/// Builds one record per (image, task), images in metadata order and tasks
/// in canonical order. A missing depth map skips only the depth record; an
/// unreadable or inconsistent mask is a hard error for that image. Either
/// way the build moves on.
inline BuildResult build_dataset(const std::vector<ImageMeta>& images, const BuildConfig& cfg,
                                 const QuestionBucket& buckets, const Lexicon& lex) {
  std::vector<TaskKind> tasks;
  for (auto t : kAllTasks)
    if (std::find(cfg.tasks.begin(), cfg.tasks.end(), t) != cfg.tasks.end()) tasks.push_back(t);
  for (auto t : tasks) {
    if (buckets.for_task(t).empty())
      throw ConfigError("question bucket for task '" + std::string(to_string(t)) + "' is empty");
  }

  struct Slot {
    std::vector<QARecord> records;
    std::vector<BuildLogEntry> log;
  };
  std::vector<Slot> slots(images.size());

  parallel_for(images.size(), cfg.jobs, [&](std::size_t i) {
    const auto& meta = images[i];
    auto& slot = slots[i];
    const fs::path mask_path = cfg.masks / meta.file_name;
    if (!fs::exists(mask_path)) {
      slot.log.push_back({meta.image_id, "*", "missing mask " + mask_path.string(), true});
      return;
    }
    SegmentationRecord rec;
    try {
      rec = load_panoptic(mask_path, meta);
    } catch (const Error& e) {
      slot.log.push_back({meta.image_id, "*", e.what(), true});
      return;
    }
    std::optional<DepthMap> depth;
    for (auto task : tasks) {
      try {
        if (task == TaskKind::depth) {
          if (!depth) {
            const auto depth_path = cfg.depth ? *cfg.depth / (meta.stem() + ".png") : fs::path();
            if (!cfg.depth || !fs::exists(depth_path)) {
              slot.log.push_back({meta.image_id, "depth", "missing depth map", false});
              continue;
            }
            depth = load_depth(depth_path);
          }
          slot.records.push_back(make_record(rec, &*depth, task, buckets, cfg.seed, i, lex));
        } else {
          slot.records.push_back(make_record(rec, nullptr, task, buckets, cfg.seed, i, lex));
        }
      } catch (const Error& e) {
        slot.log.push_back({meta.image_id, std::string(to_string(task)), e.what(), true});
      }
    }
  });

  BuildResult result;
  result.images = images.size();
  for (auto& s : slots) {
    std::move(s.records.begin(), s.records.end(), std::back_inserter(result.records));
    std::move(s.log.begin(), s.log.end(), std::back_inserter(result.log));
  }
  return result;
}

/// Dataset lines, optionally with the evaluation prompt for each question.
inline void write_build_output(std::ostream& out, const BuildResult& result, bool with_prompt) {
  for (const auto& r : result.records) {
    if (!with_prompt) {
      out << to_jsonl_line(r) << '\n';
      continue;
    }
    auto j = nlohmann::ordered_json::parse(to_jsonl_line(r));
    j["prompt"] = format_eval_prompt(r.question);
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalConfig {
  fs::path gt;
  fs::path pred;
  std::vector<TaskKind> tasks{kAllTasks.begin(), kAllTasks.end()};
  std::string lexicon_name = "builtin";
  std::uint64_t seed = 0;
  unsigned jobs = 0;
};

struct TaskResult {
  TaskKind task = TaskKind::panoptic;
  std::optional<ScoreReport> report;  // absent when no image was scorable
  std::size_t matched = 0;
};

struct EvalResult {
  std::vector<TaskResult> tasks;  // canonical task order, only tasks with matches
  std::vector<std::string> warnings;
  std::size_t predictions = 0;
  std::size_t scored = 0;
  std::size_t excluded = 0;
  std::size_t unmatched = 0;

  const TaskResult* find(TaskKind t) const {
    for (const auto& r : tasks)
      if (r.task == t) return &r;
    return nullptr;
  }
};

/// Scores one prediction against its ground truth.
inline ImageScores score_record(const QARecord& gt, const std::string& response,
                                const Lexicon& lex) {
  ImageScores s;
  s.image_id = gt.image_id;
  if (gt.task == TaskKind::depth) {
    if (!gt.gt_order.empty()) s.ds = depth_score(gt.gt_order, parse_depth_order(response, lex));
    return s;
  }
  const auto pred = parse_object_counts(response, lex);
  if (!gt.gt_counts.empty()) s.cs = count_score(gt.gt_counts, pred);
  if (!pred.empty()) s.hs = hallucination_score(gt.gt_counts, pred);
  return s;
}

/// Joins predictions to ground truth on (image_id, task), parses and scores
/// every match, then aggregates per task. Every prediction ends up scored,
/// excluded (no defined metric) or in the warnings. Throws Error when no
/// prediction matches a ground-truth record of a selected task.
inline EvalResult evaluate(const std::vector<QARecord>& gt,
                           const std::vector<PredictionRecord>& preds,
                           const std::vector<TaskKind>& tasks, const Lexicon& lex,
                           unsigned jobs = 0) {
  using Key = std::pair<std::string, TaskKind>;
  const auto selected = [&](TaskKind t) {
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
  };

  std::map<Key, std::size_t> gt_index;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt_index.emplace(Key{gt[i].image_id, gt[i].task}, i).second)
      throw FormatError("duplicate ground-truth record (" + gt[i].image_id + ", " +
                        std::string(to_string(gt[i].task)) + ")");
  }

  EvalResult result;
  result.predictions = preds.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gt index, pred index)
  std::set<Key> seen;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const auto& p = preds[j];
    const Key key{p.image_id, p.task};
    const std::string label = "(" + p.image_id + ", " + std::string(to_string(p.task)) + ")";
    if (!seen.insert(key).second) {
      result.warnings.push_back("duplicate prediction " + label + " ignored");
      ++result.unmatched;
      continue;
    }
    if (!selected(p.task)) {
      result.warnings.push_back("prediction " + label + " outside task filter");
      ++result.unmatched;
      continue;
    }
    auto it = gt_index.find(key);
    if (it == gt_index.end()) {
      result.warnings.push_back("prediction " + label + " has no ground truth");
      ++result.unmatched;
      continue;
    }
    pairs.emplace_back(it->second, j);
  }
  if (pairs.empty()) throw Error("no prediction matches a ground-truth record");

  std::set<Key> predicted;
  for (const auto& [gi, pj] : pairs) predicted.insert(Key{gt[gi].image_id, gt[gi].task});
  for (const auto& r : gt) {
    if (selected(r.task) && !predicted.count(Key{r.image_id, r.task}))
      result.warnings.push_back("ground truth (" + r.image_id + ", " +
                                std::string(to_string(r.task)) + ") has no prediction");
  }

  std::vector<ImageScores> scores(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    scores[k] = score_record(gt[pairs[k].first], preds[pairs[k].second].response, lex);
  });

  for (auto task : kAllTasks) {
    if (!selected(task)) continue;
    std::vector<ImageScores> per_task;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (gt[pairs[k].first].task == task) per_task.push_back(scores[k]);
    if (per_task.empty()) continue;
    TaskResult tr;
    tr.task = task;
    tr.matched = per_task.size();
    for (const auto& s : per_task) {
      if (s.cs || s.hs || s.ds) ++result.scored;
      else ++result.excluded;
    }
    try {
      tr.report = aggregate(std::move(per_task));
    } catch (const EmptyReportError&) {
      result.warnings.push_back("task " + std::string(to_string(task)) +
                                " has no scorable images");
    }
    result.tasks.push_back(std::move(tr));
  }
  return result;
}

/// Metric names reported for a task.
inline std::vector<std::string> task_metrics(TaskKind t) {
  if (t == TaskKind::depth) return {"ds"};
  return {"cs", "hs"};
}

inline std::optional<double> metric_value(const ImageScores& s, const std::string& m) {
  if (m == "cs") return s.cs;
  if (m == "hs") return s.hs;
  return s.ds;
}

inline std::optional<double> aggregate_value(const ScoreReport& r, const std::string& m) {
  if (m == "cs") return r.aggregate_cs;
  if (m == "hs") return r.aggregate_hs;
  return r.aggregate_ds;
}

inline std::size_t metric_count(const ScoreReport& r, const std::string& m) {
  if (m == "cs") return r.cs_count;
  if (m == "hs") return r.hs_count;
  return r.ds_count;
}

inline const std::vector<std::string>& metric_exclusions(const ScoreReport& r,
                                                         const std::string& m) {
  if (m == "cs") return r.cs_excluded;
  if (m == "hs") return r.hs_excluded;
  return r.ds_excluded;
}

/// Machine report: {config_echo, per_image, aggregates, exclusions, warnings}.
/// Contains nothing that depends on the parallelism degree.
inline nlohmann::ordered_json eval_report_json(const EvalResult& r, const EvalConfig& cfg) {
  nlohmann::ordered_json j;
  auto& echo = j["config_echo"];
  echo["gt"] = cfg.gt.string();
  echo["pred"] = cfg.pred.string();
  nlohmann::ordered_json task_names = nlohmann::ordered_json::array();
  for (auto t : cfg.tasks) task_names.push_back(std::string(to_string(t)));
  echo["tasks"] = std::move(task_names);
  echo["lexicon"] = cfg.lexicon_name;
  echo["seed"] = cfg.seed;

  j["per_image"] = nlohmann::ordered_json::object();
  j["aggregates"] = nlohmann::ordered_json::object();
  j["exclusions"] = nlohmann::ordered_json::object();
  for (const auto& tr : r.tasks) {
    const std::string name(to_string(tr.task));
    const auto metrics = task_metrics(tr.task);
    auto& rows = j["per_image"][name] = nlohmann::ordered_json::array();
    auto& agg = j["aggregates"][name];
    auto& exc = j["exclusions"][name];
    agg["matched"] = tr.matched;
    if (!tr.report) {
      for (const auto& m : metrics) agg[m] = nullptr;
      continue;
    }
    const auto& rep = *tr.report;
    for (const auto& s : rep.per_image) {
      nlohmann::ordered_json row;
      row["image_id"] = s.image_id;
      for (const auto& m : metrics) row[m] = score_json(metric_value(s, m));
      rows.push_back(std::move(row));
    }
    agg["image_count"] = rep.image_count;
    for (const auto& m : metrics) {
      agg[m] = score_json(aggregate_value(rep, m));
      agg[m + "_count"] = metric_count(rep, m);
      exc[m] = metric_exclusions(rep, m);
    }
  }
  auto& acc = j["exclusions"]["accounting"];
  acc["predictions"] = r.predictions;
  acc["scored"] = r.scored;
  acc["excluded_undefined"] = r.excluded;
  acc["unmatched"] = r.unmatched;
  j["warnings"] = r.warnings;
  return j;
}

inline void write_eval_table(std::ostream& os, const EvalResult& r) {
  os << std::left << std::setw(10) << "task" << std::right << std::setw(8) << "images"
     << std::setw(8) << "CS^" << std::setw(8) << "HS_" << std::setw(8) << "DS_" << '\n';
  for (const auto& tr : r.tasks) {
    std::optional<double> cs, hs, ds;
    std::size_t images = 0;
    if (tr.report) {
      cs = tr.report->aggregate_cs;
      hs = tr.report->aggregate_hs;
      ds = tr.report->aggregate_ds;
      images = tr.report->image_count;
    }
    os << std::left << std::setw(10) << to_string(tr.task) << std::right << std::setw(8) << images
       << std::setw(8) << format_score(cs) << std::setw(8) << format_score(hs) << std::setw(8)
       << format_score(ds) << '\n';
  }
  os << "predictions: " << r.predictions << "  scored: " << r.scored
     << "  excluded: " << r.excluded << "  unmatched: " << r.unmatched << '\n';
}

inline std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  return nlohmann::json(*v).dump();
}

/// Per-image CSV: task,image_id,cs,hs,ds at full precision.
inline void write_eval_csv(std::ostream& os, const EvalResult& r) {
  os << "task,image_id,cs,hs,ds\n";
  for (const auto& tr : r.tasks) {
    if (!tr.report) continue;
    for (const auto& s : tr.report->per_image)
      os << to_string(tr.task) << ',' << s.image_id << ',' << csv_number(s.cs) << ','
         << csv_number(s.hs) << ',' << csv_number(s.ds) << '\n';
  }
}

// ---------------------------------------------------------------------------
// stats

struct TaskStats {
  TaskKind task = TaskKind::panoptic;
  std::map<long long, std::size_t> histogram;  // total objects -> images
  long long min = 0;
  long long max = 0;
  double mean = 0.0;
  std::size_t images = 0;
};

/// Histogram of per-image total object counts for each selected task present
/// in the dataset. Count tasks sum gt_counts; the depth task counts labels.
inline std::vector<TaskStats> dataset_stats(const std::vector<QARecord>& dataset,
                                            const std::vector<TaskKind>& tasks) {
  if (dataset.empty()) throw Error("dataset is empty");
  std::vector<TaskStats> out;
  for (auto task : kAllTasks) {
    if (std::find(tasks.begin(), tasks.end(), task) == tasks.end()) continue;
    TaskStats st;
    st.task = task;
    long long sum = 0;
    for (const auto& r : dataset) {
      if (r.task != task) continue;
      const long long total =
          task == TaskKind::depth ? static_cast<long long>(r.gt_order.size()) : r.gt_counts.total();
      ++st.histogram[total];
      if (st.images == 0 || total < st.min) st.min = total;
      if (st.images == 0 || total > st.max) st.max = total;
      sum += total;
      ++st.images;
    }
    if (st.images == 0) continue;
    st.mean = static_cast<double>(sum) / static_cast<double>(st.images);
    out.push_back(std::move(st));
  }
  if (out.empty()) throw Error("dataset has no records for the selected tasks");
  return out;
}

inline void write_stats_table(std::ostream& os, const std::vector<TaskStats>& stats) {
  for (const auto& st : stats) {
    os << to_string(st.task) << ": " << st.images << " images, total objects min " << st.min
       << " max " << st.max << " mean " << std::fixed << std::setprecision(1) << st.mean << '\n';
    os.unsetf(std::ios::floatfield);
    for (const auto& [total, n] : st.histogram)
      os << "  " << std::setw(4) << total << "  " << std::setw(6) << n << '\n';
  }
}

inline void write_stats_csv(std::ostream& os, const std::vector<TaskStats>& stats) {
  os << "task,total_objects,images\n";
  for (const auto& st : stats)
    for (const auto& [total, n] : st.histogram)
      os << to_string(st.task) << ',' << total << ',' << n << '\n';
}

inline nlohmann::ordered_json stats_json(const std::vector<TaskStats>& stats) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& st : stats) {
    auto& t = j[std::string(to_string(st.task))];
    t["images"] = st.images;
    t["min"] = st.min;
    t["max"] = st.max;
    t["mean"] = st.mean;
    auto& h = t["histogram"] = nlohmann::ordered_json::object();
    for (const auto& [total, n] : st.histogram) h[std::to_string(total)] = n;
  }
  return j;
}

// ---------------------------------------------------------------------------
// compare

struct CompareRow {
  std::string model;
  fs::path pred;
  std::optional<EvalResult> result;
  std::string failure;
};

/// Model name from a prediction path: the file stem, suffixed when repeated.
inline std::vector<std::string> model_names(const std::vector<fs::path>& preds) {
  std::vector<std::string> names;
  std::map<std::string, int> uses;
  for (const auto& p : preds) {
    std::string n = p.stem().string();
    const int k = ++uses[n];
    names.push_back(k == 1 ? n : n + "#" + std::to_string(k));
  }
  return names;
}

/// Evaluates every prediction file against the same ground truth. Files that
/// fail to load or match nothing become failed rows; rows keep input order.
inline std::vector<CompareRow> compare_models(const std::vector<QARecord>& gt,
                                              const std::vector<fs::path>& preds,
                                              const std::vector<TaskKind>& tasks,
                                              const Lexicon& lex, unsigned jobs = 0) {
  const auto names = model_names(preds);
  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CompareRow row{names[i], preds[i], std::nullopt, {}};
    try {
      row.result = evaluate(gt, read_predictions(preds[i]), tasks, lex, jobs);
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// (task, metric) columns: CS/HS per count task, DS for depth, for tasks in GT.
inline std::vector<std::pair<TaskKind, std::string>> compare_columns(
    const std::vector<QARecord>& gt, const std::vector<TaskKind>& tasks) {
  std::vector<std::pair<TaskKind, std::string>> cols;
  for (auto t : kAllTasks) {
    if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) continue;
    if (std::none_of(gt.begin(), gt.end(), [&](const QARecord& r) { return r.task == t; }))
      continue;
    for (const auto& m : task_metrics(t)) cols.emplace_back(t, m);
  }
  return cols;
}

inline std::optional<double> row_value(const CompareRow& row, TaskKind t, const std::string& m) {
  if (!row.result) return std::nullopt;
  const auto* tr = row.result->find(t);
  if (!tr || !tr->report) return std::nullopt;
  return aggregate_value(*tr->report, m);
}

inline std::string column_title(TaskKind t, const std::string& m) {
  std::string title = std::string(to_string(t)) + ":";
  for (char c : m) title += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  title += m == "cs" ? "^" : "_";
  return title;
}

inline void write_compare_table(std::ostream& os, const std::vector<CompareRow>& rows,
                                const std::vector<std::pair<TaskKind, std::string>>& cols) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model.size());
  os << std::left << std::setw(static_cast<int>(width + 2)) << "model" << std::right;
  for (const auto& [t, m] : cols) os << std::setw(14) << column_title(t, m);
  os << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width + 2)) << r.model << std::right;
    if (!r.result) {
      os << "FAILED: " << r.failure << '\n';
      continue;
    }
    for (const auto& [t, m] : cols) os << std::setw(14) << format_score(row_value(r, t, m));
    os << '\n';
  }
}

inline void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows,
                              const std::vector<std::pair<TaskKind, std::string>>& cols) {
  os << "model,status";
  for (const auto& [t, m] : cols) os << ',' << to_string(t) << '_' << m;
  os << '\n';
  for (const auto& r : rows) {
    os << r.model << ',' << (r.result ? "ok" : "failed");
    for (const auto& [t, m] : cols) os << ',' << csv_number(row_value(r, t, m));
    os << '\n';
  }
}

inline nlohmann::ordered_json compare_json(const std::vector<CompareRow>& rows,
                                           const std::vector<std::pair<TaskKind, std::string>>& cols) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["model"] = r.model;
    row["pred"] = r.pred.string();
    row["status"] = r.result ? "ok" : "failed";
    if (!r.result) row["error"] = r.failure;
    for (const auto& [t, m] : cols)
      row[std::string(to_string(t)) + "_" + m] = score_json(row_value(r, t, m));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace cost
