#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cost/builder.hpp"
#include "cost/error.hpp"
#include "cost/types.hpp"

namespace cost {

/// Raw model output for one (image, task).
struct PredictionRecord {
  std::string image_id;
  TaskKind task = TaskKind::panoptic;
  std::string response;
};

/// Serializes with a fixed key order so dataset files are byte-stable.
inline std::string to_jsonl_line(const QARecord& r) {
  nlohmann::ordered_json j;
  j["image_id"] = r.image_id;
  j["task"] = std::string(to_string(r.task));
  j["question"] = r.question;
  j["answer"] = r.answer;
  if (r.task == TaskKind::depth) {
    j["gt_order"] = r.gt_order.labels();
  } else {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [noun, n] : r.gt_counts) counts[noun] = n;
    j["gt_counts"] = std::move(counts);
  }
  return j.dump();
}

inline std::string to_jsonl_line(const PredictionRecord& p) {
  nlohmann::ordered_json j;
  j["image_id"] = p.image_id;
  j["task"] = std::string(to_string(p.task));
  j["response"] = p.response;
  return j.dump();
}

namespace records_detail {

inline std::string image_id_of(const nlohmann::json& j) {
  const auto& v = j.at("image_id");
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw FormatError("image_id must be a string or an integer");
}

}  // namespace records_detail

inline QARecord qa_record_from_json(const nlohmann::json& j) {
  QARecord r;
  r.image_id = records_detail::image_id_of(j);
  r.task = task_from_string(j.at("task").get<std::string>());
  r.question = j.value("question", "");
  r.answer = j.value("answer", "");
  if (r.task == TaskKind::depth) {
    r.gt_order = DepthOrder::from_labels(j.at("gt_order").get<std::vector<std::string>>());
  } else {
    for (const auto& [noun, n] : j.at("gt_counts").items()) {
      const int c = n.get<int>();
      if (c < 1) throw FormatError("gt_counts entry '" + noun + "' is not positive");
      r.gt_counts.add(noun, c);
    }
  }
  return r;
}

inline PredictionRecord prediction_from_json(const nlohmann::json& j) {
  PredictionRecord p;
  p.image_id = records_detail::image_id_of(j);
  p.task = task_from_string(j.at("task").get<std::string>());
  p.response = j.at("response").get<std::string>();
  return p;
}

/// Calls `row` for each non-blank line; errors name the file and line.
template <class F>
void for_each_jsonl(const std::filesystem::path& path, F&& row) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      row(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline std::vector<QARecord> read_dataset(const std::filesystem::path& path) {
  std::vector<QARecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j) { out.push_back(qa_record_from_json(j)); });
  return out;
}

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j) { out.push_back(prediction_from_json(j)); });
  return out;
}

inline void write_dataset(std::ostream& out, const std::vector<QARecord>& records) {
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
}

}  // namespace cost
