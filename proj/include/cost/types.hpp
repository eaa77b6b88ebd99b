#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cost/error.hpp"

namespace cost {

/// The four COST question families.
enum class TaskKind { semantic, instance, panoptic, depth };

inline constexpr std::array<TaskKind, 4> kAllTasks = {TaskKind::semantic, TaskKind::instance,
                                                      TaskKind::panoptic, TaskKind::depth};

inline constexpr std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::semantic: return "semantic";
    case TaskKind::instance: return "instance";
    case TaskKind::panoptic: return "panoptic";
    case TaskKind::depth: return "depth";
  }
  return "?";
}

inline std::optional<TaskKind> parse_task(std::string_view name) {
  for (auto t : kAllTasks)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

inline TaskKind task_from_string(std::string_view name) {
  if (auto t = parse_task(name)) return *t;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

inline constexpr bool is_count_task(TaskKind t) { return t != TaskKind::depth; }

/// Canonical object noun -> positive count.
///
/// Keys are kept sorted so iteration, rendering and serialization are stable.
class ObjectCountMap {
public:
  using container = std::map<std::string, int>;
  using const_iterator = container::const_iterator;

  ObjectCountMap() = default;
  ObjectCountMap(std::initializer_list<std::pair<const std::string, int>> init) {
    for (const auto& [noun, count] : init) add(noun, count);
  }

  /// Adds `count` to `noun`; colliding nouns sum. Non-positive counts are ignored.
  void add(const std::string& noun, int count = 1) {
    if (count <= 0 || noun.empty()) return;
    entries_[noun] += count;
  }

  /// Count for `noun`, 0 when absent.
  int count(const std::string& noun) const {
    auto it = entries_.find(noun);
    return it == entries_.end() ? 0 : it->second;
  }
  bool contains(const std::string& noun) const { return entries_.count(noun) != 0; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Sum of all counts (total objects in the image).
  long long total() const {
    long long t = 0;
    for (const auto& [n, c] : entries_) t += c;
    return t;
  }

  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }
  const container& entries() const { return entries_; }

  friend bool operator==(const ObjectCountMap&, const ObjectCountMap&) = default;

private:
  container entries_;
};

/// One entry of a depth order: a canonical noun plus an instance ordinal.
/// Ordinal 1 renders bare ("person"), k >= 2 renders "person-k".
struct InstanceLabel {
  std::string noun;
  int ordinal = 1;

  std::string str() const {
    return ordinal <= 1 ? noun : noun + "-" + std::to_string(ordinal);
  }

  /// Splits a trailing "-<k>" suffix with k >= 2. Anything else stays in `noun`
  /// verbatim with ordinal 1.
  static InstanceLabel from_string(std::string_view label) {
    const auto dash = label.rfind('-');
    if (dash != std::string_view::npos && dash + 1 < label.size()) {
      const auto digits = label.substr(dash + 1);
      int k = 0;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 2)
        return {std::string(label.substr(0, dash)), k};
    }
    return {std::string(label), 1};
  }

  friend bool operator==(const InstanceLabel&, const InstanceLabel&) = default;
};

/// Object instances ordered nearest first.
struct DepthOrder {
  std::vector<InstanceLabel> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.str());
    return out;
  }

  static DepthOrder from_labels(const std::vector<std::string>& labels) {
    DepthOrder d;
    d.items.reserve(labels.size());
    for (const auto& l : labels) d.items.push_back(InstanceLabel::from_string(l));
    return d;
  }

  /// Same-noun suffixes run 1 (bare), 2, 3, ... in list order.
  bool is_well_numbered() const {
    std::map<std::string, int> seen;
    for (const auto& it : items)
      if (it.ordinal != ++seen[it.noun]) return false;
    return true;
  }

  friend bool operator==(const DepthOrder&, const DepthOrder&) = default;
};

}  // namespace cost
