#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cost/error.hpp"
#include "cost/lexicon.hpp"
#include "cost/png_io.hpp"

namespace cost {

/// One panoptic segment. `pixels` holds flat row-major indices (y * width + x).
struct Segment {
  std::uint32_t id = 0;
  std::string category;  // canonical noun
  bool is_thing = false;
  std::vector<std::uint32_t> pixels;
};

struct SegmentationRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<Segment> segments;

  bool empty() const { return segments.empty(); }

  /// Checks unique ids, non-empty and pairwise disjoint in-bounds regions.
  void validate() const {
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> taken(n, 0);
    std::unordered_set<std::uint32_t> ids;
    for (const auto& s : segments) {
      if (!ids.insert(s.id).second)
        throw IntegrityError(image_id + ": duplicate segment id " + std::to_string(s.id));
      if (s.pixels.empty())
        throw IntegrityError(image_id + ": segment " + std::to_string(s.id) + " has no pixels");
      for (auto p : s.pixels) {
        if (p >= n) throw IntegrityError(image_id + ": pixel index out of bounds");
        if (taken[p]++) throw IntegrityError(image_id + ": overlapping segment regions");
      }
    }
  }
};

/// Per-pixel depth, larger = farther. Units are arbitrary; only ranks matter.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Segment metadata row as listed in the panoptic JSON.
struct SegmentInfo {
  std::uint32_t id = 0;
  std::string category;  // canonical noun
  bool is_thing = false;
};

struct ImageMeta {
  std::string image_id;
  std::string file_name;  // mask file, relative to the mask directory
  std::optional<int> width;
  std::optional<int> height;
  std::vector<SegmentInfo> segments;

  /// File stem shared by the mask and the depth map.
  std::string stem() const { return std::filesystem::path(file_name).stem().string(); }
};

/// Panoptic id encoding: R + 256*G + 256^2*B.
inline constexpr std::uint32_t rgb_to_id(std::uint32_t r, std::uint32_t g, std::uint32_t b) {
  return r + 256u * g + 65536u * b;
}

inline constexpr std::array<std::uint8_t, 3> id_to_rgb(std::uint32_t id) {
  return {static_cast<std::uint8_t>(id & 0xFF), static_cast<std::uint8_t>((id >> 8) & 0xFF),
          static_cast<std::uint8_t>((id >> 16) & 0xFF)};
}

/// Turns a raw COCO category name into lexicon form: "-merged", "-other" and
/// "-stuff" are dropped, remaining '-'/'_' become spaces, then the lexicon
/// normalizes ("wall-other-merged" -> "wall", "skis" -> "ski").
inline std::string clean_category(const Lexicon& lex, std::string_view raw) {
  std::string name = text::to_lower(text::trim(raw));
  for (bool changed = true; changed;) {
    changed = false;
    for (std::string_view suffix : {"-merged", "-other", "-stuff"}) {
      if (text::ends_with(name, suffix) && name.size() > suffix.size()) {
        name.resize(name.size() - suffix.size());
        changed = true;
      }
    }
  }
  std::replace(name.begin(), name.end(), '-', ' ');
  std::replace(name.begin(), name.end(), '_', ' ');
  return lex.normalize(name);
}

namespace seg_detail {

inline std::string id_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw FormatError("image_id must be a string or an integer");
}

inline bool truthy(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>() != 0.0;
  throw FormatError("isthing must be a boolean or 0/1");
}

}  // namespace seg_detail

/// Parses the panoptic metadata file.
///
/// Layout: {"categories": [{"id", "name", "isthing"}] (optional),
///          "annotations": [{"image_id", "file_name"?, "width"?, "height"?,
///                           "segments_info": [{"id", "category" | "category_id", "isthing"?}]}]}
/// Images keep file order.
inline std::vector<ImageMeta> parse_panoptic_meta(const nlohmann::json& doc, const Lexicon& lex) {
  using nlohmann::json;
  if (!doc.is_object() || !doc.contains("annotations") || !doc["annotations"].is_array())
    throw FormatError("panoptic metadata needs an 'annotations' array");

  struct Category {
    std::string name;
    bool is_thing = false;
  };
  std::unordered_map<long long, Category> categories;
  if (doc.contains("categories")) {
    for (const auto& c : doc["categories"]) {
      categories[c.at("id").get<long long>()] =
          Category{clean_category(lex, c.at("name").get<std::string>()),
                   c.contains("isthing") && seg_detail::truthy(c["isthing"])};
    }
  }

  std::vector<ImageMeta> images;
  std::unordered_set<std::string> seen;
  for (const auto& a : doc["annotations"]) {
    try {
      ImageMeta m;
      m.image_id = seg_detail::id_string(a.at("image_id"));
      if (!seen.insert(m.image_id).second)
        throw FormatError("duplicate image_id '" + m.image_id + "'");
      m.file_name = a.contains("file_name") ? a["file_name"].get<std::string>() : m.image_id + ".png";
      if (a.contains("width")) m.width = a["width"].get<int>();
      if (a.contains("height")) m.height = a["height"].get<int>();
      for (const auto& s : a.at("segments_info")) {
        SegmentInfo info;
        const auto id = s.at("id").get<long long>();
        if (id <= 0 || id > 0xFFFFFF) throw FormatError("segment id out of range");
        info.id = static_cast<std::uint32_t>(id);
        std::optional<bool> thing;
        if (s.contains("category")) {
          info.category = clean_category(lex, s["category"].get<std::string>());
        } else {
          const auto cid = s.at("category_id").get<long long>();
          auto it = categories.find(cid);
          if (it == categories.end())
            throw FormatError("unknown category_id " + std::to_string(cid));
          info.category = it->second.name;
          thing = it->second.is_thing;
        }
        if (s.contains("isthing")) thing = seg_detail::truthy(s["isthing"]);
        if (!thing) throw FormatError("segment " + std::to_string(id) + " lacks isthing");
        info.is_thing = *thing;
        m.segments.push_back(std::move(info));
      }
      images.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw FormatError(std::string("panoptic metadata: ") + e.what());
    }
  }
  return images;
}

inline std::vector<ImageMeta> load_panoptic_meta(const std::filesystem::path& path,
                                                 const Lexicon& lex) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open panoptic metadata '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return parse_panoptic_meta(doc, lex);
}

/// Groups mask pixels by decoded segment id and joins them with metadata.
/// Id 0 is unlabeled and dropped; metadata rows without pixels are dropped.
inline SegmentationRecord decode_panoptic(const png::Raster& mask, const ImageMeta& meta) {
  if (mask.channels != 3 || mask.bit_depth != 8)
    throw FormatError(meta.image_id + ": panoptic mask must be 8-bit RGB");
  if ((meta.width && *meta.width != mask.width) || (meta.height && *meta.height != mask.height))
    throw FormatError(meta.image_id + ": mask size does not match metadata");

  std::unordered_map<std::uint32_t, std::size_t> slot;
  for (std::size_t i = 0; i < meta.segments.size(); ++i) {
    if (!slot.emplace(meta.segments[i].id, i).second)
      throw FormatError(meta.image_id + ": duplicate segment id " +
                        std::to_string(meta.segments[i].id));
  }

  std::vector<std::vector<std::uint32_t>> regions(meta.segments.size());
  const std::size_t n = static_cast<std::size_t>(mask.width) * mask.height;
  std::uint32_t last_id = 0;
  std::size_t last_slot = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::uint32_t id =
        rgb_to_id(mask.samples[3 * p], mask.samples[3 * p + 1], mask.samples[3 * p + 2]);
    if (id == 0) continue;
    if (id != last_id) {
      auto it = slot.find(id);
      if (it == slot.end())
        throw IntegrityError(meta.image_id + ": mask segment id " + std::to_string(id) +
                             " has no metadata entry");
      last_id = id;
      last_slot = it->second;
    }
    regions[last_slot].push_back(static_cast<std::uint32_t>(p));
  }

  SegmentationRecord rec;
  rec.image_id = meta.image_id;
  rec.width = mask.width;
  rec.height = mask.height;
  for (std::size_t i = 0; i < meta.segments.size(); ++i) {
    if (regions[i].empty()) continue;
    const auto& info = meta.segments[i];
    rec.segments.push_back(Segment{info.id, info.category, info.is_thing, std::move(regions[i])});
  }
  return rec;
}

inline SegmentationRecord load_panoptic(const std::filesystem::path& mask_image,
                                        const ImageMeta& meta) {
  return decode_panoptic(png::read(mask_image, png::Layout::rgb), meta);
}

/// Reads the mask and looks its metadata up by file stem (or image_id).
inline SegmentationRecord load_panoptic(const std::filesystem::path& mask_image,
                                        const std::filesystem::path& segments_meta,
                                        const Lexicon& lex) {
  const auto stem = mask_image.stem().string();
  for (const auto& m : load_panoptic_meta(segments_meta, lex))
    if (m.stem() == stem || m.image_id == stem) return load_panoptic(mask_image, m);
  throw IntegrityError("no metadata entry for mask '" + mask_image.string() + "'");
}

/// Reads a single-channel (8- or 16-bit) depth PNG.
inline DepthMap load_depth(const std::filesystem::path& path) {
  const auto raster = png::read(path, png::Layout::gray);
  DepthMap d;
  d.width = raster.width;
  d.height = raster.height;
  d.values.assign(raster.samples.begin(), raster.samples.end());
  return d;
}

}  // namespace cost
