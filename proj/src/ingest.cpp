#include "hierdet/ingest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace hierdet {

using nlohmann::json;
using nlohmann::ordered_json;

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t field)
    : std::runtime_error([&] {
        std::string loc;
        if (line > 0) loc += "line " + std::to_string(line);
        if (field > 0) loc += (loc.empty() ? "" : ", ") + std::string("field ") + std::to_string(field);
        return loc.empty() ? what : loc + ": " + what;
      }()),
      line_(line),
      field_(field) {}

std::size_t OidHierarchyTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : subcategories) n += c.node_count();
  return n;
}

std::size_t AnnotatedDataset::box_count() const {
  std::size_t n = 0;
  for (const auto& img : images) n += img.boxes.size();
  return n;
}

bool is_valid_mid(std::string_view mid) {
  if (mid.size() <= 3 || mid.substr(0, 3) != "/m/") return false;
  return std::none_of(mid.begin(), mid.end(), [](char c) {
    return c == ',' || c == '"' || static_cast<unsigned char>(c) <= ' ';
  });
}

bool is_valid_dataset_tag(std::string_view tag) {
  if (tag == "COCO" || tag == "MVD" || tag == "OID") return true;
  return tag.size() > 6 && tag.substr(0, 6) == "SYNTH-";
}

namespace {

struct CsvLine {
  std::size_t number;
  std::vector<std::string> cells;
};

std::vector<std::string> split_cells(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      return cells;
    }
    cells.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Splits into lines (LF or CRLF), dropping one trailing empty line and a
// UTF-8 byte-order mark. Quoted cells are rejected.
std::vector<CsvLine> read_csv(std::string_view text, std::string_view header,
                              std::size_t columns) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvLine> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (number == 1) {
      if (line != header) {
        throw ParseError("malformed header, expected '" + std::string(header) + "'", 1);
      }
      continue;
    }
    auto cells = split_cells(line);
    if (cells.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " columns, found " +
                           std::to_string(cells.size()),
                       number);
    }
    for (std::size_t f = 0; f < cells.size(); ++f) {
      if (cells[f].find('"') != std::string::npos) {
        throw ParseError("quoted cells are not supported", number, f + 1);
      }
    }
    lines.push_back({number, std::move(cells)});
  }
  if (number == 0) throw ParseError("missing header", 1);
  return lines;
}

std::optional<std::string> cell(std::string s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_of_offset(text, e.byte));
  }
}

OidHierarchyTree to_tree(const json& j, const std::string& path, std::size_t depth) {
  if (depth > kMaxHierarchyDepth) {
    throw ParseError("hierarchy deeper than " + std::to_string(kMaxHierarchyDepth) + " at " +
                     path);
  }
  if (!j.is_object()) throw ParseError("hierarchy node at " + path + " is not an object");
  OidHierarchyTree node;
  for (const auto& [key, value] : j.items()) {
    if (key == "LabelName") {
      if (!value.is_string() || value.get<std::string>().empty()) {
        throw ParseError("LabelName at " + path + " must be a nonempty string");
      }
      node.label_name = value.get<std::string>();
    } else if (key == "Subcategory") {
      if (!value.is_array()) throw ParseError("Subcategory at " + path + " is not a list");
      for (std::size_t i = 0; i < value.size(); ++i) {
        node.subcategories.push_back(
            to_tree(value[i], path + "/Subcategory/" + std::to_string(i), depth + 1));
      }
    } else {
      throw ParseError("unknown key '" + key + "' at " + path);
    }
  }
  if (node.label_name.empty()) throw ParseError("missing LabelName at " + path);
  return node;
}

ordered_json tree_json(const OidHierarchyTree& t) {
  ordered_json j;
  j["LabelName"] = t.label_name;
  if (!t.subcategories.empty()) {
    j["Subcategory"] = ordered_json::array();
    for (const auto& c : t.subcategories) j["Subcategory"].push_back(tree_json(c));
  }
  return j;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " is not an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ParseError("unknown field '" + key + "' in " + where);
    }
  }
  for (const char* a : allowed) {
    if (!j.contains(a)) throw ParseError("missing field '" + std::string(a) + "' in " + where);
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

ordered_json space_payload(const UnifiedLabelSpace& space) {
  ordered_json cats = ordered_json::array();
  for (const Category& c : space.categories()) {
    ordered_json origins = ordered_json::array();
    for (SourceDataset d : c.origins) origins.push_back(to_string(d));
    cats.push_back({{"id", c.id.value},
                    {"name", c.canonical_name},
                    {"oid_mid", optional_string(c.oid_mid)},
                    {"origins", origins},
                    {"is_oid_nonleaf", c.is_oid_nonleaf},
                    {"coco_name", optional_string(c.coco_name)},
                    {"mvd_name", optional_string(c.mvd_name)}});
  }
  ordered_json edges = ordered_json::array();
  for (const auto& [p, c] : space.hierarchy_edges()) edges.push_back({p.value, c.value});
  ordered_json equiv = ordered_json::array();
  for (const auto& [s, t] : space.equivalences()) equiv.push_back({s.value, t.value});
  ordered_json cross = ordered_json::array();
  for (const auto& [s, ts] : space.cross_parents()) {
    ordered_json targets = ordered_json::array();
    for (CategoryId t : ts) targets.push_back(t.value);
    cross.push_back({s.value, targets});
  }
  return {{"categories", cats},
          {"hierarchy_edges", edges},
          {"equivalences", equiv},
          {"cross_parents", cross}};
}

std::optional<std::string> json_optional_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

CategoryId json_id(const json& j) { return CategoryId{j.get<std::uint32_t>()}; }

}  // namespace

std::vector<MappingRow> parse_mapping_csv(std::string_view text) {
  std::vector<MappingRow> rows;
  for (auto& line : read_csv(text, "unified_name,coco_name,mvd_name,oid_mid", 4)) {
    MappingRow row;
    row.unified_name = line.cells[0];
    row.coco_name = cell(line.cells[1]);
    row.mvd_name = cell(line.cells[2]);
    row.oid_mid = cell(line.cells[3]);
    if (row.unified_name.empty()) throw ParseError("empty unified_name", line.number, 1);
    if (!row.coco_name && !row.mvd_name && !row.oid_mid) {
      throw ParseError("row has no COCO, MVD or OID source", line.number);
    }
    if (row.oid_mid && !is_valid_mid(*row.oid_mid)) {
      throw ParseError("malformed MID '" + *row.oid_mid + "'", line.number, 4);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string write_mapping_csv(const std::vector<MappingRow>& rows) {
  std::string out = "unified_name,coco_name,mvd_name,oid_mid\n";
  for (const auto& r : rows) {
    out += r.unified_name + "," + r.coco_name.value_or("") + "," + r.mvd_name.value_or("") +
           "," + r.oid_mid.value_or("") + "\n";
  }
  return out;
}

std::vector<LinkRow> parse_link_csv(std::string_view text) {
  std::vector<LinkRow> rows;
  for (auto& line : read_csv(text, "source_dataset,source_name,oid_mid", 3)) {
    const std::string& tag = line.cells[0];
    LinkRow row;
    if (tag == "COCO") {
      row.source_dataset = SourceDataset::COCO;
    } else if (tag == "MVD") {
      row.source_dataset = SourceDataset::MVD;
    } else if (tag == "OID") {
      throw ParseError("OID is not a valid link source", line.number, 1);
    } else {
      throw ParseError("unknown dataset tag '" + tag + "'", line.number, 1);
    }
    row.source_name = line.cells[1];
    row.oid_mid = line.cells[2];
    if (row.source_name.empty()) throw ParseError("empty source_name", line.number, 2);
    if (!is_valid_mid(row.oid_mid)) {
      throw ParseError("malformed MID '" + row.oid_mid + "'", line.number, 3);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string write_link_csv(const std::vector<LinkRow>& rows) {
  std::string out = "source_dataset,source_name,oid_mid\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.source_dataset)) + "," + r.source_name + "," + r.oid_mid + "\n";
  }
  return out;
}

OidHierarchyTree parse_oid_hierarchy(std::string_view text) {
  return to_tree(parse_json(text), "/", 1);
}

std::string write_oid_hierarchy(const OidHierarchyTree& tree) {
  return tree_json(tree).dump(1) + "\n";
}

AnnotatedDataset load_annotations(std::string_view text) {
  json j = parse_json(text);
  require_keys(j, {"dataset_tag", "images"}, "dataset");
  AnnotatedDataset ds;
  try {
    ds.dataset_tag = j["dataset_tag"].get<std::string>();
    if (!is_valid_dataset_tag(ds.dataset_tag)) {
      throw ParseError("unknown dataset_tag '" + ds.dataset_tag + "'");
    }
    if (!j["images"].is_array()) throw ParseError("images is not a list");
    for (std::size_t i = 0; i < j["images"].size(); ++i) {
      const json& ji = j["images"][i];
      const std::string where = "images[" + std::to_string(i) + "]";
      require_keys(ji, {"image_id", "width", "height", "boxes"}, where);
      AnnotatedImage img;
      img.image_id = ji["image_id"].get<std::string>();
      img.width = ji["width"].get<int>();
      img.height = ji["height"].get<int>();
      if (img.width <= 0 || img.height <= 0) {
        throw ParseError("image " + img.image_id + " has non-positive size");
      }
      if (!ji["boxes"].is_array()) throw ParseError(where + ".boxes is not a list");
      for (std::size_t b = 0; b < ji["boxes"].size(); ++b) {
        const json& jb = ji["boxes"][b];
        const std::string bwhere = where + ".boxes[" + std::to_string(b) + "]";
        require_keys(jb, {"bbox", "category_name"}, bwhere);
        const json& bb = jb["bbox"];
        if (!bb.is_array() || bb.size() != 4) throw ParseError(bwhere + ".bbox must be [x,y,w,h]");
        AnnotatedBox box;
        box.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                    bb[3].get<double>()};
        box.category_name = jb["category_name"].get<std::string>();
        const Box& r = box.bbox;
        if (!(r.w > 0.0) || !(r.h > 0.0)) {
          throw ParseError("image " + img.image_id + ": box " + std::to_string(b) +
                           " has non-positive extent");
        }
        if (r.x < 0.0 || r.y < 0.0 || r.x + r.w > img.width || r.y + r.h > img.height) {
          throw ParseError("image " + img.image_id + ": box " + std::to_string(b) +
                           " is out of image bounds");
        }
        img.boxes.push_back(std::move(box));
      }
      ds.images.push_back(std::move(img));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("annotation field has wrong type: ") + e.what());
  }
  return ds;
}

std::string write_annotations(const AnnotatedDataset& dataset) {
  ordered_json images = ordered_json::array();
  for (const auto& img : dataset.images) {
    ordered_json boxes = ordered_json::array();
    for (const auto& b : img.boxes) {
      boxes.push_back({{"bbox", {b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h}},
                       {"category_name", b.category_name}});
    }
    images.push_back({{"image_id", img.image_id},
                      {"width", img.width},
                      {"height", img.height},
                      {"boxes", boxes}});
  }
  ordered_json j = {{"dataset_tag", dataset.dataset_tag}, {"images", images}};
  return j.dump(1) + "\n";
}

std::string serialize_space(const UnifiedLabelSpace& space) {
  ordered_json payload = space_payload(space);
  ordered_json doc;
  doc["version"] = kSpaceFormatVersion;
  doc["checksum"] = sha256_hex(payload.dump());
  for (auto& [key, value] : payload.items()) doc[key] = value;
  return doc.dump(1) + "\n";
}

UnifiedLabelSpace deserialize_space(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::parse_error&) {
    throw SpaceIoError(SpaceIoError::Kind::ChecksumMismatch,
                       "space artifact is truncated or corrupted");
  }
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kSpaceFormatVersion) {
    throw SpaceIoError(SpaceIoError::Kind::VersionMismatch,
                       "unsupported space artifact version (expected " +
                           std::to_string(kSpaceFormatVersion) + ")");
  }
  ordered_json payload;
  for (const char* key : {"categories", "hierarchy_edges", "equivalences", "cross_parents"}) {
    if (!doc.contains(key)) {
      throw SpaceIoError(SpaceIoError::Kind::ChecksumMismatch,
                         std::string("space artifact lacks '") + key + "'");
    }
    payload[key] = doc[key];
  }
  if (!doc.contains("checksum") || !doc["checksum"].is_string() ||
      doc["checksum"].get<std::string>() != sha256_hex(payload.dump())) {
    throw SpaceIoError(SpaceIoError::Kind::ChecksumMismatch, "space artifact checksum mismatch");
  }

  try {
    std::vector<Category> cats;
    for (const auto& jc : payload["categories"]) {
      Category c;
      c.id = json_id(jc.at("id"));
      c.canonical_name = jc.at("name").get<std::string>();
      c.oid_mid = json_optional_string(jc.at("oid_mid"));
      for (const auto& o : jc.at("origins")) {
        auto d = source_dataset_from_string(o.get<std::string>());
        if (!d) throw ParseError("unknown origin '" + o.get<std::string>() + "'");
        c.origins.insert(*d);
      }
      c.is_oid_nonleaf = jc.at("is_oid_nonleaf").get<bool>();
      c.coco_name = json_optional_string(jc.at("coco_name"));
      c.mvd_name = json_optional_string(jc.at("mvd_name"));
      cats.push_back(std::move(c));
    }
    std::set<Edge> edges;
    for (const auto& e : payload["hierarchy_edges"]) edges.emplace(json_id(e.at(0)), json_id(e.at(1)));
    std::map<CategoryId, CategoryId> equiv;
    for (const auto& e : payload["equivalences"]) equiv.emplace(json_id(e.at(0)), json_id(e.at(1)));
    std::map<CategoryId, CategorySet> cross;
    for (const auto& e : payload["cross_parents"]) {
      auto& targets = cross[json_id(e.at(0))];
      for (const auto& t : e.at(1)) targets.insert(json_id(t));
    }
    return UnifiedLabelSpace::from_parts(std::move(cats), std::move(edges), std::move(equiv),
                                         std::move(cross));
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("malformed space artifact: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

UnifiedLabelSpace build_space_from_directory(const std::filesystem::path& dir) {
  return build_unified_space(parse_mapping_csv(read_text_file(dir / "mapping.csv")),
                             parse_oid_hierarchy(read_text_file(dir / "hierarchy.json")),
                             parse_link_csv(read_text_file(dir / "equiv.csv")),
                             parse_link_csv(read_text_file(dir / "cross.csv")));
}

}  // namespace hierdet
