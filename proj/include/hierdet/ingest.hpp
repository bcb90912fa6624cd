#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hierdet/geometry.hpp"
#include "hierdet/taxonomy.hpp"

namespace hierdet {

/// Parse failure pointing at the offending input location. Line and field
/// are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t field = 0);

  std::size_t line() const { return line_; }
  std::size_t field() const { return field_; }

 private:
  std::size_t line_;
  std::size_t field_;
};

struct MappingRow {
  std::string unified_name;
  std::optional<std::string> coco_name;
  std::optional<std::string> mvd_name;
  std::optional<std::string> oid_mid;

  friend bool operator==(const MappingRow&, const MappingRow&) = default;
};

struct LinkRow {
  SourceDataset source_dataset = SourceDataset::COCO;
  std::string source_name;
  std::string oid_mid;

  friend bool operator==(const LinkRow&, const LinkRow&) = default;
};

struct OidHierarchyTree {
  std::string label_name;
  std::vector<OidHierarchyTree> subcategories;

  std::size_t node_count() const;
  friend bool operator==(const OidHierarchyTree&, const OidHierarchyTree&) = default;
};

struct AnnotatedBox {
  Box bbox;
  std::string category_name;

  friend bool operator==(const AnnotatedBox&, const AnnotatedBox&) = default;
};

struct AnnotatedImage {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<AnnotatedBox> boxes;

  friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

struct AnnotatedDataset {
  std::string dataset_tag;  // COCO, MVD, OID or SYNTH-*
  std::vector<AnnotatedImage> images;

  std::size_t box_count() const;
  friend bool operator==(const AnnotatedDataset&, const AnnotatedDataset&) = default;
};

bool is_valid_mid(std::string_view mid);
bool is_valid_dataset_tag(std::string_view tag);

// Mapping CSV: header `unified_name,coco_name,mvd_name,oid_mid`. No quoting;
// empty cells are absent fields. CRLF and LF line endings are accepted.
std::vector<MappingRow> parse_mapping_csv(std::string_view text);
std::string write_mapping_csv(const std::vector<MappingRow>& rows);

// Link CSV: header `source_dataset,source_name,oid_mid`.
std::vector<LinkRow> parse_link_csv(std::string_view text);
std::string write_link_csv(const std::vector<LinkRow>& rows);

// OID hierarchy JSON: {"LabelName": str, "Subcategory": [...]} recursively.
inline constexpr std::size_t kMaxHierarchyDepth = 64;
OidHierarchyTree parse_oid_hierarchy(std::string_view text);
std::string write_oid_hierarchy(const OidHierarchyTree& tree);

AnnotatedDataset load_annotations(std::string_view text);
std::string write_annotations(const AnnotatedDataset& dataset);

class SpaceIoError : public std::runtime_error {
 public:
  enum class Kind { VersionMismatch, ChecksumMismatch };

  SpaceIoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr int kSpaceFormatVersion = 1;

/// Versioned JSON artifact with a SHA-256 checksum over the canonical
/// payload. A truncated or otherwise unreadable stream is reported as a
/// checksum mismatch.
std::string serialize_space(const UnifiedLabelSpace& space);
UnifiedLabelSpace deserialize_space(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Reads mapping.csv, hierarchy.json, equiv.csv and cross.csv from a
/// directory and builds the space.
UnifiedLabelSpace build_space_from_directory(const std::filesystem::path& dir);

}  // namespace hierdet
