#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hierdet/ingest.hpp"
#include "hierdet/taxonomy.hpp"

namespace hierdet::test {

inline std::filesystem::path data_dir() { return HIERDET_DATA_DIR; }

const UnifiedLabelSpace& demo_space();
const UnifiedLabelSpace& rvc_space();

/// root -> fruit -> banana, root -> vehicle -> car, root -> person_super ->
/// person, with COCO person linked to person_super.
UnifiedLabelSpace six_category_fixture();

CategoryId id_of(const UnifiedLabelSpace& space, const std::string& name);
CategorySet ids_of(const UnifiedLabelSpace& space, const std::vector<std::string>& names);

/// Removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Inputs for build_unified_space drawn at random: an OID tree of
/// oid_nodes below the root, some leaves merged with COCO/MVD names, and
/// unmerged COCO/MVD rows linked to random superclasses through either
/// link table (never both).
struct RandomInputs {
  std::vector<MappingRow> mapping;
  OidHierarchyTree hierarchy;
  std::vector<LinkRow> equiv;
  std::vector<LinkRow> cross;
};

RandomInputs random_inputs(std::mt19937_64& rng, std::size_t oid_nodes, std::size_t unmerged);

}  // namespace hierdet::test
