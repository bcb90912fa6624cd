#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hierdet {

struct MappingRow;
struct LinkRow;
struct OidHierarchyTree;

/// Dense index of a foreground category in a unified label space.
struct CategoryId {
  std::uint32_t value = 0;

  friend auto operator<=>(const CategoryId&, const CategoryId&) = default;
};

using CategorySet = std::set<CategoryId>;

enum class SourceDataset { COCO, MVD, OID };

const char* to_string(SourceDataset d);
std::optional<SourceDataset> source_dataset_from_string(const std::string& s);

struct Category {
  CategoryId id;
  std::string canonical_name;
  std::optional<std::string> oid_mid;
  std::set<SourceDataset> origins;
  bool is_oid_nonleaf = false;
  // Dataset-specific names merged into this category, used to resolve link
  // rows and annotations.
  std::optional<std::string> coco_name;
  std::optional<std::string> mvd_name;

  bool participates_in_oid() const { return oid_mid.has_value(); }
  friend bool operator==(const Category&, const Category&) = default;
};

using Edge = std::pair<CategoryId, CategoryId>;  // (parent, child)

class TaxonomyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable category DAG merging the COCO, MVD and OID label sets.
///
/// hierarchy_edges carry the OID semantic hierarchy (root removed).
/// equivalences link an unmerged COCO/MVD category to the OID superclass it
/// duplicates; cross_parents link it to the OID superclasses it semantically
/// belongs to. The extended graph is hierarchy_edges plus one edge
/// (superclass -> category) per cross-parent link.
class UnifiedLabelSpace {
 public:
  UnifiedLabelSpace() = default;

  /// Assembles a space without checking invariants; use validate() on the
  /// result when the parts do not come from build_unified_space().
  static UnifiedLabelSpace from_parts(std::vector<Category> categories,
                                      std::set<Edge> hierarchy_edges,
                                      std::map<CategoryId, CategoryId> equivalences,
                                      std::map<CategoryId, CategorySet> cross_parents);

  std::size_t size() const { return categories_.size(); }
  /// Number of classifier channels: foreground categories plus background.
  std::size_t channel_count() const { return categories_.size() + 1; }
  std::size_t background_channel() const { return categories_.size(); }

  const std::vector<Category>& categories() const { return categories_; }
  const Category& category(CategoryId id) const;
  const std::set<Edge>& hierarchy_edges() const { return hierarchy_edges_; }
  const std::map<CategoryId, CategoryId>& equivalences() const { return equivalences_; }
  const std::map<CategoryId, CategorySet>& cross_parents() const { return cross_parents_; }

  bool contains(CategoryId id) const { return id.value < categories_.size(); }
  std::optional<CategoryId> find(const std::string& canonical_name) const;
  /// Resolves a canonical name, or a dataset-specific alias when a dataset
  /// is given.
  std::optional<CategoryId> resolve(const std::string& name,
                                    std::optional<SourceDataset> dataset = std::nullopt) const;
  const std::string& name(CategoryId id) const { return category(id).canonical_name; }

  std::optional<CategoryId> equivalent(CategoryId id) const;
  CategorySet cross_parents_of(CategoryId id) const;

  /// Transitive closure over hierarchy_edges, excluding id.
  CategorySet ancestors(CategoryId id) const;
  CategorySet descendants(CategoryId id) const;
  /// Transitive closure over the extended graph, excluding id.
  CategorySet extended_ancestors(CategoryId id) const;
  CategorySet extended_descendants(CategoryId id) const;

  const std::vector<CategoryId>& parents(CategoryId id) const;
  const std::vector<CategoryId>& children(CategoryId id) const;

  friend bool operator==(const UnifiedLabelSpace& a, const UnifiedLabelSpace& b) {
    return a.categories_ == b.categories_ && a.hierarchy_edges_ == b.hierarchy_edges_ &&
           a.equivalences_ == b.equivalences_ && a.cross_parents_ == b.cross_parents_;
  }

 private:
  using Adjacency = std::vector<std::vector<CategoryId>>;

  void index();
  CategorySet closure(CategoryId start, const Adjacency& adj) const;
  void require(CategoryId id) const;

  std::vector<Category> categories_;
  std::set<Edge> hierarchy_edges_;
  std::map<CategoryId, CategoryId> equivalences_;
  std::map<CategoryId, CategorySet> cross_parents_;

  Adjacency parents_, children_, ext_parents_, ext_children_;
  std::map<std::string, CategoryId> by_name_;
  std::map<std::string, CategoryId> by_coco_name_;
  std::map<std::string, CategoryId> by_mvd_name_;
};

/// Builds the unified space from the mapping table, the OID hierarchy and
/// the two link tables.
///
/// Every mapping row becomes one category. A row carrying an OID MID merges
/// with that OID node; rows whose only source is an OID superclass MID give
/// that superclass its name. OID nodes not named by any row are named by
/// their MID. The hierarchy root is dropped. Ids follow canonical-name order.
UnifiedLabelSpace build_unified_space(const std::vector<MappingRow>& mapping_rows,
                                      const OidHierarchyTree& hierarchy,
                                      const std::vector<LinkRow>& equiv_rows,
                                      const std::vector<LinkRow>& cross_parent_rows);

enum class ViolationKind {
  Cycle,
  DuplicateName,
  EmptyName,
  EmptyOrigins,
  MidMismatch,
  IdNotDense,
  EdgeOutOfRange,
  EdgeOutsideOid,
  SelfEquivalence,
  EquivalenceTarget,
  CrossParentTarget,
  LinkTablesOverlap,
};

const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::vector<CategoryId> categories;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const;
};

ValidationReport validate(const UnifiedLabelSpace& space);

}  // namespace hierdet

template <>
struct std::hash<hierdet::CategoryId> {
  std::size_t operator()(hierdet::CategoryId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
