#include "hierdet/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "hierdet/ingest.hpp"

namespace hierdet {

const char* to_string(SourceDataset d) {
  switch (d) {
    case SourceDataset::COCO: return "COCO";
    case SourceDataset::MVD: return "MVD";
    case SourceDataset::OID: return "OID";
  }
  return "?";
}

std::optional<SourceDataset> source_dataset_from_string(const std::string& s) {
  if (s == "COCO") return SourceDataset::COCO;
  if (s == "MVD") return SourceDataset::MVD;
  if (s == "OID") return SourceDataset::OID;
  return std::nullopt;
}

UnifiedLabelSpace UnifiedLabelSpace::from_parts(std::vector<Category> categories,
                                                std::set<Edge> hierarchy_edges,
                                                std::map<CategoryId, CategoryId> equivalences,
                                                std::map<CategoryId, CategorySet> cross_parents) {
  UnifiedLabelSpace s;
  s.categories_ = std::move(categories);
  s.hierarchy_edges_ = std::move(hierarchy_edges);
  s.equivalences_ = std::move(equivalences);
  s.cross_parents_ = std::move(cross_parents);
  s.index();
  return s;
}

void UnifiedLabelSpace::index() {
  const std::size_t n = categories_.size();
  parents_.assign(n, {});
  children_.assign(n, {});
  ext_parents_.assign(n, {});
  ext_children_.assign(n, {});
  by_name_.clear();
  by_coco_name_.clear();
  by_mvd_name_.clear();

  for (std::size_t i = 0; i < n; ++i) {
    const Category& c = categories_[i];
    const CategoryId id{static_cast<std::uint32_t>(i)};
    by_name_.emplace(c.canonical_name, id);
    if (c.coco_name) by_coco_name_.emplace(*c.coco_name, id);
    if (c.mvd_name) by_mvd_name_.emplace(*c.mvd_name, id);
  }
  auto link = [n](Adjacency& up, Adjacency& down, CategoryId parent, CategoryId child) {
    if (parent.value >= n || child.value >= n) return;
    up[child.value].push_back(parent);
    down[parent.value].push_back(child);
  };
  for (const auto& [p, c] : hierarchy_edges_) {
    link(parents_, children_, p, c);
    link(ext_parents_, ext_children_, p, c);
  }
  for (const auto& [child, ps] : cross_parents_) {
    for (CategoryId p : ps) link(ext_parents_, ext_children_, p, child);
  }
}

void UnifiedLabelSpace::require(CategoryId id) const {
  if (!contains(id)) {
    throw TaxonomyError("unknown category id " + std::to_string(id.value));
  }
}

const Category& UnifiedLabelSpace::category(CategoryId id) const {
  require(id);
  return categories_[id.value];
}

std::optional<CategoryId> UnifiedLabelSpace::find(const std::string& canonical_name) const {
  auto it = by_name_.find(canonical_name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<CategoryId> UnifiedLabelSpace::resolve(const std::string& name,
                                                     std::optional<SourceDataset> dataset) const {
  if (auto id = find(name)) return id;
  if (!dataset) return std::nullopt;
  auto lookup = [&](const std::map<std::string, CategoryId>& m) -> std::optional<CategoryId> {
    auto it = m.find(name);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
  if (*dataset == SourceDataset::COCO) return lookup(by_coco_name_);
  if (*dataset == SourceDataset::MVD) return lookup(by_mvd_name_);
  return std::nullopt;
}

std::optional<CategoryId> UnifiedLabelSpace::equivalent(CategoryId id) const {
  require(id);
  auto it = equivalences_.find(id);
  if (it == equivalences_.end()) return std::nullopt;
  return it->second;
}

CategorySet UnifiedLabelSpace::cross_parents_of(CategoryId id) const {
  require(id);
  auto it = cross_parents_.find(id);
  if (it == cross_parents_.end()) return {};
  return it->second;
}

CategorySet UnifiedLabelSpace::closure(CategoryId start, const Adjacency& adj) const {
  require(start);
  CategorySet seen;
  std::deque<CategoryId> queue{start};
  while (!queue.empty()) {
    CategoryId cur = queue.front();
    queue.pop_front();
    for (CategoryId next : adj[cur.value]) {
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  seen.erase(start);
  return seen;
}

CategorySet UnifiedLabelSpace::ancestors(CategoryId id) const { return closure(id, parents_); }
CategorySet UnifiedLabelSpace::descendants(CategoryId id) const { return closure(id, children_); }
CategorySet UnifiedLabelSpace::extended_ancestors(CategoryId id) const {
  return closure(id, ext_parents_);
}
CategorySet UnifiedLabelSpace::extended_descendants(CategoryId id) const {
  return closure(id, ext_children_);
}

const std::vector<CategoryId>& UnifiedLabelSpace::parents(CategoryId id) const {
  require(id);
  return parents_[id.value];
}

const std::vector<CategoryId>& UnifiedLabelSpace::children(CategoryId id) const {
  require(id);
  return children_[id.value];
}

namespace {

struct OidNode {
  bool nonleaf = false;
};

// Collects MIDs and parent->child MID edges; the root itself is skipped.
void collect_hierarchy(const OidHierarchyTree& node, bool is_root,
                       std::map<std::string, OidNode>& nodes,
                       std::set<std::pair<std::string, std::string>>& edges) {
  if (!is_root) {
    auto& entry = nodes[node.label_name];
    entry.nonleaf = entry.nonleaf || !node.subcategories.empty();
  }
  for (const auto& child : node.subcategories) {
    if (!is_root) edges.emplace(node.label_name, child.label_name);
    collect_hierarchy(child, false, nodes, edges);
  }
}

std::string link_location(const char* table, std::size_t index) {
  // Data rows start on line 2, after the header.
  return std::string(table) + " line " + std::to_string(index + 2);
}

}  // namespace

UnifiedLabelSpace build_unified_space(const std::vector<MappingRow>& mapping_rows,
                                      const OidHierarchyTree& hierarchy,
                                      const std::vector<LinkRow>& equiv_rows,
                                      const std::vector<LinkRow>& cross_parent_rows) {
  std::map<std::string, OidNode> oid_nodes;
  std::set<std::pair<std::string, std::string>> mid_edges;
  collect_hierarchy(hierarchy, true, oid_nodes, mid_edges);
  if (oid_nodes.count(hierarchy.label_name)) {
    throw TaxonomyError("cycle detected: root " + hierarchy.label_name +
                        " appears below itself");
  }

  std::vector<Category> cats;
  std::map<std::string, std::size_t> name_index;
  std::map<std::string, std::size_t> mid_owner;
  std::set<std::string> coco_aliases, mvd_aliases;
  auto add = [&](Category c) {
    if (c.canonical_name.empty()) throw TaxonomyError("empty canonical name");
    if (!name_index.emplace(c.canonical_name, cats.size()).second) {
      throw TaxonomyError("duplicate canonical name '" + c.canonical_name + "'");
    }
    cats.push_back(std::move(c));
  };

  for (std::size_t i = 0; i < mapping_rows.size(); ++i) {
    const MappingRow& row = mapping_rows[i];
    if (!row.coco_name && !row.mvd_name && !row.oid_mid) {
      throw TaxonomyError("mapping row '" + row.unified_name + "' has no source");
    }
    if ((row.coco_name && !coco_aliases.insert(*row.coco_name).second) ||
        (row.mvd_name && !mvd_aliases.insert(*row.mvd_name).second)) {
      throw TaxonomyError("mapping row '" + row.unified_name +
                          "' reuses a COCO/MVD class already mapped by another row");
    }
    Category c;
    c.canonical_name = row.unified_name;
    c.coco_name = row.coco_name;
    c.mvd_name = row.mvd_name;
    if (row.coco_name) c.origins.insert(SourceDataset::COCO);
    if (row.mvd_name) c.origins.insert(SourceDataset::MVD);
    if (row.oid_mid) {
      auto it = oid_nodes.find(*row.oid_mid);
      if (it == oid_nodes.end()) {
        throw TaxonomyError("unresolved MID " + *row.oid_mid + " in mapping row '" +
                            row.unified_name + "'");
      }
      if (it->second.nonleaf && (row.coco_name || row.mvd_name)) {
        throw TaxonomyError("mapping row '" + row.unified_name +
                            "' merges a COCO/MVD class into OID superclass " + *row.oid_mid);
      }
      if (!mid_owner.emplace(*row.oid_mid, cats.size()).second) {
        throw TaxonomyError("MID " + *row.oid_mid + " claimed by more than one mapping row");
      }
      c.oid_mid = row.oid_mid;
      c.origins.insert(SourceDataset::OID);
      c.is_oid_nonleaf = it->second.nonleaf;
    }
    add(std::move(c));
  }
  for (const auto& [mid, node] : oid_nodes) {
    if (mid_owner.count(mid)) continue;
    Category c;
    c.canonical_name = mid;
    c.oid_mid = mid;
    c.origins = {SourceDataset::OID};
    c.is_oid_nonleaf = node.nonleaf;
    mid_owner.emplace(mid, cats.size());
    add(std::move(c));
  }

  // Ids follow canonical-name order.
  std::vector<std::size_t> order(cats.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cats[a].canonical_name < cats[b].canonical_name;
  });
  std::vector<CategoryId> id_of(cats.size());
  std::vector<Category> sorted;
  sorted.reserve(cats.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    id_of[order[rank]] = CategoryId{static_cast<std::uint32_t>(rank)};
    sorted.push_back(std::move(cats[order[rank]]));
    sorted.back().id = id_of[order[rank]];
  }
  auto mid_id = [&](const std::string& mid) { return id_of[mid_owner.at(mid)]; };

  std::set<Edge> edges;
  for (const auto& [p, c] : mid_edges) edges.emplace(mid_id(p), mid_id(c));

  auto resolve_source = [&](const LinkRow& row, const std::string& where) {
    if (row.source_dataset == SourceDataset::OID) {
      throw TaxonomyError(where + ": OID is not a valid link source");
    }
    for (const Category& c : sorted) {
      const auto& alias = row.source_dataset == SourceDataset::COCO ? c.coco_name : c.mvd_name;
      if (alias && *alias == row.source_name) return c.id;
    }
    throw TaxonomyError(where + ": link row references unknown category " +
                        to_string(row.source_dataset) + " '" + row.source_name + "'");
  };
  auto resolve_target = [&](const LinkRow& row, const std::string& where) {
    auto it = mid_owner.find(row.oid_mid);
    if (it == mid_owner.end()) throw TaxonomyError(where + ": unresolved MID " + row.oid_mid);
    CategoryId id = id_of[it->second];
    if (!sorted[id.value].is_oid_nonleaf) {
      throw TaxonomyError(where + ": link target " + row.oid_mid + " is not an OID superclass");
    }
    return id;
  };

  std::map<CategoryId, CategoryId> equivalences;
  for (std::size_t i = 0; i < equiv_rows.size(); ++i) {
    const std::string where = link_location("equivalence table", i);
    CategoryId src = resolve_source(equiv_rows[i], where);
    CategoryId dst = resolve_target(equiv_rows[i], where);
    if (src == dst) throw TaxonomyError(where + ": category is its own equivalent");
    auto [it, fresh] = equivalences.emplace(src, dst);
    if (!fresh && it->second != dst) {
      throw TaxonomyError(where + ": conflicting equivalence for '" +
                          sorted[src.value].canonical_name + "'");
    }
  }
  std::map<CategoryId, CategorySet> cross_parents;
  for (std::size_t i = 0; i < cross_parent_rows.size(); ++i) {
    const std::string where = link_location("cross-parent table", i);
    CategoryId src = resolve_source(cross_parent_rows[i], where);
    CategoryId dst = resolve_target(cross_parent_rows[i], where);
    if (src == dst) throw TaxonomyError(where + ": category is its own cross-parent");
    if (equivalences.count(src)) {
      throw TaxonomyError(where + ": '" + sorted[src.value].canonical_name +
                          "' appears in both the equivalence and cross-parent tables");
    }
    cross_parents[src].insert(dst);
  }

  auto space = UnifiedLabelSpace::from_parts(std::move(sorted), std::move(edges),
                                             std::move(equivalences), std::move(cross_parents));
  for (const Violation& v : validate(space).violations) {
    if (v.kind == ViolationKind::Cycle) throw TaxonomyError("cycle detected: " + v.message);
  }
  return space;
}

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::DuplicateName: return "duplicate_name";
    case ViolationKind::EmptyName: return "empty_name";
    case ViolationKind::EmptyOrigins: return "empty_origins";
    case ViolationKind::MidMismatch: return "mid_mismatch";
    case ViolationKind::IdNotDense: return "id_not_dense";
    case ViolationKind::EdgeOutOfRange: return "edge_out_of_range";
    case ViolationKind::EdgeOutsideOid: return "edge_outside_oid";
    case ViolationKind::SelfEquivalence: return "self_equivalence";
    case ViolationKind::EquivalenceTarget: return "equivalence_target";
    case ViolationKind::CrossParentTarget: return "cross_parent_target";
    case ViolationKind::LinkTablesOverlap: return "link_tables_overlap";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind k) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

namespace {

// Tarjan's strongly connected components; returns components that contain a
// cycle (size > 1, or a self-loop).
std::vector<std::vector<std::size_t>> cyclic_components(
    const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<long> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  long counter = 0;
  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
      if (comp.size() > 1 || self_loop) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) strongconnect(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ValidationReport validate(const UnifiedLabelSpace& space) {
  ValidationReport report;
  const auto& cats = space.categories();
  const std::size_t n = cats.size();
  auto add = [&](ViolationKind k, std::vector<CategoryId> ids, std::string msg) {
    report.violations.push_back({k, std::move(ids), std::move(msg)});
  };
  auto in_range = [n](CategoryId id) { return id.value < n; };
  auto label = [&](CategoryId id) {
    return in_range(id) ? "'" + cats[id.value].canonical_name + "'"
                        : "#" + std::to_string(id.value);
  };

  std::map<std::string, std::vector<CategoryId>> names;
  for (std::size_t i = 0; i < n; ++i) {
    const Category& c = cats[i];
    const CategoryId pos{static_cast<std::uint32_t>(i)};
    if (c.id != pos) {
      add(ViolationKind::IdNotDense, {pos},
          "category at position " + std::to_string(i) + " has id " + std::to_string(c.id.value));
    }
    if (c.canonical_name.empty()) add(ViolationKind::EmptyName, {pos}, "empty canonical name");
    names[c.canonical_name].push_back(pos);
    if (c.origins.empty()) add(ViolationKind::EmptyOrigins, {pos}, label(pos) + " has no origin");
    const bool oid_origin = c.origins.count(SourceDataset::OID) > 0;
    if (c.oid_mid.has_value() != oid_origin || (c.is_oid_nonleaf && !c.oid_mid)) {
      add(ViolationKind::MidMismatch, {pos},
          label(pos) + " has inconsistent MID / OID participation");
    }
  }
  for (const auto& [name, ids] : names) {
    if (ids.size() > 1) add(ViolationKind::DuplicateName, ids, "duplicate name '" + name + "'");
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [p, c] : space.hierarchy_edges()) {
    if (!in_range(p) || !in_range(c)) {
      add(ViolationKind::EdgeOutOfRange, {p, c}, "hierarchy edge references unknown id");
      continue;
    }
    if (!cats[p.value].oid_mid || !cats[c.value].oid_mid) {
      add(ViolationKind::EdgeOutsideOid, {p, c},
          "hierarchy edge " + label(p) + " -> " + label(c) + " touches a non-OID category");
    }
    adj[p.value].push_back(c.value);
  }

  for (const auto& [src, dst] : space.equivalences()) {
    if (!in_range(src) || !in_range(dst)) {
      add(ViolationKind::EdgeOutOfRange, {src, dst}, "equivalence references unknown id");
      continue;
    }
    if (src == dst) {
      add(ViolationKind::SelfEquivalence, {src}, label(src) + " is its own equivalent");
    } else if (!cats[dst.value].is_oid_nonleaf) {
      add(ViolationKind::EquivalenceTarget, {src, dst},
          "equivalence target " + label(dst) + " is not an OID superclass");
    }
  }
  for (const auto& [src, targets] : space.cross_parents()) {
    if (!in_range(src)) {
      add(ViolationKind::EdgeOutOfRange, {src}, "cross-parent source references unknown id");
      continue;
    }
    for (CategoryId dst : targets) {
      if (!in_range(dst)) {
        add(ViolationKind::EdgeOutOfRange, {src, dst}, "cross-parent references unknown id");
        continue;
      }
      if (dst == src || !cats[dst.value].is_oid_nonleaf) {
        add(ViolationKind::CrossParentTarget, {src, dst},
            "cross-parent target " + label(dst) + " is not an OID superclass");
      }
      adj[dst.value].push_back(src.value);
    }
    if (space.equivalences().count(src)) {
      add(ViolationKind::LinkTablesOverlap, {src},
          label(src) + " appears in both equivalences and cross_parents");
    }
  }

  for (const auto& comp : cyclic_components(adj)) {
    std::vector<CategoryId> ids;
    std::string msg = "cycle through";
    for (std::size_t v : comp) {
      ids.push_back(CategoryId{static_cast<std::uint32_t>(v)});
      msg += " " + label(ids.back());
    }
    add(ViolationKind::Cycle, std::move(ids), msg);
  }
  return report;
}

}  // namespace hierdet
