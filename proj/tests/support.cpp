#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

namespace hierdet::test {

const UnifiedLabelSpace& demo_space() {
  static const UnifiedLabelSpace space = build_space_from_directory(data_dir() / "demo");
  return space;
}

const UnifiedLabelSpace& rvc_space() {
  static const UnifiedLabelSpace space = build_space_from_directory(data_dir() / "rvc540");
  return space;
}

UnifiedLabelSpace six_category_fixture() {
  auto oid_row = [](std::string name, std::string mid) { return MappingRow{std::move(name), {}, {}, std::move(mid)}; };
  std::vector<MappingRow> rows = {
      {"banana", "banana", {}, "/m/09qck"}, {"car", "car", {}, "/m/0k4j"},
      {"person", "person", {}, "/m/person"}, oid_row("fruit", "/m/02xwb"),
      oid_row("vehicle", "/m/07yv9"),       oid_row("person_super", "/m/01g317"),
  };
  OidHierarchyTree tree{"/m/0bl9f",
                        {{"/m/02xwb", {{"/m/09qck", {}}}},
                         {"/m/07yv9", {{"/m/0k4j", {}}}},
                         {"/m/01g317", {{"/m/person", {}}}}}};
  return build_unified_space(rows, tree, {{SourceDataset::COCO, "person", "/m/01g317"}}, {});
}

CategoryId id_of(const UnifiedLabelSpace& space, const std::string& name) {
  auto id = space.find(name);
  if (!id) throw std::runtime_error("fixture has no category '" + name + "'");
  return *id;
}

CategorySet ids_of(const UnifiedLabelSpace& space, const std::vector<std::string>& names) {
  CategorySet out;
  for (const auto& n : names) out.insert(id_of(space, n));
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("hierdet-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

RandomInputs random_inputs(std::mt19937_64& rng, std::size_t oid_nodes, std::size_t unmerged) {
  RandomInputs in;
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  // Node k attaches to a random earlier node (0 = root), giving a tree.
  std::vector<std::size_t> parent(oid_nodes + 1, 0);
  std::vector<std::vector<std::size_t>> kids(oid_nodes + 1);
  for (std::size_t k = 1; k <= oid_nodes; ++k) {
    parent[k] = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    kids[parent[k]].push_back(k);
  }
  auto mid = [](std::size_t k) { return "/m/r" + std::to_string(k); };
  auto build = [&](auto&& self, std::size_t k) -> OidHierarchyTree {
    OidHierarchyTree t{k == 0 ? "/m/root" : mid(k), {}};
    for (std::size_t c : kids[k]) t.subcategories.push_back(self(self, c));
    return t;
  };
  in.hierarchy = build(build, 0);

  std::vector<std::size_t> superclasses;
  for (std::size_t k = 1; k <= oid_nodes; ++k) {
    const bool leaf = kids[k].empty();
    if (!leaf) superclasses.push_back(k);
    // Some nodes stay unnamed and are named by their MID.
    if (coin(0.2)) continue;
    MappingRow row{"oid node " + std::to_string(k), {}, {}, mid(k)};
    if (leaf && coin(0.4)) row.coco_name = "coco leaf " + std::to_string(k);
    if (leaf && coin(0.3)) row.mvd_name = "mvd leaf " + std::to_string(k);
    in.mapping.push_back(row);
  }
  for (std::size_t u = 0; u < unmerged; ++u) {
    const bool coco = coin(0.5);
    const std::string source = (coco ? "coco only " : "mvd only ") + std::to_string(u);
    MappingRow row{"unmerged " + std::to_string(u), {}, {}, {}};
    (coco ? row.coco_name : row.mvd_name) = source;
    in.mapping.push_back(row);
    if (superclasses.empty()) continue;
    const SourceDataset ds = coco ? SourceDataset::COCO : SourceDataset::MVD;
    auto pick = [&] {
      return superclasses[std::uniform_int_distribution<std::size_t>(0, superclasses.size() - 1)(rng)];
    };
    const double r = std::uniform_real_distribution<double>(0, 1)(rng);
    if (r < 0.35) {
      in.equiv.push_back({ds, source, mid(pick())});
    } else if (r < 0.7) {
      std::size_t a = pick(), b = pick();
      in.cross.push_back({ds, source, mid(a)});
      if (b != a && coin(0.3)) in.cross.push_back({ds, source, mid(b)});
    }
  }
  std::shuffle(in.mapping.begin(), in.mapping.end(), rng);
  return in;
}

}  // namespace hierdet::test
