#include "hierdet/labeling.hpp"

#include <algorithm>

namespace hierdet {

const char* to_string(LabelStrategy s) {
  switch (s) {
    case LabelStrategy::Baseline: return "baseline";
    case LabelStrategy::NaiveSuppression: return "naive";
    case LabelStrategy::UnifiedHierarchy: return "unified";
    case LabelStrategy::OidHierarchy: return "oid";
    case LabelStrategy::OidHierarchyPlusHcls: return "oid-hcls";
  }
  return "?";
}

std::optional<LabelStrategy> strategy_from_string(std::string_view s) {
  for (LabelStrategy strategy : kAllStrategies) {
    if (s == to_string(strategy)) return strategy;
  }
  return std::nullopt;
}

namespace {

void require_foreground(const UnifiedLabelSpace& space, CategoryId y) {
  if (!space.contains(y)) throw LabelError("unknown category id " + std::to_string(y.value));
}

void merge(CategorySet& into, const CategorySet& from) { into.insert(from.begin(), from.end()); }

// The extra HCLS rules only cover COCO/MVD categories that were not merged
// into an OID node.
bool hcls_applies(const UnifiedLabelSpace& space, CategoryId y) {
  return !space.category(y).participates_in_oid();
}

CategorySet raw_ignore_set(const UnifiedLabelSpace& space, LabelStrategy strategy, CategoryId y) {
  CategorySet d;
  switch (strategy) {
    case LabelStrategy::Baseline:
      break;
    case LabelStrategy::NaiveSuppression:
      d = space.ancestors(y);
      merge(d, space.descendants(y));
      break;
    case LabelStrategy::UnifiedHierarchy:
      d = space.extended_descendants(y);
      if (auto eq = space.equivalent(y)) merge(d, space.extended_descendants(*eq));
      break;
    case LabelStrategy::OidHierarchy:
      d = space.descendants(y);
      break;
    case LabelStrategy::OidHierarchyPlusHcls:
      d = space.descendants(y);
      if (!hcls_applies(space, y)) break;
      if (auto eq = space.equivalent(y)) {
        // (a) label duplication: the equivalent and its relatives.
        d.insert(*eq);
        merge(d, space.ancestors(*eq));
        merge(d, space.descendants(*eq));
      } else {
        // (b) cross-dataset hierarchy: the matched superclasses and their
        // ancestors. (c) leaves d untouched when there are no links.
        for (CategoryId p : space.cross_parents_of(y)) {
          d.insert(p);
          merge(d, space.ancestors(p));
        }
      }
      break;
  }
  return d;
}

}  // namespace

CategorySet positive_set(const UnifiedLabelSpace& space, LabelStrategy strategy, CategoryId y) {
  require_foreground(space, y);
  CategorySet p{y};
  switch (strategy) {
    case LabelStrategy::Baseline:
    case LabelStrategy::NaiveSuppression:
      break;
    case LabelStrategy::OidHierarchy:
    case LabelStrategy::OidHierarchyPlusHcls:
      merge(p, space.ancestors(y));
      break;
    case LabelStrategy::UnifiedHierarchy:
      merge(p, space.extended_ancestors(y));
      if (auto eq = space.equivalent(y)) {
        p.insert(*eq);
        merge(p, space.extended_ancestors(*eq));
      }
      break;
  }
  return p;
}

CategorySet ignore_set(const UnifiedLabelSpace& space, LabelStrategy strategy, CategoryId y) {
  require_foreground(space, y);
  CategorySet d = raw_ignore_set(space, strategy, y);
  for (CategoryId c : positive_set(space, strategy, y)) d.erase(c);
  return d;
}

SupervisionSpec make_supervision(const UnifiedLabelSpace& space, LabelStrategy strategy,
                                 std::optional<CategoryId> y, std::size_t channels) {
  if (channels != space.channel_count()) {
    throw LabelError("channel count " + std::to_string(channels) + " does not match space (" +
                     std::to_string(space.channel_count()) + " including background)");
  }
  SupervisionSpec spec;
  spec.y = y;
  spec.targets.assign(channels, 0);
  spec.mask.assign(channels, 1);
  if (!y) {
    spec.targets[space.background_channel()] = 1;
    return spec;
  }
  for (CategoryId c : positive_set(space, strategy, *y)) spec.targets[c.value] = 1;
  for (CategoryId c : ignore_set(space, strategy, *y)) spec.mask[c.value] = 0;
  return spec;
}

SupervisionBatch batch_masks(const UnifiedLabelSpace& space, LabelStrategy strategy,
                             std::span<const std::optional<CategoryId>> ys) {
  SupervisionBatch batch;
  batch.rows = ys.size();
  batch.cols = space.channel_count();
  batch.targets.reserve(batch.rows * batch.cols);
  batch.mask.reserve(batch.rows * batch.cols);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    SupervisionSpec spec;
    try {
      spec = make_supervision(space, strategy, ys[i], batch.cols);
    } catch (const std::exception& e) {
      throw LabelError("row " + std::to_string(i) + ": " + e.what());
    }
    batch.targets.insert(batch.targets.end(), spec.targets.begin(), spec.targets.end());
    batch.mask.insert(batch.mask.end(), spec.mask.begin(), spec.mask.end());
  }
  return batch;
}

}  // namespace hierdet
