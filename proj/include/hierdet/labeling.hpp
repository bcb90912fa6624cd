#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hierdet/taxonomy.hpp"

namespace hierdet {

enum class LabelStrategy {
  Baseline,
  NaiveSuppression,
  UnifiedHierarchy,
  OidHierarchy,
  OidHierarchyPlusHcls,
};

inline constexpr std::array<LabelStrategy, 5> kAllStrategies = {
    LabelStrategy::Baseline, LabelStrategy::NaiveSuppression, LabelStrategy::UnifiedHierarchy,
    LabelStrategy::OidHierarchy, LabelStrategy::OidHierarchyPlusHcls};

/// CLI spelling: baseline | naive | unified | oid | oid-hcls.
const char* to_string(LabelStrategy s);
std::optional<LabelStrategy> strategy_from_string(std::string_view s);

class LabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P(y): channels with target 1 for ground truth y. Always contains y.
CategorySet positive_set(const UnifiedLabelSpace& space, LabelStrategy strategy, CategoryId y);

/// D(y): channels whose classification loss is ignored for ground truth y.
/// Never intersects positive_set(); a channel that is positive is never
/// ignored.
CategorySet ignore_set(const UnifiedLabelSpace& space, LabelStrategy strategy, CategoryId y);

/// Per-annotation target and mask vectors over C = foreground + 1 channels.
/// The background channel is the last one.
struct SupervisionSpec {
  std::vector<std::uint8_t> targets;
  std::vector<std::uint8_t> mask;  // 1 = loss counted, 0 = ignored
  std::optional<CategoryId> y;     // nullopt = background

  std::size_t channels() const { return targets.size(); }
  bool is_background() const { return !y.has_value(); }
  friend bool operator==(const SupervisionSpec&, const SupervisionSpec&) = default;
};

inline constexpr std::optional<CategoryId> kBackground = std::nullopt;

SupervisionSpec make_supervision(const UnifiedLabelSpace& space, LabelStrategy strategy,
                                 std::optional<CategoryId> y, std::size_t channels);

/// Row-major N x C target and mask matrices.
struct SupervisionBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> targets;
  std::vector<std::uint8_t> mask;

  std::span<const std::uint8_t> target_row(std::size_t i) const {
    return {targets.data() + i * cols, cols};
  }
  std::span<const std::uint8_t> mask_row(std::size_t i) const {
    return {mask.data() + i * cols, cols};
  }
};

SupervisionBatch batch_masks(const UnifiedLabelSpace& space, LabelStrategy strategy,
                             std::span<const std::optional<CategoryId>> ys);

}  // namespace hierdet
