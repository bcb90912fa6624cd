#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hierdet/ingest.hpp"

namespace hierdet {

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetStats {
  struct Dataset {
    std::string tag;
    std::size_t image_count = 0;
    /// Optional explicit ids; when empty, image i is named by its index.
    std::vector<std::string> image_ids;
    /// Category name -> indices of images containing it.
    std::map<std::string, std::vector<std::size_t>> category_images;

    std::string image_id(std::size_t i) const;
  };

  std::vector<Dataset> datasets;
};

using RepeatRatios = std::map<std::string, unsigned>;

/// "1:4:8" assigns OID:COCO:MVD; "TAG=N,TAG=N" names datasets explicitly.
RepeatRatios parse_ratios(std::string_view text);

/// Images per dataset after repetition: image_count * ratio.
std::map<std::string, std::uint64_t> epoch_composition(const DatasetStats& stats,
                                                       const RepeatRatios& ratios);

struct PlanEntry {
  std::string dataset_tag;
  std::string image_id;
  std::optional<std::string> drawn_for;  // category whose turn drew it

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct SamplePlan {
  std::vector<PlanEntry> entries;
  RepeatRatios repeat_ratios;
  std::vector<std::string> warnings;
};

/// One epoch of class-aware sampling over the ratio-expanded pool.
///
/// Categories (sorted by name) take turns; each turn draws uniformly one
/// remaining copy of an image containing that category. A category leaves
/// the rotation once its images are used up. Copies left after the rotation
/// (images without any category) are appended in seeded random order, so
/// every image appears exactly ratio times.
SamplePlan class_aware_schedule(const DatasetStats& stats, const RepeatRatios& ratios,
                                std::uint64_t seed);

DatasetStats stats_from_datasets(const std::vector<AnnotatedDataset>& datasets);

DatasetStats parse_dataset_stats(std::string_view json_text);
/// One {"dataset": str, "image_id": str} object per line.
std::string write_plan_jsonl(const SamplePlan& plan);

}  // namespace hierdet
