#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hierdet/geometry.hpp"
#include "hierdet/taxonomy.hpp"

namespace hierdet {

struct Detection {
  std::string image_id;
  Box bbox;
  double score = 0.0;
  CategoryId category;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthBox {
  std::string image_id;
  Box bbox;
  CategoryId category;
};

enum class SoftNmsMode { Linear, Gaussian, Hard };

const char* to_string(SoftNmsMode m);
/// Throws std::invalid_argument for anything but linear, gaussian or hard.
SoftNmsMode soft_nms_mode_from_string(std::string_view s);

struct SoftNmsParams {
  double iou_threshold = 0.6;
  double score_threshold = 0.001;
  SoftNmsMode mode = SoftNmsMode::Linear;
  double gaussian_sigma = 0.5;
};

/// Greedy Soft-NMS, independently per (image, category). The highest
/// remaining score is kept (ties: earlier input first); overlapping boxes
/// are decayed by (1 - IoU) when IoU > threshold (linear), by
/// exp(-IoU^2 / sigma) (gaussian), or removed (hard). Boxes falling below
/// the score threshold are dropped. Output groups are ordered by image id
/// then category; each group is in selection order.
std::vector<Detection> soft_nms(std::span<const Detection> dets, const SoftNmsParams& params = {});

enum class ApInterpolation { Points101, Exact };

/// Area under the interpolated precision-recall curve for a ranked list of
/// true/false positives against npos ground truths.
double average_precision(const std::vector<bool>& ranked_tp, std::size_t npos,
                         ApInterpolation interp = ApInterpolation::Points101);

struct ApResult {
  double mean_ap = 0.0;
  std::map<CategoryId, double> per_category;  // categories with ground truth
};

/// AP at IoU >= 0.5, averaged over categories that have ground truth.
/// Detections are ranked by score (ties: input order); each detection
/// matches the unmatched ground truth of its image and category with the
/// highest IoU (ties: lower index). With hierarchical set, every ground
/// truth also counts for each of its OID ancestors.
ApResult ap50(std::span<const Detection> dets, std::span<const GroundTruthBox> gts,
              bool hierarchical, const UnifiedLabelSpace& space,
              ApInterpolation interp = ApInterpolation::Points101);

}  // namespace hierdet
