#include "hierdet/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hierdet {

const char* to_string(SoftNmsMode m) {
  switch (m) {
    case SoftNmsMode::Linear: return "linear";
    case SoftNmsMode::Gaussian: return "gaussian";
    case SoftNmsMode::Hard: return "hard";
  }
  return "?";
}

SoftNmsMode soft_nms_mode_from_string(std::string_view s) {
  if (s == "linear") return SoftNmsMode::Linear;
  if (s == "gaussian") return SoftNmsMode::Gaussian;
  if (s == "hard") return SoftNmsMode::Hard;
  throw std::invalid_argument("invalid Soft-NMS mode '" + std::string(s) + "'");
}

std::vector<Detection> soft_nms(std::span<const Detection> dets, const SoftNmsParams& params) {
  if (params.mode == SoftNmsMode::Gaussian && !(params.gaussian_sigma > 0)) {
    throw std::invalid_argument("Soft-NMS gaussian sigma must be positive");
  }
  std::map<std::pair<std::string, CategoryId>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!(dets[i].score >= 0.0 && dets[i].score <= 1.0)) {
      throw std::invalid_argument("detection score outside [0, 1]");
    }
    groups[{dets[i].image_id, dets[i].category}].push_back(i);
  }

  std::vector<Detection> out;
  for (const auto& [key, members] : groups) {
    struct Live {
      std::size_t index;
      double score;
    };
    std::vector<Live> live;
    for (std::size_t i : members) {
      if (dets[i].score >= params.score_threshold) live.push_back({i, dets[i].score});
    }
    while (!live.empty()) {
      auto best = live.begin();
      for (auto it = live.begin() + 1; it != live.end(); ++it) {
        if (it->score > best->score) best = it;  // strict: earlier input wins ties
      }
      const Live chosen = *best;
      live.erase(best);
      Detection kept = dets[chosen.index];
      kept.score = chosen.score;
      out.push_back(kept);

      std::vector<Live> next;
      for (Live l : live) {
        const double overlap = iou(kept.bbox, dets[l.index].bbox);
        switch (params.mode) {
          case SoftNmsMode::Linear:
            if (overlap > params.iou_threshold) l.score *= 1.0 - overlap;
            break;
          case SoftNmsMode::Gaussian:
            l.score *= std::exp(-(overlap * overlap) / params.gaussian_sigma);
            break;
          case SoftNmsMode::Hard:
            if (overlap > params.iou_threshold) continue;
            break;
        }
        if (l.score >= params.score_threshold) next.push_back(l);
      }
      live = std::move(next);
    }
  }
  return out;
}

double average_precision(const std::vector<bool>& ranked_tp, std::size_t npos,
                         ApInterpolation interp) {
  if (npos == 0) return 0.0;
  const std::size_t n = ranked_tp.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (ranked_tp[k]) ++tp;
    recall[k] = static_cast<double>(tp) / static_cast<double>(npos);
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  // Precision envelope: best precision at this recall or beyond.
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  if (interp == ApInterpolation::Exact) {
    double ap = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      ap += (recall[k] - prev) * precision[k];
      prev = recall[k];
    }
    return ap;
  }
  double sum = 0.0;
  for (int t = 0; t <= 100; ++t) {
    const double r = t / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

ApResult ap50(std::span<const Detection> dets, std::span<const GroundTruthBox> gts,
              bool hierarchical, const UnifiedLabelSpace& space, ApInterpolation interp) {
  // Ground truth per category, then per image.
  std::map<CategoryId, std::map<std::string, std::vector<Box>>> truth;
  std::map<CategoryId, std::size_t> npos;
  for (const GroundTruthBox& g : gts) {
    CategorySet labels{g.category};
    if (hierarchical) {
      CategorySet up = space.ancestors(g.category);
      labels.insert(up.begin(), up.end());
    }
    for (CategoryId c : labels) {
      truth[c][g.image_id].push_back(g.bbox);
      ++npos[c];
    }
  }

  std::map<CategoryId, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dets.size(); ++i) by_category[dets[i].category].push_back(i);

  ApResult result;
  for (const auto& [cat, count] : npos) {
    std::vector<std::size_t> order = by_category[cat];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    std::map<std::string, std::vector<bool>> used;
    std::vector<bool> ranked_tp;
    ranked_tp.reserve(order.size());
    for (std::size_t i : order) {
      const Detection& d = dets[i];
      bool hit = false;
      auto img = truth[cat].find(d.image_id);
      if (img != truth[cat].end()) {
        auto& taken = used[d.image_id];
        taken.resize(img->second.size(), false);
        double best_iou = -1.0;
        std::size_t best = 0;
        for (std::size_t j = 0; j < img->second.size(); ++j) {
          if (taken[j]) continue;
          const double o = iou(d.bbox, img->second[j]);
          if (o > best_iou) {
            best_iou = o;
            best = j;
          }
        }
        if (best_iou >= 0.5) {
          taken[best] = true;
          hit = true;
        }
      }
      ranked_tp.push_back(hit);
    }
    result.per_category[cat] = average_precision(ranked_tp, count, interp);
  }
  if (!result.per_category.empty()) {
    double sum = 0.0;
    for (const auto& [cat, ap] : result.per_category) sum += ap;
    result.mean_ap = sum / static_cast<double>(result.per_category.size());
  }
  return result;
}

}  // namespace hierdet
