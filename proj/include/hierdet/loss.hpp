#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hierdet/geometry.hpp"
#include "hierdet/labeling.hpp"

namespace hierdet {

class LossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss-term weights and cascade depths.
struct LossWeights {
  double lambda = 0.7;          // RPN weight in the total loss
  double alpha = 10.0;          // RPN IoU term
  double beta = 1.0;            // head regression term
  double gamma = 1.5;           // head classification term, divided by C
  int s_rpn = 2;                // cascade RPN stages
  int s_head = 3;               // cascade head stages
  double smooth_l1_beta = 1.0;  // quadratic-to-linear transition of SmoothL1

  /// Throws LossError unless all weights are positive and stages >= 1.
  void check() const;
};

double sigmoid(double x);

/// Binary cross entropy on a logit, max(x,0) - x*t + log1p(exp(-|x|)).
double bce(double logit, std::uint8_t target);
/// d bce / d logit = sigmoid(logit) - target.
double bce_grad(double logit, std::uint8_t target);

double smooth_l1(double pred, double gt, double beta);
/// d smooth_l1 / d pred. At |pred - gt| == beta both branches agree.
double smooth_l1_grad(double pred, double gt, double beta);

/// (gamma / C) * sum_c mask[c] * bce(logits[c], targets[c]), C = logits.size().
double cls_loss(std::span<const double> logits, const SupervisionSpec& spec, double gamma);
/// Gradient of cls_loss with respect to the logits; exactly zero on masked
/// channels.
std::vector<double> cls_loss_grad(std::span<const double> logits, const SupervisionSpec& spec,
                                  double gamma);

struct RpnStage {
  Box proposal;
  double objectness_logit = 0.0;
};

struct RpnSample {
  std::vector<RpnStage> stages;
  Box gt_box;
  bool positive = true;  // IoU term only applies to positive anchors
};

struct HeadStage {
  std::array<double, 4> deltas{};
  std::vector<double> logits;
};

struct HeadSample {
  std::vector<HeadStage> stages;
  std::array<double, 4> gt_deltas{};
  SupervisionSpec supervision;  // background samples skip regression
};

struct RpnBreakdown {
  double rpn = 0.0;
  double iou_term = 0.0;
  double cls_term = 0.0;
  std::vector<double> stage_iou;
  std::vector<double> stage_cls;
};

struct HeadBreakdown {
  double head = 0.0;
  double reg_term = 0.0;
  double cls_term = 0.0;
  std::vector<double> stage_reg;
  std::vector<double> stage_cls;
};

struct LossBreakdown {
  double total = 0.0;
  RpnBreakdown rpn;
  HeadBreakdown head;
};

/// (1/N) sum_i sum_s [alpha * (1 - IoU(p_s, gt)) + bce(q_s, positive)].
RpnBreakdown rpn_loss(std::span<const RpnSample> samples, const LossWeights& weights);

/// (1/N) sum_i sum_s [beta * sum_k SmoothL1(r_s[k], gt[k]) + cls_loss(x_s)].
HeadBreakdown head_loss(std::span<const HeadSample> samples, const LossWeights& weights);

/// lambda * rpn + head.
double total_loss(double rpn, double head, const LossWeights& weights);

LossBreakdown evaluate_loss(std::span<const RpnSample> rpn_samples,
                            std::span<const HeadSample> head_samples, const LossWeights& weights);

struct HeadStageGrad {
  std::array<double, 4> deltas{};
  std::vector<double> logits;
};

/// d head_loss / d (deltas, logits) for every sample and stage.
std::vector<std::vector<HeadStageGrad>> head_loss_grad(std::span<const HeadSample> samples,
                                                       const LossWeights& weights);

}  // namespace hierdet
