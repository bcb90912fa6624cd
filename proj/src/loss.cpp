#include "hierdet/loss.hpp"

#include <cmath>
#include <string>

namespace hierdet {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw LossError(std::string("non-finite ") + what);
}

void require_target(std::uint8_t t) {
  if (t > 1) throw LossError("BCE target must be 0 or 1");
}

void check_logits(std::span<const double> logits, const SupervisionSpec& spec) {
  if (logits.size() != spec.channels() || spec.mask.size() != spec.channels()) {
    throw LossError("dimension mismatch: " + std::to_string(logits.size()) + " logits for " +
                    std::to_string(spec.channels()) + " supervision channels");
  }
}

void check_stages(std::size_t have, int want, const char* what, std::size_t sample) {
  if (have != static_cast<std::size_t>(want)) {
    throw LossError(std::string(what) + " sample " + std::to_string(sample) + " has " +
                    std::to_string(have) + " stages, expected " + std::to_string(want));
  }
}

}  // namespace

void LossWeights::check() const {
  if (!(lambda > 0 && alpha > 0 && beta > 0 && gamma > 0 && smooth_l1_beta > 0)) {
    throw LossError("loss weights must be positive");
  }
  if (s_rpn < 1 || s_head < 1) throw LossError("stage counts must be at least 1");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce(double logit, std::uint8_t target) {
  require_finite(logit, "logit");
  require_target(target);
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

double bce_grad(double logit, std::uint8_t target) {
  require_finite(logit, "logit");
  require_target(target);
  return sigmoid(logit) - target;
}

double smooth_l1(double pred, double gt, double beta) {
  require_finite(pred, "prediction");
  require_finite(gt, "ground truth");
  if (!(beta > 0)) throw LossError("smooth_l1 beta must be positive");
  const double d = std::abs(pred - gt);
  return d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
}

double smooth_l1_grad(double pred, double gt, double beta) {
  require_finite(pred, "prediction");
  require_finite(gt, "ground truth");
  if (!(beta > 0)) throw LossError("smooth_l1 beta must be positive");
  const double r = pred - gt;
  if (std::abs(r) < beta) return r / beta;
  return r > 0 ? 1.0 : -1.0;
}

double cls_loss(std::span<const double> logits, const SupervisionSpec& spec, double gamma) {
  check_logits(logits, spec);
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (spec.mask[c] == 0) continue;
    sum += bce(logits[c], spec.targets[c]);
  }
  return gamma / static_cast<double>(logits.size()) * sum;
}

std::vector<double> cls_loss_grad(std::span<const double> logits, const SupervisionSpec& spec,
                                  double gamma) {
  check_logits(logits, spec);
  const double scale = gamma / static_cast<double>(logits.size());
  std::vector<double> g(logits.size(), 0.0);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (spec.mask[c] == 0) continue;
    g[c] = scale * bce_grad(logits[c], spec.targets[c]);
  }
  return g;
}

RpnBreakdown rpn_loss(std::span<const RpnSample> samples, const LossWeights& weights) {
  weights.check();
  RpnBreakdown out;
  out.stage_iou.assign(weights.s_rpn, 0.0);
  out.stage_cls.assign(weights.s_rpn, 0.0);
  if (samples.empty()) return out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RpnSample& s = samples[i];
    check_stages(s.stages.size(), weights.s_rpn, "RPN", i);
    for (std::size_t k = 0; k < s.stages.size(); ++k) {
      if (s.positive) {
        out.stage_iou[k] += weights.alpha * (1.0 - iou(s.stages[k].proposal, s.gt_box));
      }
      out.stage_cls[k] += bce(s.stages[k].objectness_logit, s.positive ? 1 : 0);
    }
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < out.stage_iou.size(); ++k) {
    out.stage_iou[k] /= n;
    out.stage_cls[k] /= n;
    out.iou_term += out.stage_iou[k];
    out.cls_term += out.stage_cls[k];
  }
  out.rpn = out.iou_term + out.cls_term;
  return out;
}

HeadBreakdown head_loss(std::span<const HeadSample> samples, const LossWeights& weights) {
  weights.check();
  HeadBreakdown out;
  out.stage_reg.assign(weights.s_head, 0.0);
  out.stage_cls.assign(weights.s_head, 0.0);
  if (samples.empty()) return out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const HeadSample& s = samples[i];
    check_stages(s.stages.size(), weights.s_head, "head", i);
    for (std::size_t k = 0; k < s.stages.size(); ++k) {
      const HeadStage& st = s.stages[k];
      if (!s.supervision.is_background()) {
        double reg = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
          reg += smooth_l1(st.deltas[j], s.gt_deltas[j], weights.smooth_l1_beta);
        }
        out.stage_reg[k] += weights.beta * reg;
      }
      out.stage_cls[k] += cls_loss(st.logits, s.supervision, weights.gamma);
    }
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < out.stage_reg.size(); ++k) {
    out.stage_reg[k] /= n;
    out.stage_cls[k] /= n;
    out.reg_term += out.stage_reg[k];
    out.cls_term += out.stage_cls[k];
  }
  out.head = out.reg_term + out.cls_term;
  return out;
}

double total_loss(double rpn, double head, const LossWeights& weights) {
  return weights.lambda * rpn + head;
}

LossBreakdown evaluate_loss(std::span<const RpnSample> rpn_samples,
                            std::span<const HeadSample> head_samples, const LossWeights& weights) {
  LossBreakdown out;
  out.rpn = rpn_loss(rpn_samples, weights);
  out.head = head_loss(head_samples, weights);
  out.total = total_loss(out.rpn.rpn, out.head.head, weights);
  return out;
}

std::vector<std::vector<HeadStageGrad>> head_loss_grad(std::span<const HeadSample> samples,
                                                       const LossWeights& weights) {
  weights.check();
  std::vector<std::vector<HeadStageGrad>> out;
  const double inv_n = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const HeadSample& s = samples[i];
    check_stages(s.stages.size(), weights.s_head, "head", i);
    auto& per_stage = out.emplace_back();
    for (const HeadStage& st : s.stages) {
      HeadStageGrad g;
      if (!s.supervision.is_background()) {
        for (std::size_t j = 0; j < 4; ++j) {
          g.deltas[j] = inv_n * weights.beta *
                        smooth_l1_grad(st.deltas[j], s.gt_deltas[j], weights.smooth_l1_beta);
        }
      }
      g.logits = cls_loss_grad(st.logits, s.supervision, weights.gamma);
      for (double& v : g.logits) v *= inv_n;
      per_stage.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace hierdet
