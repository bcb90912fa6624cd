#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hierdet/ingest.hpp"
#include "hierdet/labeling.hpp"
#include "hierdet/postprocess.hpp"
#include "hierdet/taxonomy.hpp"

namespace hierdet {

/// One annotated label of a synthetic domain. Its features are drawn from
/// the listed prototype clusters (uniformly); an empty mixture means the
/// prototype named after the category.
struct SyntheticLabel {
  std::string category;
  std::vector<std::string> mixture;
};

struct SyntheticDomain {
  std::string tag;  // SYNTH-*
  std::vector<SyntheticLabel> labels;
  std::size_t train_images_per_category = 20;
  std::size_t test_images_per_category = 10;
  double noise = 1.0;
  bool hierarchical_eval = false;
};

struct TrainSettings {
  std::size_t epochs = 200;
  double lr = 0.1;
};

struct SyntheticConfig {
  std::uint64_t seed = 0;
  std::size_t feature_dim = 16;
  double separation = 4.0;  // norm of every prototype mean
  std::string fixture;      // label-space input directory, as written in the config
  std::filesystem::path fixture_dir;  // fixture resolved against the config's directory
  std::vector<SyntheticDomain> domains;
  TrainSettings train;
  SoftNmsParams nms;
};

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the JSON config; relative fixture paths resolve against base_dir.
SyntheticConfig parse_synthetic_config(std::string_view json_text,
                                       const std::filesystem::path& base_dir = {});
std::string synthetic_config_json(const SyntheticConfig& config);

enum class Split { Train, Test };

/// One box per image; feature row i belongs to the i-th image's box.
struct DomainData {
  AnnotatedDataset dataset;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // row-major, one row per image
  std::vector<CategoryId> labels;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
};

std::vector<DomainData> generate_synthetic(const SyntheticConfig& config,
                                           const UnifiedLabelSpace& space,
                                           Split split = Split::Train);

/// Linear multi-label scorer: logits = W x + b over all C channels.
struct ToyModel {
  std::size_t channels = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // channels x dim, row-major
  std::vector<double> bias;

  std::vector<double> logits(std::span<const double> x) const;
  friend bool operator==(const ToyModel&, const ToyModel&) = default;
};

struct TrainingLog {
  std::vector<double> loss;  // before each update, then after the last one
  double stability_bound = 0.0;
  std::vector<std::size_t> positive_counts;  // per foreground category
  std::size_t total_positive_entries = 0;
};

struct TrainResult {
  ToyModel model;
  TrainingLog log;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Initial weights with the seeded generator, before any update.
ToyModel init_toy(const UnifiedLabelSpace& space, std::size_t dim, std::uint64_t seed);

/// Full-batch gradient descent on the mean classification loss. lr below
/// log.stability_bound (2 / Lipschitz constant of the gradient) gives a
/// non-increasing loss trajectory.
TrainResult train_toy(LabelStrategy strategy, const std::vector<DomainData>& data,
                      const UnifiedLabelSpace& space, std::size_t epochs, double lr,
                      std::uint64_t seed, double gamma = 1.5);

struct MaskedPairAudit {
  CategoryId gt;
  CategoryId channel;
  std::size_t samples = 0;
  double max_abs_loss_delta = 0.0;  // loss change when the channel's logit moves
  double max_abs_gradient = 0.0;
};

struct DomainEvaluation {
  std::string tag;
  bool hierarchical = false;
  ApResult ap;
};

struct StrategyRun {
  LabelStrategy strategy;
  TrainResult training;
  std::vector<DomainEvaluation> evaluation;
  std::vector<MaskedPairAudit> audit;
  std::size_t superclass_positive_entries = 0;
};

struct StrategyReport {
  SyntheticConfig config;
  std::size_t categories = 0;
  std::vector<StrategyRun> runs;  // in kAllStrategies order
};

/// Scores every test image for the domain's categories (and their
/// ancestors when evaluated hierarchically), applies Soft-NMS and computes
/// AP50 per category.
DomainEvaluation evaluate_domain(const ToyModel& model, const DomainData& test,
                                 const SyntheticDomain& domain, const UnifiedLabelSpace& space,
                                 const SoftNmsParams& nms);

std::vector<MaskedPairAudit> audit_masked_pairs(const ToyModel& model, LabelStrategy strategy,
                                                const std::vector<DomainData>& data,
                                                const UnifiedLabelSpace& space, double gamma);

/// Trains and evaluates all five strategies (in parallel, one thread each).
StrategyReport compare_strategies(const SyntheticConfig& config, const UnifiedLabelSpace& space);

std::string strategy_report_json(const StrategyReport& report, const UnifiedLabelSpace& space);

/// Structural check of a serialized report against the documented schema;
/// returns the list of problems (empty when valid).
std::vector<std::string> check_strategy_report_schema(std::string_view json_text);

}  // namespace hierdet
