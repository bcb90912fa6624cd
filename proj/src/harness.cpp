#include "hierdet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <set>

#include "hierdet/loss.hpp"
#include "json.hpp"

namespace hierdet {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kImageWidth = 640;
constexpr int kImageHeight = 480;
constexpr const char* kReportSchema = "hierdet.strategy_report/1";

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw HarnessError(where + ": unknown key '" + k + "'");
  }
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

CategoryId resolve_or_throw(const UnifiedLabelSpace& space, const std::string& name) {
  auto id = space.find(name);
  if (!id) throw HarnessError("unknown category '" + name + "'");
  return *id;
}

// Prototype means: one random direction per category, scaled to the
// configured separation.
std::vector<std::vector<double>> prototypes(const SyntheticConfig& config,
                                            const UnifiedLabelSpace& space) {
  auto rng = stream(config.seed, 0xC1A55, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> out(space.size(), std::vector<double>(config.feature_dim));
  for (auto& mu : out) {
    double norm = 0.0;
    for (double& v : mu) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : mu) v *= config.separation / norm;
  }
  return out;
}

SupervisionSpec supervision_for(const UnifiedLabelSpace& space, LabelStrategy strategy,
                                CategoryId y) {
  return make_supervision(space, strategy, y, space.channel_count());
}

struct Flat {
  std::vector<const double*> x;
  std::vector<SupervisionSpec> spec;
  std::size_t dim = 0;
};

Flat flatten(const std::vector<DomainData>& data, const UnifiedLabelSpace& space,
             LabelStrategy strategy) {
  Flat f;
  std::map<CategoryId, SupervisionSpec> cache;
  for (const auto& d : data) {
    if (f.dim == 0) f.dim = d.feature_dim;
    if (d.feature_dim != f.dim) throw HarnessError("domains disagree on feature dimension");
    for (std::size_t i = 0; i < d.rows(); ++i) {
      auto it = cache.find(d.labels[i]);
      if (it == cache.end()) it = cache.emplace(d.labels[i], supervision_for(space, strategy, d.labels[i])).first;
      f.x.push_back(d.features.data() + i * d.feature_dim);
      f.spec.push_back(it->second);
    }
  }
  return f;
}

ordered_json nms_json(const SoftNmsParams& p) {
  return ordered_json{{"iou_threshold", p.iou_threshold},
                      {"score_threshold", p.score_threshold},
                      {"mode", to_string(p.mode)},
                      {"gaussian_sigma", p.gaussian_sigma}};
}

}  // namespace

SyntheticConfig parse_synthetic_config(std::string_view json_text,
                                       const std::filesystem::path& base_dir) {
  SyntheticConfig c;
  try {
    json j = json::parse(json_text.begin(), json_text.end());
    reject_unknown(j, {"seed", "feature_dim", "separation", "fixture", "train", "soft_nms", "domains"},
                   "config");
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.feature_dim = get_or<std::size_t>(j, "feature_dim", c.feature_dim);
    c.separation = get_or<double>(j, "separation", c.separation);
    c.fixture = j.at("fixture").get<std::string>();
    if (j.contains("train")) {
      const json& t = j["train"];
      reject_unknown(t, {"epochs", "lr"}, "config.train");
      c.train.epochs = get_or<std::size_t>(t, "epochs", c.train.epochs);
      c.train.lr = get_or<double>(t, "lr", c.train.lr);
    }
    if (j.contains("soft_nms")) {
      const json& n = j["soft_nms"];
      reject_unknown(n, {"iou_threshold", "score_threshold", "mode", "gaussian_sigma"},
                     "config.soft_nms");
      c.nms.iou_threshold = get_or<double>(n, "iou_threshold", c.nms.iou_threshold);
      c.nms.score_threshold = get_or<double>(n, "score_threshold", c.nms.score_threshold);
      c.nms.gaussian_sigma = get_or<double>(n, "gaussian_sigma", c.nms.gaussian_sigma);
      if (n.contains("mode")) c.nms.mode = soft_nms_mode_from_string(n["mode"].get<std::string>());
    }
    for (const json& jd : j.at("domains")) {
      SyntheticDomain d;
      reject_unknown(jd, {"tag", "labels", "train_images_per_category", "test_images_per_category",
                          "noise", "hierarchical_eval"},
                     "config.domains");
      d.tag = jd.at("tag").get<std::string>();
      d.train_images_per_category =
          get_or<std::size_t>(jd, "train_images_per_category", d.train_images_per_category);
      d.test_images_per_category =
          get_or<std::size_t>(jd, "test_images_per_category", d.test_images_per_category);
      d.noise = get_or<double>(jd, "noise", d.noise);
      d.hierarchical_eval = get_or<bool>(jd, "hierarchical_eval", false);
      for (const json& jl : jd.at("labels")) {
        SyntheticLabel l;
        if (jl.is_string()) {
          l.category = jl.get<std::string>();
        } else {
          reject_unknown(jl, {"category", "mixture"}, "config.domains.labels");
          l.category = jl.at("category").get<std::string>();
          l.mixture = get_or<std::vector<std::string>>(jl, "mixture", {});
        }
        d.labels.push_back(std::move(l));
      }
      c.domains.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw HarnessError(std::string("invalid synthetic config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw HarnessError(std::string("invalid synthetic config: ") + e.what());
  }

  if (c.feature_dim < 2) throw HarnessError("feature_dim must be at least 2");
  if (!(c.separation >= 0) || !std::isfinite(c.separation)) {
    throw HarnessError("separation must be finite and non-negative");
  }
  if (c.train.epochs < 1) throw HarnessError("train.epochs must be positive");
  if (!(c.train.lr >= 0) || !std::isfinite(c.train.lr)) {
    throw HarnessError("train.lr must be finite and non-negative");
  }
  if (c.domains.empty()) throw HarnessError("config has no domains");
  std::set<std::string> tags;
  for (const auto& d : c.domains) {
    if (d.tag.rfind("SYNTH-", 0) != 0 || d.tag.size() == 6) {
      throw HarnessError("domain tag '" + d.tag + "' must look like SYNTH-*");
    }
    if (!tags.insert(d.tag).second) throw HarnessError("duplicate domain " + d.tag);
    if (d.labels.empty()) throw HarnessError("domain " + d.tag + " has no labels");
    if (d.train_images_per_category < 1 || d.test_images_per_category < 1) {
      throw HarnessError("domain " + d.tag + ": images per category must be at least 1");
    }
    if (!(d.noise >= 0) || !std::isfinite(d.noise)) {
      throw HarnessError("domain " + d.tag + ": noise must be finite and non-negative");
    }
    std::set<std::string> seen;
    for (const auto& l : d.labels) {
      if (!seen.insert(l.category).second) {
        throw HarnessError("domain " + d.tag + ": duplicate label '" + l.category + "'");
      }
    }
  }
  c.fixture_dir = base_dir / c.fixture;
  return c;
}

std::string synthetic_config_json(const SyntheticConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["feature_dim"] = c.feature_dim;
  j["separation"] = c.separation;
  j["fixture"] = c.fixture;
  j["train"] = ordered_json{{"epochs", c.train.epochs}, {"lr", c.train.lr}};
  j["soft_nms"] = nms_json(c.nms);
  j["domains"] = ordered_json::array();
  for (const auto& d : c.domains) {
    ordered_json jd;
    jd["tag"] = d.tag;
    jd["train_images_per_category"] = d.train_images_per_category;
    jd["test_images_per_category"] = d.test_images_per_category;
    jd["noise"] = d.noise;
    jd["hierarchical_eval"] = d.hierarchical_eval;
    jd["labels"] = ordered_json::array();
    for (const auto& l : d.labels) {
      jd["labels"].push_back(ordered_json{{"category", l.category}, {"mixture", l.mixture}});
    }
    j["domains"].push_back(std::move(jd));
  }
  return j.dump(2);
}

std::vector<DomainData> generate_synthetic(const SyntheticConfig& config,
                                           const UnifiedLabelSpace& space, Split split) {
  const auto mu = prototypes(config, space);
  std::vector<DomainData> out;
  for (std::size_t di = 0; di < config.domains.size(); ++di) {
    const SyntheticDomain& dom = config.domains[di];
    auto rng = stream(config.seed, split == Split::Train ? 1 : 2, di);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> width(32, kImageWidth / 2), height(32, kImageHeight / 2);

    DomainData d;
    d.dataset.dataset_tag = dom.tag;
    d.feature_dim = config.feature_dim;
    const std::size_t per =
        split == Split::Train ? dom.train_images_per_category : dom.test_images_per_category;
    const char* split_name = split == Split::Train ? "train" : "test";
    for (const SyntheticLabel& label : dom.labels) {
      const CategoryId y = resolve_or_throw(space, label.category);
      std::vector<CategoryId> parts;
      for (const auto& m : label.mixture) parts.push_back(resolve_or_throw(space, m));
      if (parts.empty()) parts.push_back(y);
      std::uniform_int_distribution<std::size_t> component(0, parts.size() - 1);

      for (std::size_t k = 0; k < per; ++k) {
        const auto& center = mu[parts[component(rng)].value];
        for (double c : center) d.features.push_back(c + dom.noise * normal(rng));
        d.labels.push_back(y);

        const int w = width(rng), h = height(rng);
        const int x = std::uniform_int_distribution<int>(0, kImageWidth - w)(rng);
        const int yy = std::uniform_int_distribution<int>(0, kImageHeight - h)(rng);
        AnnotatedImage img;
        img.image_id = dom.tag + "-" + split_name + "-" + std::to_string(d.dataset.images.size());
        img.width = kImageWidth;
        img.height = kImageHeight;
        img.boxes.push_back({Box{double(x), double(yy), double(w), double(h)}, label.category});
        d.dataset.images.push_back(std::move(img));
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<double> ToyModel::logits(std::span<const double> x) const {
  if (x.size() != dim) throw HarnessError("feature dimension mismatch");
  std::vector<double> z(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    double s = bias[c];
    const double* w = weights.data() + c * dim;
    for (std::size_t k = 0; k < dim; ++k) s += w[k] * x[k];
    z[c] = s;
  }
  return z;
}

ToyModel init_toy(const UnifiedLabelSpace& space, std::size_t dim, std::uint64_t seed) {
  ToyModel m;
  m.channels = space.channel_count();
  m.dim = dim;
  m.weights.resize(m.channels * dim);
  m.bias.assign(m.channels, 0.0);
  auto rng = stream(seed, 3, 0);
  std::normal_distribution<double> normal(0.0, 0.01);
  for (double& w : m.weights) w = normal(rng);
  return m;
}

TrainResult train_toy(LabelStrategy strategy, const std::vector<DomainData>& data,
                      const UnifiedLabelSpace& space, std::size_t epochs, double lr,
                      std::uint64_t seed, double gamma) {
  if (epochs < 1) throw HarnessError("epochs must be positive");
  if (!(lr >= 0) || !std::isfinite(lr)) throw HarnessError("lr must be finite and non-negative");
  const Flat f = flatten(data, space, strategy);
  if (f.x.empty()) throw HarnessError("no training samples");

  TrainResult r;
  r.model = init_toy(space, f.dim, seed);
  ToyModel& m = r.model;
  const std::size_t C = m.channels;
  const double n = static_cast<double>(f.x.size());

  r.log.positive_counts.assign(space.size(), 0);
  double sq = 0.0;
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    for (std::size_t c = 0; c < space.size(); ++c) {
      if (f.spec[i].targets[c]) {
        ++r.log.positive_counts[c];
        ++r.log.total_positive_entries;
      }
    }
    double s = 1.0;
    for (std::size_t k = 0; k < f.dim; ++k) s += f.x[i][k] * f.x[i][k];
    sq += s;
  }
  // bce'' <= 1/4 bounds the Hessian by (gamma / 4C) * mean(|x|^2 + 1).
  r.log.stability_bound = 2.0 / (gamma / (4.0 * static_cast<double>(C)) * (sq / n));

  std::vector<double> gw(m.weights.size()), gb(C);
  for (std::size_t epoch = 0;; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      std::span<const double> x{f.x[i], f.dim};
      auto z = m.logits(x);
      if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
        throw TrainingError("non-finite logits at epoch " + std::to_string(epoch), epoch);
      }
      loss += cls_loss(z, f.spec[i], gamma);
      auto g = cls_loss_grad(z, f.spec[i], gamma);
      for (std::size_t c = 0; c < C; ++c) {
        if (g[c] == 0.0) continue;
        gb[c] += g[c];
        double* row = gw.data() + c * f.dim;
        for (std::size_t k = 0; k < f.dim; ++k) row[k] += g[c] * x[k];
      }
    }
    loss /= n;
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch), epoch);
    }
    r.log.loss.push_back(loss);
    if (epoch == epochs) break;
    for (std::size_t p = 0; p < gw.size(); ++p) m.weights[p] -= lr * gw[p] / n;
    for (std::size_t c = 0; c < C; ++c) m.bias[c] -= lr * gb[c] / n;
  }
  return r;
}

DomainEvaluation evaluate_domain(const ToyModel& model, const DomainData& test,
                                 const SyntheticDomain& domain, const UnifiedLabelSpace& space,
                                 const SoftNmsParams& nms) {
  CategorySet scored;
  for (const auto& l : domain.labels) {
    const CategoryId y = resolve_or_throw(space, l.category);
    scored.insert(y);
    if (domain.hierarchical_eval) {
      CategorySet up = space.ancestors(y);
      scored.insert(up.begin(), up.end());
    }
  }
  std::vector<Detection> dets;
  std::vector<GroundTruthBox> gts;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const AnnotatedImage& img = test.dataset.images[i];
    const Box& box = img.boxes.front().bbox;
    gts.push_back({img.image_id, box, test.labels[i]});
    auto z = model.logits(test.row(i));
    for (CategoryId c : scored) dets.push_back({img.image_id, box, sigmoid(z[c.value]), c});
  }
  DomainEvaluation e;
  e.tag = domain.tag;
  e.hierarchical = domain.hierarchical_eval;
  const auto kept = soft_nms(dets, nms);
  e.ap = ap50(kept, gts, domain.hierarchical_eval, space);
  return e;
}

std::vector<MaskedPairAudit> audit_masked_pairs(const ToyModel& model, LabelStrategy strategy,
                                                const std::vector<DomainData>& data,
                                                const UnifiedLabelSpace& space, double gamma) {
  const Flat f = flatten(data, space, strategy);
  std::map<std::pair<CategoryId, CategoryId>, MaskedPairAudit> pairs;
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    const SupervisionSpec& spec = f.spec[i];
    auto z = model.logits({f.x[i], f.dim});
    const double base = cls_loss(z, spec, gamma);
    const auto g = cls_loss_grad(z, spec, gamma);
    for (std::size_t c = 0; c < spec.channels(); ++c) {
      if (spec.mask[c]) continue;
      auto& a = pairs[{*spec.y, CategoryId{static_cast<std::uint32_t>(c)}}];
      a.gt = *spec.y;
      a.channel = CategoryId{static_cast<std::uint32_t>(c)};
      ++a.samples;
      for (double shift : {-8.0, 8.0}) {
        auto moved = z;
        moved[c] += shift;
        a.max_abs_loss_delta =
            std::max(a.max_abs_loss_delta, std::abs(cls_loss(moved, spec, gamma) - base));
      }
      a.max_abs_gradient = std::max(a.max_abs_gradient, std::abs(g[c]));
    }
  }
  std::vector<MaskedPairAudit> out;
  for (auto& [key, a] : pairs) out.push_back(a);
  return out;
}

StrategyReport compare_strategies(const SyntheticConfig& config, const UnifiedLabelSpace& space) {
  const LossWeights weights;
  const auto train = generate_synthetic(config, space, Split::Train);
  const auto test = generate_synthetic(config, space, Split::Test);

  auto run_one = [&](LabelStrategy strategy) {
    StrategyRun run;
    run.strategy = strategy;
    run.training = train_toy(strategy, train, space, config.train.epochs, config.train.lr,
                             config.seed, weights.gamma);
    for (std::size_t d = 0; d < config.domains.size(); ++d) {
      run.evaluation.push_back(
          evaluate_domain(run.training.model, test[d], config.domains[d], space, config.nms));
    }
    run.audit = audit_masked_pairs(run.training.model, strategy, train, space, weights.gamma);
    for (std::size_t c = 0; c < space.size(); ++c) {
      if (space.categories()[c].is_oid_nonleaf) {
        run.superclass_positive_entries += run.training.log.positive_counts[c];
      }
    }
    return run;
  };

  std::vector<std::future<StrategyRun>> jobs;
  for (LabelStrategy s : kAllStrategies) jobs.push_back(std::async(std::launch::async, run_one, s));
  StrategyReport report;
  report.config = config;
  report.categories = space.size();
  for (auto& j : jobs) report.runs.push_back(j.get());
  return report;
}

std::string strategy_report_json(const StrategyReport& report, const UnifiedLabelSpace& space) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["seed"] = report.config.seed;
  j["config"] = ordered_json::parse(synthetic_config_json(report.config));
  j["space"] = ordered_json{{"categories", report.categories},
                            {"channels", report.categories + 1}};
  j["strategies"] = ordered_json::array();
  for (const StrategyRun& run : report.runs) {
    ordered_json s;
    s["strategy"] = to_string(run.strategy);
    const TrainingLog& log = run.training.log;
    s["training"] = ordered_json{{"epochs", log.loss.size() - 1},
                                 {"lr", report.config.train.lr},
                                 {"stability_bound", log.stability_bound},
                                 {"initial_loss", log.loss.front()},
                                 {"final_loss", log.loss.back()},
                                 {"loss", log.loss}};
    ordered_json counts = ordered_json::object();
    for (std::size_t c = 0; c < log.positive_counts.size(); ++c) {
      if (log.positive_counts[c] > 0) counts[space.categories()[c].canonical_name] = log.positive_counts[c];
    }
    s["positive_counts"] = std::move(counts);
    s["total_positive_entries"] = log.total_positive_entries;
    s["superclass_positive_entries"] = run.superclass_positive_entries;
    s["evaluation"] = ordered_json::array();
    for (const auto& e : run.evaluation) {
      ordered_json per = ordered_json::object();
      for (const auto& [cat, ap] : e.ap.per_category) per[space.name(cat)] = ap;
      s["evaluation"].push_back(ordered_json{{"domain", e.tag},
                                             {"hierarchical", e.hierarchical},
                                             {"mean_ap50", e.ap.mean_ap},
                                             {"per_category_ap50", std::move(per)}});
    }
    s["masked_pair_audit"] = ordered_json::array();
    for (const auto& a : run.audit) {
      const bool bg = a.channel.value == space.background_channel();
      s["masked_pair_audit"].push_back(
          ordered_json{{"gt", space.name(a.gt)},
                       {"channel", bg ? std::string("__background__") : space.name(a.channel)},
                       {"samples", a.samples},
                       {"max_abs_loss_delta", a.max_abs_loss_delta},
                       {"max_abs_gradient", a.max_abs_gradient}});
    }
    j["strategies"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> check_strategy_report_schema(std::string_view json_text) {
  std::vector<std::string> problems;
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::exception& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto need = [&](const json& obj, const std::string& where, const char* key,
                  bool (json::*is)() const noexcept) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!(obj[key].*is)()) {
      problems.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  };
  if (!j.is_object()) return {"report is not an object"};
  if (need(j, "report", "schema", &json::is_string) && j["schema"] != kReportSchema) {
    problems.push_back("report: unexpected schema " + j["schema"].get<std::string>());
  }
  need(j, "report", "seed", &json::is_number_unsigned);
  need(j, "report", "config", &json::is_object);
  if (need(j, "report", "space", &json::is_object)) {
    need(j["space"], "space", "categories", &json::is_number_unsigned);
    need(j["space"], "space", "channels", &json::is_number_unsigned);
  }
  if (!need(j, "report", "strategies", &json::is_array)) return problems;
  const auto& strategies = j["strategies"];
  if (strategies.size() != kAllStrategies.size()) {
    problems.push_back("report: expected " + std::to_string(kAllStrategies.size()) +
                       " strategies, found " + std::to_string(strategies.size()));
  }
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const json& s = strategies[i];
    const std::string where = "strategies[" + std::to_string(i) + "]";
    if (need(s, where, "strategy", &json::is_string)) {
      auto parsed = strategy_from_string(s["strategy"].get<std::string>());
      if (!parsed) {
        problems.push_back(where + ": unknown strategy");
      } else if (i < kAllStrategies.size() && *parsed != kAllStrategies[i]) {
        problems.push_back(where + ": strategies out of order");
      }
    }
    if (need(s, where, "training", &json::is_object)) {
      const json& t = s["training"];
      need(t, where + ".training", "epochs", &json::is_number_unsigned);
      need(t, where + ".training", "lr", &json::is_number);
      need(t, where + ".training", "stability_bound", &json::is_number);
      need(t, where + ".training", "initial_loss", &json::is_number);
      need(t, where + ".training", "final_loss", &json::is_number);
      if (need(t, where + ".training", "loss", &json::is_array) && t.contains("epochs") &&
          t["epochs"].is_number_unsigned() && t["loss"].size() != t["epochs"].get<std::size_t>() + 1) {
        problems.push_back(where + ".training: loss length must be epochs + 1");
      }
    }
    need(s, where, "positive_counts", &json::is_object);
    need(s, where, "total_positive_entries", &json::is_number_unsigned);
    need(s, where, "superclass_positive_entries", &json::is_number_unsigned);
    if (need(s, where, "evaluation", &json::is_array)) {
      for (const json& e : s["evaluation"]) {
        need(e, where + ".evaluation", "domain", &json::is_string);
        need(e, where + ".evaluation", "hierarchical", &json::is_boolean);
        if (need(e, where + ".evaluation", "mean_ap50", &json::is_number)) {
          const double v = e["mean_ap50"].get<double>();
          if (v < 0 || v > 1) problems.push_back(where + ".evaluation: mean_ap50 outside [0, 1]");
        }
        need(e, where + ".evaluation", "per_category_ap50", &json::is_object);
      }
    }
    if (need(s, where, "masked_pair_audit", &json::is_array)) {
      for (const json& a : s["masked_pair_audit"]) {
        need(a, where + ".masked_pair_audit", "gt", &json::is_string);
        need(a, where + ".masked_pair_audit", "channel", &json::is_string);
        need(a, where + ".masked_pair_audit", "samples", &json::is_number_unsigned);
        need(a, where + ".masked_pair_audit", "max_abs_loss_delta", &json::is_number);
        need(a, where + ".masked_pair_audit", "max_abs_gradient", &json::is_number);
      }
    }
  }
  return problems;
}

}  // namespace hierdet
