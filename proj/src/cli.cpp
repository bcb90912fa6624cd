#include "hierdet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "hierdet/harness.hpp"
#include "hierdet/ingest.hpp"
#include "hierdet/labeling.hpp"
#include "hierdet/loss.hpp"
#include "hierdet/postprocess.hpp"
#include "hierdet/sampling.hpp"
#include "hierdet/taxonomy.hpp"
#include "json.hpp"

namespace hierdet::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Errors in the contents of input files (as opposed to the command line).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

UnifiedLabelSpace load_space(const std::string& path) { return deserialize_space(read_text_file(path)); }

LabelStrategy strategy_arg(const std::string& s) {
  auto parsed = strategy_from_string(s);
  if (!parsed) throw CLI::ValidationError("--strategy", "unknown strategy '" + s + "'");
  return *parsed;
}

std::vector<std::string> names(const UnifiedLabelSpace& space, const CategorySet& set) {
  std::vector<std::string> out;
  for (CategoryId c : set) out.push_back(space.name(c));
  return out;
}

CategoryId resolve_category(const UnifiedLabelSpace& space, const std::string& name,
                            std::optional<SourceDataset> dataset = std::nullopt) {
  auto id = space.resolve(name, dataset);
  if (!id) throw DataError("unknown category '" + name + "'");
  return *id;
}

Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw DataError("box must be [x, y, w, h]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (b.w < 0 || b.h < 0) throw DataError("box has negative extent");
  return b;
}

std::array<double, 4> deltas_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw DataError("deltas must have 4 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

LossWeights weights_from(const json& j) {
  LossWeights w;
  for (const auto& [k, v] : j.items()) {
    if (k == "lambda") w.lambda = v.get<double>();
    else if (k == "alpha") w.alpha = v.get<double>();
    else if (k == "beta") w.beta = v.get<double>();
    else if (k == "gamma") w.gamma = v.get<double>();
    else if (k == "s_rpn") w.s_rpn = v.get<int>();
    else if (k == "s_head") w.s_head = v.get<int>();
    else if (k == "smooth_l1_beta") w.smooth_l1_beta = v.get<double>();
    else throw DataError("unknown loss weight '" + k + "'");
  }
  w.check();
  return w;
}

std::vector<Detection> detections_from(const json& j, const UnifiedLabelSpace& space) {
  std::vector<Detection> out;
  for (const json& d : j) {
    out.push_back({d.at("image_id").get<std::string>(), box_from(d.at("bbox")),
                   d.at("score").get<double>(),
                   resolve_category(space, d.at("category").get<std::string>())});
  }
  return out;
}

std::vector<GroundTruthBox> truths_from(const json& j, const UnifiedLabelSpace& space) {
  std::vector<GroundTruthBox> out;
  for (const json& g : j) {
    out.push_back({g.at("image_id").get<std::string>(), box_from(g.at("bbox")),
                   resolve_category(space, g.at("category").get<std::string>())});
  }
  return out;
}

ordered_json breakdown_json(const LossBreakdown& b) {
  return ordered_json{
      {"total", b.total},
      {"rpn", {{"loss", b.rpn.rpn},
               {"iou_term", b.rpn.iou_term},
               {"cls_term", b.rpn.cls_term},
               {"stage_iou", b.rpn.stage_iou},
               {"stage_cls", b.rpn.stage_cls}}},
      {"head", {{"loss", b.head.head},
                {"reg_term", b.head.reg_term},
                {"cls_term", b.head.cls_term},
                {"stage_reg", b.head.stage_reg},
                {"stage_cls", b.head.stage_cls}}}};
}

struct Options {
  std::string mapping, hierarchy, equiv, cross, out, space, cls, dataset, strategy, annotations;
  std::string batch, weights, stats, ratios = "1:4:8", config, dets, gts, soft_nms;
  std::uint64_t seed = 0;
  bool hierarchical = false;
  bool exact = false;
};

int cmd_build(const Options& o, std::ostream& out) {
  const UnifiedLabelSpace space = build_unified_space(
      parse_mapping_csv(read_text_file(o.mapping)), parse_oid_hierarchy(read_text_file(o.hierarchy)),
      parse_link_csv(read_text_file(o.equiv)), parse_link_csv(read_text_file(o.cross)));
  write_text_file(o.out, serialize_space(space));
  std::size_t nonleaf = 0;
  for (const auto& c : space.categories()) nonleaf += c.is_oid_nonleaf ? 1 : 0;
  out << ordered_json{{"categories", space.size()},
                      {"channels", space.channel_count()},
                      {"oid_superclasses", nonleaf},
                      {"hierarchy_edges", space.hierarchy_edges().size()},
                      {"equivalences", space.equivalences().size()},
                      {"cross_parent_links", [&] {
                         std::size_t n = 0;
                         for (const auto& [c, ps] : space.cross_parents()) n += ps.size();
                         return n;
                       }()},
                      {"out", o.out}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const UnifiedLabelSpace space = load_space(o.space);
  const ValidationReport report = validate(space);
  ordered_json j{{"ok", report.ok()}, {"categories", space.size()}, {"violations", ordered_json::array()}};
  for (const Violation& v : report.violations) {
    std::vector<std::string> cats;
    for (CategoryId c : v.categories) {
      cats.push_back(space.contains(c) ? space.name(c) : std::to_string(c.value));
    }
    j["violations"].push_back(
        ordered_json{{"kind", to_string(v.kind)}, {"categories", cats}, {"message", v.message}});
  }
  out << j.dump() << '\n';
  return report.ok() ? kExitOk : kExitDataError;
}

std::optional<SourceDataset> dataset_arg(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto d = source_dataset_from_string(s);
  if (!d) throw CLI::ValidationError("--dataset", "unknown dataset '" + s + "'");
  return d;
}

int cmd_expand(const Options& o, std::ostream& out) {
  const LabelStrategy strategy = strategy_arg(o.strategy);
  const auto dataset = dataset_arg(o.dataset);
  const UnifiedLabelSpace space = load_space(o.space);
  const CategoryId y = resolve_category(space, o.cls, dataset);
  out << ordered_json{{"positives", names(space, positive_set(space, strategy, y))},
                      {"ignored", names(space, ignore_set(space, strategy, y))}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_masks(const Options& o, std::ostream& out) {
  const LabelStrategy strategy = strategy_arg(o.strategy);
  const UnifiedLabelSpace space = load_space(o.space);
  const AnnotatedDataset ds = load_annotations(read_text_file(o.annotations));
  const auto dataset = source_dataset_from_string(ds.dataset_tag);

  std::vector<std::optional<CategoryId>> ys;
  ordered_json rows = ordered_json::array();
  for (const auto& img : ds.images) {
    for (std::size_t b = 0; b < img.boxes.size(); ++b) {
      const CategoryId y = resolve_category(space, img.boxes[b].category_name, dataset);
      ys.push_back(y);
      rows.push_back(ordered_json{{"image_id", img.image_id}, {"box", b}, {"category", space.name(y)}});
    }
  }
  const SupervisionBatch batch = batch_masks(space, strategy, ys);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    auto t = batch.target_row(i);
    auto m = batch.mask_row(i);
    rows[i]["targets"] = std::vector<int>(t.begin(), t.end());
    rows[i]["mask"] = std::vector<int>(m.begin(), m.end());
  }
  ordered_json j{{"strategy", to_string(strategy)},
                 {"dataset", ds.dataset_tag},
                 {"channels", space.channel_count()},
                 {"background_channel", space.background_channel()},
                 {"rows", std::move(rows)}};
  write_text_file(o.out, j.dump() + "\n");
  out << ordered_json{{"rows", batch.rows}, {"channels", batch.cols}, {"out", o.out}}.dump() << '\n';
  return kExitOk;
}

int cmd_loss_eval(const Options& o, std::ostream& out) {
  const UnifiedLabelSpace space = load_space(o.space);
  const json batch = parse_json_file(o.batch);
  const LossWeights weights = o.weights.empty() ? LossWeights{} : weights_from(parse_json_file(o.weights));
  weights.check();
  try {
    const std::string sname = batch.contains("strategy") ? batch["strategy"].get<std::string>() : "oid-hcls";
    auto strategy = strategy_from_string(sname);
    if (!strategy) throw DataError("unknown strategy '" + sname + "' in batch");

    std::vector<RpnSample> rpn;
    for (const json& s : batch.value("rpn", json::array())) {
      RpnSample r;
      r.gt_box = box_from(s.at("gt_box"));
      r.positive = s.value("positive", true);
      for (const json& st : s.at("stages")) {
        r.stages.push_back({box_from(st.at("proposal")), st.at("objectness_logit").get<double>()});
      }
      rpn.push_back(std::move(r));
    }
    std::vector<HeadSample> head;
    for (const json& s : batch.value("head", json::array())) {
      HeadSample h;
      std::optional<CategoryId> y;
      if (!s.at("category").is_null()) y = resolve_category(space, s["category"].get<std::string>());
      h.supervision = make_supervision(space, *strategy, y, space.channel_count());
      if (s.contains("gt_deltas")) h.gt_deltas = deltas_from(s["gt_deltas"]);
      for (const json& st : s.at("stages")) {
        h.stages.push_back({deltas_from(st.at("deltas")), st.at("logits").get<std::vector<double>>()});
      }
      head.push_back(std::move(h));
    }
    out << breakdown_json(evaluate_loss(rpn, head, weights)).dump() << '\n';
  } catch (const json::exception& e) {
    throw DataError(o.batch + ": " + e.what());
  }
  return kExitOk;
}

int cmd_sample_plan(const Options& o, std::ostream& out) {
  RepeatRatios ratios;
  try {
    ratios = parse_ratios(o.ratios);
  } catch (const SamplingError& e) {
    throw CLI::ValidationError("--ratios", e.what());
  }
  const DatasetStats stats = parse_dataset_stats(read_text_file(o.stats));
  const SamplePlan plan = class_aware_schedule(stats, ratios, o.seed);
  write_text_file(o.out, write_plan_jsonl(plan));
  ordered_json composition = ordered_json::object();
  std::uint64_t total = 0;
  for (const auto& [tag, n] : epoch_composition(stats, ratios)) {
    composition[tag] = n;
    total += n;
  }
  out << ordered_json{{"seed", o.seed},
                      {"repeat_ratios", plan.repeat_ratios},
                      {"composition", composition},
                      {"total", total},
                      {"entries", plan.entries.size()},
                      {"warnings", plan.warnings},
                      {"out", o.out}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const std::filesystem::path config_path(o.config);
  const SyntheticConfig config =
      parse_synthetic_config(read_text_file(config_path), config_path.parent_path());
  const UnifiedLabelSpace space = build_space_from_directory(config.fixture_dir);
  const StrategyReport report = compare_strategies(config, space);
  const std::string text = strategy_report_json(report, space);
  write_text_file(o.out, text);
  ordered_json summary{{"seed", config.seed}, {"out", o.out}, {"strategies", ordered_json::array()}};
  for (const auto& run : report.runs) {
    ordered_json s{{"strategy", to_string(run.strategy)},
                   {"final_loss", run.training.log.loss.back()}};
    for (const auto& e : run.evaluation) s["mean_ap50"][e.tag] = e.ap.mean_ap;
    summary["strategies"].push_back(std::move(s));
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const UnifiedLabelSpace space = load_space(o.space);
  std::vector<Detection> dets;
  std::vector<GroundTruthBox> gts;
  try {
    dets = detections_from(parse_json_file(o.dets), space);
    gts = truths_from(parse_json_file(o.gts), space);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid detections or ground truth: ") + e.what());
  }
  if (!o.soft_nms.empty()) {
    SoftNmsParams p;
    try {
      p.mode = soft_nms_mode_from_string(o.soft_nms);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--soft-nms", e.what());
    }
    dets = soft_nms(dets, p);
  }
  const ApResult r = ap50(dets, gts, o.hierarchical, space,
                          o.exact ? ApInterpolation::Exact : ApInterpolation::Points101);
  ordered_json per = ordered_json::object();
  for (const auto& [c, ap] : r.per_category) per[space.name(c)] = ap;
  out << ordered_json{{"hierarchical", o.hierarchical},
                      {"interpolation", o.exact ? "exact" : "101-point"},
                      {"mean_ap50", r.mean_ap},
                      {"per_category_ap50", per}}
             .dump()
      << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unified label space, hierarchy-aware supervision and loss tools", "hierdet"};
  app.require_subcommand(1, 1);
  Options o;

  auto* build = app.add_subcommand("build", "Build the unified label space artifact");
  build->add_option("--mapping", o.mapping, "Mapping CSV")->required();
  build->add_option("--hierarchy", o.hierarchy, "OID hierarchy JSON")->required();
  build->add_option("--equiv", o.equiv, "Label-duplication link CSV")->required();
  build->add_option("--cross", o.cross, "Cross-dataset parent link CSV")->required();
  build->add_option("--out", o.out, "Output space artifact")->required();

  auto* val = app.add_subcommand("validate", "Check structural invariants of a space artifact");
  val->add_option("--space", o.space)->required();

  auto* expand = app.add_subcommand("expand", "Print P(y) and D(y) for one class");
  expand->add_option("--space", o.space)->required();
  expand->add_option("--class", o.cls, "Canonical name, or a dataset name with --dataset")->required();
  expand->add_option("--strategy", o.strategy, "baseline|naive|unified|oid|oid-hcls")->required();
  expand->add_option("--dataset", o.dataset, "COCO|MVD|OID, to resolve dataset-specific names");

  auto* masks = app.add_subcommand("masks", "Export target and mask rows for annotations");
  masks->add_option("--space", o.space)->required();
  masks->add_option("--annotations", o.annotations)->required();
  masks->add_option("--strategy", o.strategy)->required();
  masks->add_option("--out", o.out)->required();

  auto* loss = app.add_subcommand("loss-eval", "Evaluate the detection loss on a batch");
  loss->add_option("--space", o.space)->required();
  loss->add_option("--batch", o.batch, "Batch JSON")->required();
  loss->add_option("--weights", o.weights, "Loss weight overrides JSON");

  auto* plan = app.add_subcommand("sample-plan", "Write one epoch of class-aware sampling");
  plan->add_option("--stats", o.stats, "Dataset stats JSON")->required();
  plan->add_option("--ratios", o.ratios, "OID:COCO:MVD repeat ratios")->capture_default_str();
  plan->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  plan->add_option("--out", o.out, "Output JSONL")->required();

  auto* sim = app.add_subcommand("simulate", "Compare the five label strategies on synthetic data");
  sim->add_option("--config", o.config)->required();
  sim->add_option("--out", o.out, "Report JSON")->required();

  auto* ev = app.add_subcommand("eval", "AP50 of detections against ground truth");
  ev->add_option("--dets", o.dets)->required();
  ev->add_option("--gts", o.gts)->required();
  ev->add_option("--space", o.space)->required();
  ev->add_flag("--hierarchical", o.hierarchical, "Count ground truth for its ancestors too");
  ev->add_flag("--exact", o.exact, "Exact PR integration instead of 101 points");
  ev->add_option("--soft-nms", o.soft_nms, "Apply Soft-NMS first: linear|gaussian|hard");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*build) return cmd_build(o, out);
    if (*val) return cmd_validate(o, out);
    if (*expand) return cmd_expand(o, out);
    if (*masks) return cmd_masks(o, out);
    if (*loss) return cmd_loss_eval(o, out);
    if (*plan) return cmd_sample_plan(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*ev) return cmd_eval(o, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace hierdet::cli
