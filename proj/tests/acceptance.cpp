// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hierdet/cli.hpp"
#include "hierdet/gradcheck.hpp"
#include "hierdet/harness.hpp"
#include "hierdet/ingest.hpp"
#include "hierdet/labeling.hpp"
#include "hierdet/loss.hpp"
#include "hierdet/postprocess.hpp"
#include "hierdet/sampling.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hierdet;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kBuildSeconds = 1.0;
constexpr double kLossRelTol = 1e-12;
constexpr double kSpotTol = 1e-12;
constexpr double kGradStep = 1e-5;
constexpr double kGradTol = 1e-5;
constexpr double kGradSeconds = 10.0;
constexpr double kPostTol = 1e-9;
constexpr double kSimulateSeconds = 60.0;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

Check cardinality() {
  Check c;
  struct Case {
    const char* name;
    std::function<UnifiedLabelSpace()> build;
    std::size_t want;
  };
  const Case cases[] = {
      {"rvc540", [] { return build_space_from_directory(test::data_dir() / "rvc540"); }, 540},
      {"demo", [] { return build_space_from_directory(test::data_dir() / "demo"); }, 23},
      {"six", [] { return test::six_category_fixture(); }, 6},
  };
  std::ostringstream d;
  for (const auto& k : cases) {
    const auto t = Clock::now();
    const auto space = k.build();
    const double s = seconds_since(t);
    d << k.name << "=" << space.size() << " (" << s << " s) ";
    c.require(space.size() == k.want, std::string(k.name) + " has " + std::to_string(space.size()));
    c.require(s < kBuildSeconds, std::string(k.name) + " build too slow");
  }
  if (c.ok) c.detail = d.str();
  return c;
}

Check sampling_arithmetic() {
  Check c;
  const auto stats = parse_dataset_stats(read_text_file(test::data_dir() / "stats" / "rvc.json"));
  std::uint64_t total = 0;
  for (const auto& [tag, n] : epoch_composition(stats, parse_ratios("1:4:8"))) total += n;
  c.require(total == 2286400, "total " + std::to_string(total));
  if (c.ok) c.detail = "total=" + std::to_string(total);
  return c;
}

Check hcls_oracle() {
  Check c;
  const auto& s = test::rvc_space();
  const oracle::Closure closure(s);
  std::mt19937_64 rng(540);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(s.size() - 1));
  std::uniform_int_distribution<std::size_t> strat(0, kAllStrategies.size() - 1);
  for (int i = 0; i < 1000; ++i) {
    const LabelStrategy strategy = kAllStrategies[strat(rng)];
    const std::uint32_t y = pick(rng);
    const auto got = make_supervision(s, strategy, CategoryId{y}, s.channel_count());
    const auto want = oracle::supervision(s, closure, strategy, y);
    c.require(got.targets == want.targets && got.mask == want.mask,
              std::string("mismatch for ") + to_string(strategy) + " " + s.name(CategoryId{y}));
  }

  const auto& demo = test::demo_space();
  auto id = [&](const char* n) { return test::id_of(demo, n); };
  const auto hcls = LabelStrategy::OidHierarchyPlusHcls;
  c.require(ignore_set(demo, hcls, id("person")) ==
                test::ids_of(demo, {"person_super", "man", "woman", "boy", "girl"}),
            "coco person example");
  c.require(ignore_set(demo, hcls, id("trailer")) == test::ids_of(demo, {"land vehicle", "vehicle"}),
            "mvd trailer example");
  c.require(positive_set(demo, hcls, id("banana")) == test::ids_of(demo, {"banana", "fruit"}),
            "banana example");
  if (c.ok) c.detail = "1000 pairs, 3 worked examples";
  return c;
}

SupervisionSpec random_spec(std::mt19937_64& rng, std::size_t C) {
  SupervisionSpec s;
  s.targets.assign(C, 0);
  s.mask.assign(C, 1);
  if (std::bernoulli_distribution(0.2)(rng)) {
    s.targets.back() = 1;
    return s;
  }
  s.y = CategoryId{0};
  std::bernoulli_distribution coin(0.3);
  for (std::size_t k = 0; k < C; ++k) {
    s.targets[k] = coin(rng);
    s.mask[k] = !coin(rng);
  }
  return s;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Box random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0, 50), ext(1, 30);
  return {pos(rng), pos(rng), ext(rng), ext(rng)};
}

std::vector<HeadSample> random_head(std::mt19937_64& rng, std::size_t n, std::size_t C, int stages) {
  std::vector<HeadSample> head(n);
  for (auto& h : head) {
    h.supervision = random_spec(rng, C);
    auto gt = random_values(rng, 4, 2.0);
    std::copy(gt.begin(), gt.end(), h.gt_deltas.begin());
    for (int s = 0; s < stages; ++s) {
      HeadStage st;
      auto d = random_values(rng, 4, 2.0);
      std::copy(d.begin(), d.end(), st.deltas.begin());
      st.logits = random_values(rng, C, 3.0);
      h.stages.push_back(std::move(st));
    }
  }
  return head;
}

Check loss_oracle() {
  Check c;
  const LossWeights w;
  std::mt19937_64 rng(100);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t C = std::uniform_int_distribution<std::size_t>(2, 32)(rng);
    const auto head = random_head(rng, n, C, w.s_head);
    std::vector<RpnSample> rpn(std::uniform_int_distribution<std::size_t>(1, 8)(rng));
    for (auto& r : rpn) {
      r.gt_box = random_box(rng);
      r.positive = std::bernoulli_distribution(0.6)(rng);
      for (int s = 0; s < w.s_rpn; ++s) r.stages.push_back({random_box(rng), random_values(rng, 1, 3.0)[0]});
    }
    const auto b = evaluate_loss(rpn, head, w);
    c.require(rel_close(b.head.head, oracle::head_loss(head, w), kLossRelTol), "head loss round " + std::to_string(round));
    c.require(rel_close(b.rpn.rpn, oracle::rpn_loss(rpn, w), kLossRelTol), "rpn loss round " + std::to_string(round));
    c.require(b.total == 0.7 * b.rpn.rpn + b.head.head, "total not bit-exact");
  }

  const double ln2 = std::log(2.0);
  c.require(std::abs(bce(0.0, 1) - ln2) <= kSpotTol && std::abs(bce(0.0, 0) - ln2) <= kSpotTol, "bce ln 2");
  c.require(std::abs(smooth_l1(0.5, 0.0, 1.0) - 0.125) <= kSpotTol, "smooth l1 0.125");
  c.require(std::abs(iou({0, 0, 2, 2}, {1, 1, 2, 2}) - 1.0 / 7.0) <= kSpotTol, "iou 1/7");
  if (c.ok) c.detail = "100 batches, spot values";
  return c;
}

Check gradients() {
  Check c;
  const auto t = Clock::now();
  const LossWeights w;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    const std::size_t C = std::uniform_int_distribution<std::size_t>(2, 16)(rng);

    const auto spec = random_spec(rng, C);
    auto f = [&](std::span<const double> p) { return cls_loss(p, spec, w.gamma); };
    auto g = [&](std::span<const double> p) { return cls_loss_grad(p, spec, w.gamma); };
    const auto r = grad_check(f, g, random_values(rng, C, 3.0), kGradStep);
    c.require(r.passed(kGradTol), "cls_loss round " + std::to_string(round));
    worst = std::max(worst, r.max_rel_error);
    for (std::size_t k = 0; k < C; ++k) {
      if (!spec.mask[k]) c.require(r.analytic[k] == 0.0, "suppressed cls gradient not zero");
    }

    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const auto head = random_head(rng, n, C, w.s_head);
    const std::size_t per = 4 + C;
    auto unpack = [&](std::span<const double> p) {
      auto h = head;
      std::size_t k = 0;
      for (auto& sample : h) {
        for (auto& st : sample.stages) {
          for (double& d : st.deltas) d = p[k++];
          for (double& z : st.logits) z = p[k++];
        }
      }
      return h;
    };
    std::vector<double> params;
    for (const auto& sample : head) {
      for (const auto& st : sample.stages) {
        params.insert(params.end(), st.deltas.begin(), st.deltas.end());
        params.insert(params.end(), st.logits.begin(), st.logits.end());
      }
    }
    auto hf = [&](std::span<const double> p) { return head_loss(unpack(p), w).head; };
    auto hg = [&](std::span<const double> p) {
      std::vector<double> out;
      for (const auto& sample : head_loss_grad(unpack(p), w)) {
        for (const auto& st : sample) {
          out.insert(out.end(), st.deltas.begin(), st.deltas.end());
          out.insert(out.end(), st.logits.begin(), st.logits.end());
        }
      }
      return out;
    };
    const auto hr = grad_check(hf, hg, params, kGradStep);
    c.require(hr.passed(kGradTol), "head_loss round " + std::to_string(round));
    worst = std::max(worst, hr.max_rel_error);
    for (std::size_t i = 0; i < n; ++i) {
      for (int s = 0; s < w.s_head; ++s) {
        const std::size_t base = (i * w.s_head + s) * per + 4;
        for (std::size_t k = 0; k < C; ++k) {
          if (!head[i].supervision.mask[k]) c.require(hr.analytic[base + k] == 0.0, "suppressed head gradient not zero");
        }
      }
    }
  }
  const double s = seconds_since(t);
  c.require(s < kGradSeconds, "gradient checks too slow");
  if (c.ok) {
    std::ostringstream d;
    d << "max rel error " << worst << ", " << s << " s";
    c.detail = d.str();
  }
  return c;
}

SyntheticConfig default_config() {
  const auto dir = test::data_dir() / "synthetic";
  return parse_synthetic_config(read_text_file(dir / "default.json"), dir);
}

Check strategy_properties() {
  Check c;
  const auto config = default_config();
  const auto space = build_space_from_directory(config.fixture_dir);
  for (const auto& cat : space.categories()) {
    const auto u = positive_set(space, LabelStrategy::UnifiedHierarchy, cat.id).size();
    const auto o = positive_set(space, LabelStrategy::OidHierarchy, cat.id).size();
    const auto b = positive_set(space, LabelStrategy::Baseline, cat.id).size();
    c.require(u >= o && o >= b, "|P| order fails for " + cat.canonical_name);
  }
  const auto report = compare_strategies(config, space);
  std::size_t naive = 0, unified = 0, pairs = 0;
  for (const auto& run : report.runs) {
    if (run.strategy == LabelStrategy::NaiveSuppression) naive = run.superclass_positive_entries;
    if (run.strategy == LabelStrategy::UnifiedHierarchy) unified = run.superclass_positive_entries;
    if (run.strategy != LabelStrategy::OidHierarchyPlusHcls) continue;
    for (const auto& a : run.audit) {
      ++pairs;
      c.require(a.max_abs_loss_delta == 0.0 && a.max_abs_gradient == 0.0,
                "hcls pair " + space.name(a.gt) + " contributes");
    }
  }
  c.require(pairs > 0, "hcls audit is empty");
  c.require(unified >= naive, "superclass positives unified < naive");
  const std::string again = strategy_report_json(compare_strategies(config, space), space);
  c.require(strategy_report_json(report, space) == again, "report not deterministic");
  if (c.ok) {
    c.detail = "unified=" + std::to_string(unified) + " naive=" + std::to_string(naive) +
               " hcls pairs=" + std::to_string(pairs);
  }
  return c;
}

Detection grid_det(std::mt19937_64& rng, const char* image) {
  std::uniform_int_distribution<int> cell(0, 3), size(1, 3), score(1, 20);
  return {image, {4.0 * cell(rng), 4.0 * cell(rng), 4.0 * size(rng), 4.0 * size(rng)}, score(rng) / 20.0,
          CategoryId{0}};
}

Check postprocess_oracles() {
  Check c;
  const auto& space = test::demo_space();
  std::mt19937_64 rng(7);
  std::size_t cases = 0;
  SoftNmsParams hard;
  hard.mode = SoftNmsMode::Hard;
  for (int round = 0; round < 600; ++round) {
    const std::size_t n = 1 + round % 6;
    std::vector<Detection> dets;
    for (std::size_t k = 0; k < n; ++k) dets.push_back(grid_det(rng, "img"));

    const auto h = soft_nms(dets, hard);
    const auto want = oracle::hard_nms_subsets(dets, hard.iou_threshold, hard.score_threshold);
    bool same = h.size() == want.size();
    for (std::size_t i = 0; same && i < h.size(); ++i) same = h[i] == dets[want[i]];
    c.require(same, "hard nms round " + std::to_string(round));

    const auto lin = soft_nms(dets);
    const auto want_lin = oracle::linear_soft_nms_orders(dets, 0.6, 0.001);
    same = lin.size() == want_lin.size();
    for (std::size_t i = 0; same && i < lin.size(); ++i) {
      same = lin[i].bbox == dets[want_lin[i].first].bbox && std::abs(lin[i].score - want_lin[i].second) <= kPostTol;
    }
    c.require(same, "linear soft-nms round " + std::to_string(round));

    // Split the boxes into ground truth and detections for AP.
    if (n >= 2) {
      const std::size_t ngt = 1 + round % (n - 1);
      std::vector<GroundTruthBox> gts;
      for (std::size_t k = 0; k < ngt; ++k) gts.push_back({dets[k].image_id, dets[k].bbox, dets[k].category});
      std::vector<Detection> rest(dets.begin() + ngt, dets.end());
      for (auto interp : {ApInterpolation::Points101, ApInterpolation::Exact}) {
        const double got = ap50(rest, gts, false, space, interp).mean_ap;
        c.require(std::abs(got - oracle::ap50_prefix(rest, gts, interp)) <= kPostTol,
                  "ap50 round " + std::to_string(round));
      }
    }
    ++cases;
  }
  c.require(cases >= 500, "too few cases");
  if (c.ok) c.detail = std::to_string(cases) + " cases";
  return c;
}

Check end_to_end() {
  Check c;
  test::TempDir tmp;
  const std::string config = (test::data_dir() / "synthetic" / "default.json").string();
  std::string texts[2];
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const std::string out = (tmp / ("report" + std::to_string(i) + ".json")).string();
    std::ostringstream so, se;
    const auto t = Clock::now();
    const int code = cli::run({"simulate", "--config", config, "--out", out}, so, se);
    worst = std::max(worst, seconds_since(t));
    c.require(code == cli::kExitOk, "simulate exited " + std::to_string(code) + ": " + se.str());
    if (code != cli::kExitOk) return c;
    texts[i] = read_text_file(out);
  }
  c.require(worst < kSimulateSeconds, "simulate too slow");
  const auto problems = check_strategy_report_schema(texts[0]);
  c.require(problems.empty(), problems.empty() ? "" : "schema: " + problems.front());
  c.require(texts[0] == texts[1], "runs differ");
  if (c.ok) {
    std::ostringstream d;
    d << worst << " s, " << texts[0].size() << " bytes";
    c.detail = d.str();
  }
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Check (*fn)();
  };
  const Criterion criteria[] = {
      {"label-space cardinality", cardinality},
      {"sampling arithmetic", sampling_arithmetic},
      {"hcls mask oracle", hcls_oracle},
      {"loss oracle", loss_oracle},
      {"gradient checks", gradients},
      {"strategy properties", strategy_properties},
      {"post-processing oracles", postprocess_oracles},
      {"end-to-end simulate", end_to_end},
  };
  int failed = 0;
  int index = 1;
  for (const auto& k : criteria) {
    Check c;
    try {
      c = k.fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %d %s: %s\n", c.ok ? "PASS" : "FAIL", index++, k.name, c.detail.c_str());
    if (!c.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
