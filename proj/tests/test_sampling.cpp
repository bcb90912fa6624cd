#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "hierdet/harness.hpp"
#include "hierdet/sampling.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace hierdet;

namespace {

using Multiset = std::map<std::pair<std::string, std::string>, std::size_t>;

Multiset multiset(const SamplePlan& plan) {
  Multiset m;
  for (const auto& e : plan.entries) ++m[{e.dataset_tag, e.image_id}];
  return m;
}

DatasetStats random_stats(std::mt19937_64& rng) {
  DatasetStats stats;
  const char* tags[] = {"OID", "COCO", "MVD"};
  const char* cats[] = {"a", "b", "c", "d", "e"};
  for (const char* tag : tags) {
    DatasetStats::Dataset d;
    d.tag = tag;
    d.image_count = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
    for (std::size_t i = 0; i < d.image_count; ++i) {
      for (const char* c : cats) {
        if (std::bernoulli_distribution(0.3)(rng)) d.category_images[c].push_back(i);
      }
    }
    stats.datasets.push_back(std::move(d));
  }
  return stats;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("epoch composition at 1:4:8") {
    const auto stats = parse_dataset_stats(read_text_file(test::data_dir() / "stats" / "rvc.json"));
    const auto comp = epoch_composition(stats, parse_ratios("1:4:8"));
    CHECK(comp.at("OID") == 1800000);
    CHECK(comp.at("COCO") == 472000);
    CHECK(comp.at("MVD") == 14400);
    std::uint64_t total = 0;
    for (const auto& [tag, n] : comp) total += n;
    CHECK(total == 2286400);
  }

  TEST_CASE("all ratios one leave counts unchanged") {
    const auto stats = parse_dataset_stats(read_text_file(test::data_dir() / "stats" / "rvc.json"));
    const auto comp = epoch_composition(stats, parse_ratios("1:1:1"));
    for (const auto& d : stats.datasets) CHECK(comp.at(d.tag) == d.image_count);
  }

  TEST_CASE("empty dataset and missing ratio") {
    DatasetStats stats;
    stats.datasets.push_back({"COCO", 0, {}, {}});
    CHECK(epoch_composition(stats, parse_ratios("1:4:8")).at("COCO") == 0);
    CHECK(class_aware_schedule(stats, parse_ratios("1:4:8"), 0).entries.empty());
    stats.datasets.push_back({"SYNTH-X", 3, {}, {}});
    CHECK_THROWS_AS(epoch_composition(stats, parse_ratios("1:4:8")), SamplingError);
    CHECK(epoch_composition(stats, parse_ratios("COCO=2,SYNTH-X=3")).at("SYNTH-X") == 9);
  }

  TEST_CASE("ratio parsing") {
    CHECK(parse_ratios("1:4:8") == RepeatRatios{{"OID", 1}, {"COCO", 4}, {"MVD", 8}});
    CHECK(parse_ratios("OID=2") == RepeatRatios{{"OID", 2}});
    CHECK(parse_ratios("0:0:0").at("MVD") == 0);
    for (const char* bad : {"", "1:4", "1:4:8:2", "a:b:c", "-1:4:8", "1.5:4:8", "OID=", "=3", "OID=x"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_ratios(bad), SamplingError);
    }
  }

  TEST_CASE("three images at ratio two") {
    DatasetStats stats;
    DatasetStats::Dataset d;
    d.tag = "COCO";
    d.image_count = 3;
    d.category_images = {{"cat", {0, 1}}, {"dog", {2}}};
    stats.datasets.push_back(d);
    const auto plan = class_aware_schedule(stats, {{"COCO", 2}}, 7);
    CHECK(plan.entries.size() == 6);
    CHECK(multiset(plan) == Multiset{{{"COCO", "0"}, 2}, {{"COCO", "1"}, 2}, {{"COCO", "2"}, 2}});
    // The rotation alternates while both categories have copies left.
    REQUIRE(plan.entries.size() >= 2);
    CHECK(plan.entries[0].drawn_for == "cat");
    CHECK(plan.entries[1].drawn_for == "dog");
    CHECK(plan.warnings.empty());
  }

  TEST_CASE("images without categories fill the tail") {
    DatasetStats stats;
    stats.datasets.push_back({"OID", 4, {"w", "x", "y", "z"}, {{"cat", {1}}}});
    const auto plan = class_aware_schedule(stats, {{"OID", 3}}, 1);
    REQUIRE(plan.entries.size() == 12);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(plan.entries[i].image_id == "x");
      CHECK(plan.entries[i].drawn_for == "cat");
    }
    for (std::size_t i = 3; i < 12; ++i) CHECK_FALSE(plan.entries[i].drawn_for.has_value());
  }

  TEST_CASE("category without images warns") {
    DatasetStats stats;
    stats.datasets.push_back({"COCO", 2, {}, {{"ghost", {}}, {"cat", {0}}}});
    const auto plan = class_aware_schedule(stats, {{"COCO", 1}}, 0);
    REQUIRE(plan.warnings.size() == 1);
    CHECK(plan.warnings[0].find("ghost") != std::string::npos);
    CHECK(plan.entries.size() == 2);
  }

  TEST_CASE("bad stats are rejected") {
    CHECK_THROWS_AS(parse_dataset_stats("{}"), SamplingError);
    CHECK_THROWS_AS(parse_dataset_stats(R"({"datasets":[{"tag":"COCO"}]})"), SamplingError);
    CHECK_THROWS_AS(parse_dataset_stats(R"({"datasets":[{"tag":"COCO","image_count":1,
        "category_images":{"cat":[3]}}]})"),
                    SamplingError);
    CHECK_THROWS_AS(parse_dataset_stats(R"({"datasets":[{"tag":"COCO","image_count":1},
        {"tag":"COCO","image_count":2}]})"),
                    SamplingError);
  }

  TEST_CASE("property: plans are deterministic and preserve the ratio multiset") {
    std::mt19937_64 rng(9);
    for (int round = 0; round < 60; ++round) {
      const auto stats = random_stats(rng);
      RepeatRatios ratios{{"OID", unsigned(round % 3)}, {"COCO", unsigned(1 + round % 4)}, {"MVD", 2}};
      const auto a = class_aware_schedule(stats, ratios, round);
      const auto b = class_aware_schedule(stats, ratios, round);
      CHECK(a.entries == b.entries);
      std::uint64_t total = 0;
      for (const auto& [tag, n] : epoch_composition(stats, ratios)) total += n;
      CHECK(a.entries.size() == total);

      Multiset want;
      for (const auto& d : stats.datasets) {
        for (std::size_t i = 0; i < d.image_count; ++i) {
          if (ratios.at(d.tag)) want[{d.tag, d.image_id(i)}] = ratios.at(d.tag);
        }
      }
      CHECK(multiset(a) == want);
      CHECK(multiset(class_aware_schedule(stats, ratios, round + 1000)) == want);

      // Every drawn entry really contains the category it was drawn for.
      for (const auto& e : a.entries) {
        if (!e.drawn_for) continue;
        const auto& d = *std::find_if(stats.datasets.begin(), stats.datasets.end(),
                                      [&](const auto& x) { return x.tag == e.dataset_tag; });
        const auto& idx = d.category_images.at(*e.drawn_for);
        CHECK(std::find(idx.begin(), idx.end(), std::stoul(e.image_id)) != idx.end());
      }
    }
  }

  TEST_CASE("property: categories are drawn uniformly while all are active") {
    const auto config = parse_synthetic_config(
        read_text_file(test::data_dir() / "synthetic" / "default.json"), test::data_dir() / "synthetic");
    const auto space = build_space_from_directory(config.fixture_dir);
    std::vector<AnnotatedDataset> datasets;
    RepeatRatios ratios;
    for (auto& d : generate_synthetic(config, space)) {
      ratios[d.dataset.dataset_tag] = 2;
      datasets.push_back(std::move(d.dataset));
    }
    const auto stats = stats_from_datasets(datasets);
    std::vector<std::string> cats;
    for (const auto& d : stats.datasets) {
      for (const auto& [cat, idx] : d.category_images) cats.push_back(cat);
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    const std::size_t active = cats.size();
    std::map<std::string, std::size_t> counts;
    std::size_t drawn = 0;
    for (std::uint64_t epoch = 0; epoch < 10; ++epoch) {
      const auto plan = class_aware_schedule(stats, ratios, epoch);
      // Count the leading full rounds, before the first category drops out.
      std::size_t rounds = 0;
      for (;; ++rounds) {
        const std::size_t base = rounds * active;
        if (base + active > plan.entries.size()) break;
        std::vector<std::string> round;
        for (std::size_t k = 0; k < active; ++k) {
          const auto& e = plan.entries[base + k];
          round.push_back(e.drawn_for.value_or(""));
        }
        if (round != cats) break;
      }
      for (std::size_t i = 0; i < rounds * active; ++i) {
        ++counts[*plan.entries[i].drawn_for];
        ++drawn;
      }
    }
    REQUIRE(drawn > 0);
    const double uniform = double(drawn) / double(counts.size());
    for (const auto& [cat, n] : counts) {
      CAPTURE(cat);
      CHECK(double(n) >= 0.8 * uniform);
      CHECK(double(n) <= 1.2 * uniform);
    }
  }

  TEST_CASE("plan jsonl") {
    DatasetStats stats;
    stats.datasets.push_back({"MVD", 2, {"m0", "m1"}, {{"car", {0, 1}}}});
    const auto plan = class_aware_schedule(stats, {{"MVD", 1}}, 3);
    const std::string text = write_plan_jsonl(plan);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    std::size_t start = 0;
    for (const auto& e : plan.entries) {
      const std::size_t end = text.find('\n', start);
      const auto j = nlohmann::json::parse(text.substr(start, end - start));
      CHECK(j.at("dataset") == e.dataset_tag);
      CHECK(j.at("image_id") == e.image_id);
      CHECK(j.size() == 2);
      start = end + 1;
    }
  }
}
