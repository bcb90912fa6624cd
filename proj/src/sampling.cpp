#include "hierdet/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <set>

#include "json.hpp"

namespace hierdet {

using nlohmann::json;

std::string DatasetStats::Dataset::image_id(std::size_t i) const {
  return image_ids.empty() ? std::to_string(i) : image_ids.at(i);
}

namespace {

unsigned parse_unsigned(std::string_view s) {
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw SamplingError("invalid ratio '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

unsigned ratio_for(const RepeatRatios& ratios, const std::string& tag) {
  auto it = ratios.find(tag);
  if (it == ratios.end()) throw SamplingError("missing repeat ratio for dataset " + tag);
  return it->second;
}

void check_stats(const DatasetStats& stats) {
  std::set<std::string> tags;
  for (const auto& d : stats.datasets) {
    if (!tags.insert(d.tag).second) throw SamplingError("duplicate dataset " + d.tag);
    if (!d.image_ids.empty() && d.image_ids.size() != d.image_count) {
      throw SamplingError("dataset " + d.tag + ": image_ids size differs from image_count");
    }
    for (const auto& [cat, idx] : d.category_images) {
      for (std::size_t i : idx) {
        if (i >= d.image_count) {
          throw SamplingError("dataset " + d.tag + ": category '" + cat +
                              "' references image index " + std::to_string(i));
        }
      }
    }
  }
}

}  // namespace

RepeatRatios parse_ratios(std::string_view text) {
  RepeatRatios out;
  if (text.find('=') != std::string_view::npos) {
    for (std::string_view part : split(text, ',')) {
      std::size_t eq = part.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw SamplingError("invalid ratio entry '" + std::string(part) + "'");
      }
      out[std::string(part.substr(0, eq))] = parse_unsigned(part.substr(eq + 1));
    }
    return out;
  }
  auto parts = split(text, ':');
  if (parts.size() != 3) throw SamplingError("ratios must be o:c:m, got '" + std::string(text) + "'");
  out["OID"] = parse_unsigned(parts[0]);
  out["COCO"] = parse_unsigned(parts[1]);
  out["MVD"] = parse_unsigned(parts[2]);
  return out;
}

std::map<std::string, std::uint64_t> epoch_composition(const DatasetStats& stats,
                                                       const RepeatRatios& ratios) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& d : stats.datasets) {
    out[d.tag] = static_cast<std::uint64_t>(d.image_count) * ratio_for(ratios, d.tag);
  }
  return out;
}

SamplePlan class_aware_schedule(const DatasetStats& stats, const RepeatRatios& ratios,
                                std::uint64_t seed) {
  check_stats(stats);
  SamplePlan plan;
  struct Slot {
    std::size_t dataset;
    std::size_t image;
  };
  std::vector<std::vector<unsigned>> remaining(stats.datasets.size());
  std::vector<std::string> tags;
  for (std::size_t d = 0; d < stats.datasets.size(); ++d) {
    const auto& ds = stats.datasets[d];
    const unsigned r = ratio_for(ratios, ds.tag);
    plan.repeat_ratios[ds.tag] = r;
    remaining[d].assign(ds.image_count, r);
  }

  // Ratio-expanded copies of each category's images, categories in name order.
  std::map<std::string, std::vector<Slot>> pools;
  for (std::size_t d = 0; d < stats.datasets.size(); ++d) {
    const auto& ds = stats.datasets[d];
    for (const auto& [cat, idx] : ds.category_images) {
      auto& pool = pools[cat];
      std::set<std::size_t> unique(idx.begin(), idx.end());
      for (std::size_t i : unique) {
        for (unsigned k = 0; k < remaining[d][i]; ++k) pool.push_back({d, i});
      }
    }
  }
  std::vector<std::pair<std::string, std::vector<Slot>>> rotation;
  for (auto& [cat, pool] : pools) {
    if (pool.empty()) {
      plan.warnings.push_back("category '" + cat + "' has no images; skipped");
      continue;
    }
    rotation.emplace_back(cat, std::move(pool));
  }

  std::mt19937_64 rng(seed);
  auto emit = [&](const Slot& s, std::optional<std::string> drawn_for) {
    --remaining[s.dataset][s.image];
    plan.entries.push_back({stats.datasets[s.dataset].tag,
                            stats.datasets[s.dataset].image_id(s.image), std::move(drawn_for)});
  };
  while (!rotation.empty()) {
    for (auto& [cat, pool] : rotation) {
      while (!pool.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t j = pick(rng);
        const Slot s = pool[j];
        pool[j] = pool.back();
        pool.pop_back();
        if (remaining[s.dataset][s.image] == 0) continue;  // consumed by another category
        emit(s, cat);
        break;
      }
    }
    std::erase_if(rotation, [](const auto& entry) { return entry.second.empty(); });
  }

  std::vector<Slot> tail;
  for (std::size_t d = 0; d < remaining.size(); ++d) {
    for (std::size_t i = 0; i < remaining[d].size(); ++i) {
      for (unsigned k = 0; k < remaining[d][i]; ++k) tail.push_back({d, i});
    }
  }
  std::shuffle(tail.begin(), tail.end(), rng);
  for (const Slot& s : tail) emit(s, std::nullopt);
  return plan;
}

DatasetStats stats_from_datasets(const std::vector<AnnotatedDataset>& datasets) {
  DatasetStats stats;
  for (const auto& ds : datasets) {
    DatasetStats::Dataset d;
    d.tag = ds.dataset_tag;
    d.image_count = ds.images.size();
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
      d.image_ids.push_back(ds.images[i].image_id);
      std::set<std::string> seen;
      for (const auto& box : ds.images[i].boxes) {
        if (seen.insert(box.category_name).second) d.category_images[box.category_name].push_back(i);
      }
    }
    stats.datasets.push_back(std::move(d));
  }
  return stats;
}

DatasetStats parse_dataset_stats(std::string_view json_text) {
  DatasetStats stats;
  try {
    json j = json::parse(json_text.begin(), json_text.end());
    for (const auto& jd : j.at("datasets")) {
      DatasetStats::Dataset d;
      d.tag = jd.at("tag").get<std::string>();
      d.image_count = jd.at("image_count").get<std::size_t>();
      if (jd.contains("image_ids")) d.image_ids = jd["image_ids"].get<std::vector<std::string>>();
      if (jd.contains("category_images")) {
        d.category_images =
            jd["category_images"].get<std::map<std::string, std::vector<std::size_t>>>();
      }
      stats.datasets.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw SamplingError(std::string("invalid dataset stats: ") + e.what());
  }
  check_stats(stats);
  return stats;
}

std::string write_plan_jsonl(const SamplePlan& plan) {
  std::string out;
  for (const auto& e : plan.entries) {
    out += json{{"dataset", e.dataset_tag}, {"image_id", e.image_id}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace hierdet
