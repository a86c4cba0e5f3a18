// Copyright 2026 The HPD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hpd/harness/synth.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>

#include "hpd/errors.hpp"

namespace hpd::harness {

namespace {

constexpr std::array<const char*, 45> kAttributeNames = {
    "Brand",     "Color",       "Material",   "Size",        "Weight",     "Model",      "Capacity",
    "Voltage",   "Power",       "Screen Size", "Resolution", "Width",      "Height",     "Depth",
    "Style",     "Pattern",     "Fit",        "Flavor",      "Scent",      "Pack Size",  "Age Range",
    "Gender",    "Season",      "Connectivity", "Battery",   "Storage",    "Memory",     "Processor",
    "Finish",    "Shape",       "Theme",      "Origin",      "Warranty",   "Compatibility", "Mount Type",
    "Wattage",   "Speed",       "Length",     "Volume",      "Sleeve",     "Neckline",   "Closure",
    "Heel Height", "Lens",      "Zoom"};

constexpr std::array<const char*, 8> kCategories = {"Television", "Sneakers", "Blender", "Backpack",
                                                    "Headphones", "Laptop",   "Lamp",    "Jacket"};

constexpr std::size_t kPoolSize = 6;

// Raw engine bits only, so corpora match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::string word(std::size_t len, bool capital) {
    static constexpr std::string_view consonants = "bcdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    std::string w;
    for (std::size_t i = 0; i < len; ++i) {
      const auto& set = (i % 2 == 0) ? consonants : vowels;
      w += set[below(set.size())];
    }
    if (capital && !w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

std::string default_instruction() {
  return "Extract the value of every listed attribute from each product. Write null if the value is not present.";
}

SynthCorpus synth_corpus(const SynthOptions& options) {
  require<ContractError>(options.categories >= 1, "synth: need at least one category");
  require<ContractError>(options.attrs_per_category >= 1 && options.attrs_per_category <= kAttributeNames.size(),
                         "synth: attrs_per_category must be in 1.." + std::to_string(kAttributeNames.size()));
  require<ContractError>(options.absent_fraction >= 0.0 && options.absent_fraction <= 1.0,
                         "synth: absent_fraction must be in [0, 1]");
  Rng rng(options.seed);
  SynthCorpus corpus;
  corpus.instruction = default_instruction();

  // Attribute set and value pools per category.
  std::vector<std::vector<std::vector<std::string>>> pools;
  for (std::size_t c = 0; c < options.categories; ++c) {
    AttributeSet set;
    set.category = kCategories[c % kCategories.size()];
    if (c >= kCategories.size()) set.category += " " + std::to_string(c / kCategories.size() + 1);
    std::vector<std::size_t> names(kAttributeNames.size());
    for (std::size_t i = 0; i < names.size(); ++i) names[i] = i;
    for (std::size_t i = 0; i < options.attrs_per_category; ++i) {
      std::swap(names[i], names[i + rng.below(names.size() - i)]);
      set.attributes.push_back(kAttributeNames[names[i]]);
    }
    std::vector<std::vector<std::string>> category_pools;
    for (std::size_t a = 0; a < set.attributes.size(); ++a) {
      std::vector<std::string> pool;
      while (pool.size() < kPoolSize) {
        std::string v = rng.word(2 + rng.below(5), true);
        if (std::find(pool.begin(), pool.end(), v) == pool.end()) pool.push_back(std::move(v));
      }
      category_pools.push_back(std::move(pool));
    }
    pools.push_back(std::move(category_pools));
    corpus.attribute_sets.push_back(std::move(set));
  }

  for (std::size_t p = 0; p < options.products; ++p) {
    const std::size_t c = p % options.categories;
    const AttributeSet& set = corpus.attribute_sets[c];
    DatasetRecord r;
    r.id = "p" + std::to_string(10000 + p).substr(1);
    r.category = set.category;
    r.labels.emplace();
    r.text = set.category + " " + rng.word(5, true) + ".";
    for (std::size_t a = 0; a < set.attributes.size(); ++a) {
      const auto& pool = pools[c][a];
      const bool absent = rng.unit() < options.absent_fraction;
      const std::string& value = pool[rng.below(pool.size())];
      if (absent) {
        r.labels->emplace_back(set.attributes[a], std::nullopt);
        corpus.script.set(r.id, set.attributes[a], options.null_aware ? "null" : pool[rng.below(pool.size())]);
      } else {
        r.labels->emplace_back(set.attributes[a], value);
        corpus.script.set(r.id, set.attributes[a], value);
        r.text += " " + set.attributes[a] + ": " + value + ".";
      }
    }
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

LayoutCase random_layout_case(std::uint64_t seed, std::size_t max_attrs, std::size_t max_docs, std::size_t k_max,
                              std::size_t max_value_len) {
  require<ContractError>(max_attrs >= 1 && max_docs >= 1, "random_layout_case: need at least one attribute and doc");
  require<ContractError>(max_value_len <= k_max, "random_layout_case: max_value_len exceeds k_max");
  Rng rng(seed);
  const std::size_t n_attrs = 1 + rng.below(max_attrs);
  const std::size_t n_docs = 1 + rng.below(max_docs);

  AttributeSet attrs{"cat", {}};
  std::set<std::string> seen;
  while (attrs.attributes.size() < n_attrs) {
    std::string name = rng.word(3 + rng.below(4), false);
    if (seen.insert(name).second) attrs.attributes.push_back(std::move(name));
  }
  std::vector<Document> docs;
  for (std::size_t j = 0; j < n_docs; ++j) {
    std::string text;
    const std::size_t words = 2 + rng.below(3);
    for (std::size_t w = 0; w < words; ++w) text += (w ? " " : "") + rng.word(2 + rng.below(5), w == 0);
    docs.push_back({"d" + std::to_string(j), "cat", text});
  }

  LayoutCase out;
  out.prompt = make_stacked_prompt("Extract values.", docs, attrs, k_max);
  for (const auto& slot : out.prompt.layout.slots) {
    const std::string value = rng.word(rng.below(max_value_len + 1), false);
    out.gold.push_back(tokenize(value));
    out.script.set(docs[slot.doc_index].id, attrs.attributes[slot.attr_index], value);
  }
  return out;
}

}  // namespace hpd::harness
