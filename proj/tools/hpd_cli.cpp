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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hpd/errors.hpp"
#include "hpd/harness/dataset.hpp"
#include "hpd/harness/metrics.hpp"
#include "hpd/harness/pipeline.hpp"
#include "hpd/harness/synth.hpp"
#include "hpd/masks.hpp"
#include "hpd/verify.hpp"

namespace {

using namespace hpd;
using namespace hpd::harness;

struct Corpus {
  std::vector<DatasetRecord> records;
  std::vector<AttributeSet> sets;
  ScriptTable script;
};

Corpus load_corpus(const std::string& dataset, const std::string& attributes_path, const std::string& script_path) {
  Corpus c;
  c.records = load_jsonl(dataset);
  c.sets = attributes_path.empty() ? derive_attribute_sets(c.records) : load_attribute_sets(attributes_path);
  c.script = script_path.empty() ? script_from_labels(c.records) : script_from_values(load_results(script_path));
  return c;
}

Corpus synth_as_corpus(const SynthOptions& so) {
  SynthCorpus s = synth_corpus(so);
  return {std::move(s.records), std::move(s.attribute_sets), std::move(s.script)};
}

DecodeBackend make_backend(const std::string& name, bool timed, const Model& model, const ScriptTable& script) {
  if (name == "tiny") return DecodeBackend::tiny(model);
  if (name == "scripted") return DecodeBackend::scripted(script, timed ? &model : nullptr);
  throw ConfigError("unknown backend '" + name + "' (expected tiny or scripted)");
}

void print_report(const std::string& label, const MetricsReport& r) {
  std::printf("%s precision=%.6f recall=%.6f f1=%.6f%s\n", label.c_str(), r.precision, r.recall, r.f1,
              r.degenerate ? " degenerate" : "");
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoul(item)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty list '" + s + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel value decoding for attribute extraction"};
  app.require_subcommand(1);

  // extract
  std::string dataset, mode = "hpd", backend_name = "scripted", out_path, attributes_path, script_path, template_path;
  std::size_t k_max = 30, docs = 6, batch = 1;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  bool timed = false;
  std::optional<std::size_t> max_new;
  auto* extract = app.add_subcommand("extract", "Extract attribute values from a JSONL dataset");
  extract->add_option("--dataset", dataset, "Input JSONL")->required()->check(CLI::ExistingFile);
  extract->add_option("--mode", mode, "ar or hpd")->check(CLI::IsMember({"ar", "hpd"}));
  extract->add_option("--backend", backend_name, "tiny or scripted")->check(CLI::IsMember({"tiny", "scripted"}));
  extract->add_option("--kmax", k_max, "Maximum value length");
  extract->add_option("--docs-per-prompt", docs, "Documents stacked per prompt");
  extract->add_option("--batch", batch, "Prompts per batch");
  extract->add_option("--seed", seed, "Model and sampling seed");
  extract->add_option("--temperature", temperature, "Sample with this temperature instead of greedy");
  extract->add_option("--max-new-tokens", max_new, "AR output budget per prompt");
  extract->add_option("--attributes", attributes_path, "Category -> attribute list JSON")->check(CLI::ExistingFile);
  extract->add_option("--script", script_path, "Results JSON planted into the scripted backend")
      ->check(CLI::ExistingFile);
  extract->add_option("--template", template_path, "Template file")->check(CLI::ExistingFile);
  extract->add_flag("--timed", timed, "Scripted backend also runs the tiny model for timing");
  extract->add_option("--out", out_path, "Results JSON")->required();

  // bench
  std::string sweep_docs = "1,2,4,6,8", sweep_batch = "1,2,4", csv_path, bench_dataset;
  std::size_t bench_products = 48, bench_attrs = 16, bench_kmax = 30;
  std::uint64_t bench_seed = 1;
  bool bench_timed = false;
  std::string bench_backend = "scripted";
  auto* bench = app.add_subcommand("bench", "Sweep documents per prompt and batch size");
  bench->add_option("--dataset", bench_dataset, "Input JSONL (default: synthetic corpus)")->check(CLI::ExistingFile);
  bench->add_option("--sweep-docs", sweep_docs, "Comma-separated J values");
  bench->add_option("--sweep-batch", sweep_batch, "Comma-separated batch sizes");
  bench->add_option("--backend", bench_backend, "tiny or scripted")->check(CLI::IsMember({"tiny", "scripted"}));
  bench->add_flag("--timed", bench_timed, "Scripted backend also runs the tiny model for timing");
  bench->add_option("--products", bench_products, "Synthetic corpus size");
  bench->add_option("--attrs", bench_attrs, "Synthetic attributes per category");
  bench->add_option("--kmax", bench_kmax, "Maximum value length");
  bench->add_option("--seed", bench_seed, "Corpus and model seed");
  bench->add_option("--csv", csv_path, "Output CSV (stdout when omitted)");

  // verify
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run every oracle suite; exit 1 on failure");
  verify_cmd->add_option("--seed", verify_seed, "Base seed");

  // score
  std::string pred_path, gold_path;
  auto* score = app.add_subcommand("score", "Exact-match F1 of predictions against gold labels");
  score->add_option("--pred", pred_path, "Results JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--gold", gold_path, "Labelled JSONL")->required()->check(CLI::ExistingFile);

  // judge-score
  std::string counts_path;
  auto* judge = app.add_subcommand("judge-score", "F1 from judge count files");
  judge->add_option("--counts", counts_path, "Counts JSON")->required()->check(CLI::ExistingFile);

  // cost
  double rate = 0.0, hourly = 30.13;
  std::size_t gpus = 8;
  auto* cost = app.add_subcommand("cost", "Rental cost per 1k products");
  cost->add_option("--rate", rate, "Products per second per GPU")->required();
  cost->add_option("--hourly", hourly, "Server rental per hour");
  cost->add_option("--gpus", gpus, "GPUs sharing the server");

  // synth
  SynthOptions so;
  std::string synth_out, synth_script;
  bool hallucinate = false;
  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled corpus");
  synth->add_option("--seed", so.seed, "Seed");
  synth->add_option("--categories", so.categories, "Categories");
  synth->add_option("--products", so.products, "Products");
  synth->add_option("--attrs", so.attrs_per_category, "Attributes per category");
  synth->add_option("--absent", so.absent_fraction, "Fraction of absent attributes")->check(CLI::Range(0.0, 1.0));
  synth->add_flag("--hallucinate", hallucinate, "Script wrong values for absent attributes instead of null");
  synth->add_option("--out", synth_out, "Output JSONL")->required();
  synth->add_option("--script-out", synth_script, "Also write the planted values as results JSON");

  // dump-masks
  std::uint64_t mask_seed = 0;
  std::string mask_dir = ".";
  bool mask_example = false;
  auto* dump = app.add_subcommand("dump-masks", "Write inference and training masks as PBM grids");
  dump->add_option("--seed", mask_seed, "Random layout seed");
  dump->add_flag("--example", mask_example, "Use the three-slot worked example");
  dump->add_option("--out-dir", mask_dir, "Directory for the .pbm files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      Corpus c = load_corpus(dataset, attributes_path, script_path);
      RunOptions ro;
      ro.mode = parse_mode(mode);
      ro.config.k_max = k_max;
      ro.config.docs_per_prompt = docs;
      ro.config.batch_size = batch;
      ro.config.seed = seed;
      ro.config.max_new_tokens = max_new;
      if (temperature > 0.0) ro.config.sampling = Sampling::with_temperature(temperature);
      if (!template_path.empty()) ro.format = OutputTemplate::load(template_path);
      const Model model(toy_config(seed));
      const DecodeBackend backend = make_backend(backend_name, timed, model, c.script);
      const RunOutput out = run_extraction(c.records, c.sets, backend, ro);
      json trace = trace_to_json(out.trace);
      trace["mode"] = mode;
      trace["backend"] = backend_name;
      trace["products"] = out.products;
      trace["prompts"] = out.prompts;
      trace["products_per_s"] = out.products_per_second();
      trace["parse_warnings"] = out.parsed.warnings;
      save_results(out_path, out.parsed.values, trace);
      std::printf("%zu products, %zu prompts, %zu forward passes, %.3f s\n", out.products, out.prompts,
                  out.trace.forward_passes, out.trace.wall_clock_s);
      for (const auto& m : out.parsed.messages) std::fprintf(stderr, "warning: %s\n", m.c_str());
    } else if (*bench) {
      Corpus c;
      if (bench_dataset.empty()) {
        SynthOptions bso;
        bso.seed = bench_seed;
        bso.categories = 1;
        bso.products = bench_products;
        bso.attrs_per_category = bench_attrs;
        c = synth_as_corpus(bso);
      } else {
        c = load_corpus(bench_dataset, "", "");
      }
      BenchOptions bo;
      bo.docs = parse_list(sweep_docs);
      bo.batches = parse_list(sweep_batch);
      bo.config.k_max = bench_kmax;
      bo.config.seed = bench_seed;
      const Model model(toy_config(bench_seed));
      const DecodeBackend backend = make_backend(bench_backend, bench_timed, model, c.script);
      const std::string csv = bench_csv(bench_sweep(c.records, c.sets, backend, bo));
      if (csv_path.empty()) std::fputs(csv.c_str(), stdout);
      else write_file(csv_path, csv);
    } else if (*verify_cmd) {
      bool ok = true;
      for (const auto& r : verify::run_all(verify_seed)) {
        std::printf("%s %-24s cases=%-4zu %.2fs %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.cases,
                    r.seconds, r.detail.c_str());
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    } else if (*score) {
      const auto gold = gold_labels(load_jsonl(gold_path));
      const auto pred = load_results(pred_path);
      print_report("exact", exact_f1(pred, gold));
    } else if (*judge) {
      for (const auto& [name, counts] : load_judge_counts(counts_path)) print_report(name, judge_f1(counts));
    } else if (*cost) {
      std::printf("%.6f\n", cost_per_1k(rate, hourly, gpus));
    } else if (*synth) {
      so.null_aware = !hallucinate;
      const SynthCorpus corpus = synth_corpus(so);
      save_jsonl(synth_out, corpus.records);
      if (!synth_script.empty()) {
        ValueTable planted;
        for (const auto& r : corpus.records) {
          for (const auto& [attr, value] : *r.labels) {
            const std::string* v = corpus.script.find(r.id, attr);
            planted[r.id][attr] = v ? std::optional<std::string>(*v) : std::nullopt;
          }
        }
        save_results(synth_script, planted);
      }
      std::printf("%zu records in %zu categories\n", corpus.records.size(), corpus.attribute_sets.size());
    } else if (*dump) {
      StackedPrompt prompt;
      std::vector<TokenSeq> gold;
      if (mask_example) {
        const auto ex = verify::worked_example();
        prompt = ex.prompt;
        for (const auto& s : prompt.layout.slots) {
          gold.push_back(tokenize(*ex.script.find(prompt.layout.doc_ids[s.doc_index],
                                                  prompt.layout.attributes[s.attr_index])));
        }
      } else {
        auto c = random_layout_case(mask_seed, 3, 1, 5, 4);
        prompt = std::move(c.prompt);
        gold = std::move(c.gold);
      }
      const auto seq = build_training_sequence(prompt.layout, prompt.plan, gold);
      const std::vector<std::uint8_t> live(seq.tokens.size(), 1);
      const auto dir = std::filesystem::path(mask_dir);
      write_file((dir / "training.pbm").string(), to_pbm(training_mask(prompt.layout, prompt.plan, gold)));
      write_file((dir / "position_causal.pbm").string(),
                 to_pbm(inference_mask(seq.positions, seq.positions, live, live)));
      const auto report = mask_equivalence_check(prompt.layout, prompt.plan, gold);
      std::printf("%zu tokens; equivalence %s\n", seq.tokens.size(), report.summary().c_str());
    }
  } catch (const hpd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
