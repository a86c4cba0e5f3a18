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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hpd/engine.hpp"
#include "hpd/errors.hpp"
#include "hpd/harness/dataset.hpp"
#include "hpd/harness/metrics.hpp"
#include "hpd/harness/pipeline.hpp"
#include "hpd/harness/synth.hpp"
#include "hpd/masks.hpp"
#include "hpd/verify.hpp"

namespace py = pybind11;
using namespace hpd;

namespace {

using PyValues = std::map<std::string, std::map<std::string, std::optional<std::string>>>;
using PyScript = std::map<std::string, std::map<std::string, std::string>>;

ScriptTable to_script(const PyScript& s) {
  ScriptTable t;
  for (const auto& [doc, row] : s)
    for (const auto& [attr, v] : row) t.set(doc, attr, v);
  return t;
}

std::vector<std::vector<bool>> to_rows(const AttentionMask& m) {
  std::vector<std::vector<bool>> rows(m.queries(), std::vector<bool>(m.keys()));
  for (std::size_t q = 0; q < m.queries(); ++q)
    for (std::size_t k = 0; k < m.keys(); ++k) rows[q][k] = m.allowed(q, k);
  return rows;
}

std::vector<TokenSeq> to_gold(const std::vector<std::string>& values) {
  std::vector<TokenSeq> gold;
  for (const auto& v : values) gold.push_back(tokenize(v));
  return gold;
}

py::dict report_dict(const harness::MetricsReport& r) {
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["degenerate"] = r.degenerate;
  d["true_positives"] = r.true_positives;
  d["false_positives"] = r.false_positives;
  d["false_negatives"] = r.false_negatives;
  return d;
}

// Decoded values are raw bytes; a tiny model may emit invalid UTF-8.
py::dict bytes_values(const PyValues& values) {
  py::dict out;
  for (const auto& [doc, row] : values) {
    py::dict r;
    for (const auto& [attr, v] : row) r[py::str(attr)] = v ? py::object(py::bytes(*v)) : py::object(py::none());
    out[py::str(doc)] = r;
  }
  return out;
}

DecodeBackend backend_for(const Model* model, const ScriptTable* script) {
  if (script != nullptr) return DecodeBackend::scripted(*script, model);
  if (model != nullptr) return DecodeBackend::tiny(*model);
  throw ContractError("pass a model, a script, or both");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parallel value decoding with gapped position ids";

  static py::exception<Error> base(m, "HpdError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  m.attr("PAD") = tokens::kPad;
  m.attr("BOS") = tokens::kBos;
  m.attr("DELIM") = tokens::kDelim;

  m.def("tokenize", [](const std::string& text) { return tokenize(text); });
  m.def("detokenize", [](const TokenSeq& seq) { return py::bytes(detokenize(seq)); });

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("num_layers", &ModelConfig::num_layers)
      .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
      .def_readwrite("num_heads", &ModelConfig::num_heads)
      .def_readwrite("head_dim", &ModelConfig::head_dim)
      .def_readwrite("rope_base", &ModelConfig::rope_base)
      .def_readwrite("max_position", &ModelConfig::max_position)
      .def_readwrite("seed", &ModelConfig::seed)
      .def_readwrite("delim_bias", &ModelConfig::delim_bias)
      .def("validate", &ModelConfig::validate);
  m.def("toy_config", &toy_config, py::arg("seed") = 0);
  m.def("random_model_config", &verify::random_model_config, py::arg("seed"));

  py::class_<Model>(m, "Model")
      .def(py::init<ModelConfig>())
      .def_property_readonly("config", &Model::config)
      .def("layer_checksum", &Model::layer_checksum)
      .def("forward", [](const Model& self, const TokenSeq& tokens, const std::vector<PositionId>& positions) {
        const std::vector<std::uint8_t> live(tokens.size(), 1);
        KvCache cache = self.make_cache();
        const Logits l = self.forward(tokens, positions, inference_mask(positions, positions, live, live), cache);
        std::vector<std::vector<float>> rows;
        for (std::size_t i = 0; i < l.rows; ++i) rows.emplace_back(l.row(i).begin(), l.row(i).end());
        return rows;
      }, "Logits of one cache-free forward under position-causal masking");

  py::class_<OutputTemplate>(m, "OutputTemplate")
      .def(py::init<>())
      .def_readwrite("prompt", &OutputTemplate::prompt)
      .def_readwrite("attribute", &OutputTemplate::attribute)
      .def_readwrite("document", &OutputTemplate::document)
      .def_readwrite("object_open", &OutputTemplate::object_open)
      .def_readwrite("row", &OutputTemplate::row)
      .def_readwrite("object_close", &OutputTemplate::object_close)
      .def_static("parse", &OutputTemplate::parse)
      .def_static("load", &OutputTemplate::load);

  py::class_<StackedPrompt>(m, "StackedPrompt")
      .def_property_readonly("tokens", [](const StackedPrompt& p) { return p.layout.tokens; })
      .def_property_readonly("position_ids", [](const StackedPrompt& p) { return p.plan.position_ids; })
      .def_property_readonly("k_max", [](const StackedPrompt& p) { return p.plan.k_max; })
      .def_property_readonly("prompt_length", [](const StackedPrompt& p) { return p.layout.prompt_length; })
      .def_property_readonly("doc_ids", [](const StackedPrompt& p) { return p.layout.doc_ids; })
      .def_property_readonly("attributes", [](const StackedPrompt& p) { return p.layout.attributes; })
      .def_property_readonly("anchors", [](const StackedPrompt& p) {
        std::vector<std::size_t> a;
        for (const auto& s : p.layout.slots) a.push_back(s.anchor);
        return a;
      })
      .def_property_readonly("text", [](const StackedPrompt& p) { return py::bytes(detokenize(p.layout.tokens)); });

  m.def(
      "make_stacked_prompt",
      [](const std::string& instruction, const std::vector<std::tuple<std::string, std::string, std::string>>& docs,
         const std::string& category, const std::vector<std::string>& attributes, std::size_t k_max,
         const OutputTemplate& format) {
        std::vector<Document> d;
        for (const auto& [id, cat, text] : docs) d.push_back({id, cat, text});
        return make_stacked_prompt(instruction, d, {category, attributes}, k_max, format);
      },
      py::arg("instruction"), py::arg("docs"), py::arg("category"), py::arg("attributes"), py::arg("k_max") = 30,
      py::arg("format") = OutputTemplate{}, "docs are (id, category, text) tuples");

  py::class_<DecodeConfig>(m, "DecodeConfig")
      .def(py::init<>())
      .def_readwrite("k_max", &DecodeConfig::k_max)
      .def_readwrite("docs_per_prompt", &DecodeConfig::docs_per_prompt)
      .def_readwrite("batch_size", &DecodeConfig::batch_size)
      .def_readwrite("seed", &DecodeConfig::seed)
      .def_readwrite("max_new_tokens", &DecodeConfig::max_new_tokens)
      .def("set_temperature", [](DecodeConfig& c, double t) { c.sampling = Sampling::with_temperature(t); })
      .def("set_greedy", [](DecodeConfig& c) { c.sampling = Sampling::greedy(); });

  py::class_<DecodeTrace>(m, "DecodeTrace")
      .def_readonly("forward_passes", &DecodeTrace::forward_passes)
      .def_readonly("tokens_emitted_per_pass", &DecodeTrace::tokens_emitted_per_pass)
      .def_readonly("query_tokens_per_pass", &DecodeTrace::query_tokens_per_pass)
      .def_readonly("pad_tokens_per_pass", &DecodeTrace::pad_tokens_per_pass)
      .def_readonly("steps_excluding_delimiter", &DecodeTrace::steps_excluding_delimiter)
      .def_readonly("wall_clock_s", &DecodeTrace::wall_clock_s)
      .def_readonly("peak_cache_entries", &DecodeTrace::peak_cache_entries);

  m.def(
      "hpd_decode",
      [](const std::vector<StackedPrompt>& prompts, const DecodeConfig& config, const Model* model,
         std::optional<PyScript> script) {
        std::optional<ScriptTable> table;
        if (script) table = to_script(*script);
        const auto res = hpd_decode(backend_for(model, table ? &*table : nullptr), prompts, config);
        py::list values;
        for (const auto& r : res.results) {
          PyValues v;
          for (const auto& e : r.entries) v[e.doc_id][e.attribute] = e.value;
          values.append(bytes_values(v));
        }
        return std::make_pair(values, res.trace);
      },
      py::arg("prompts"), py::arg("config"), py::arg("model") = nullptr, py::arg("script") = py::none(),
      "Returns (per-prompt {doc: {attr: bytes or None}}, trace)");

  m.def(
      "ar_decode",
      [](const std::vector<StackedPrompt>& prompts, const DecodeConfig& config, const Model* model,
         std::optional<PyScript> script) {
        std::optional<ScriptTable> table;
        if (script) table = to_script(*script);
        const auto res = ar_decode(backend_for(model, table ? &*table : nullptr), prompts, config);
        std::vector<py::bytes> texts;
        for (const auto& o : res.outputs) texts.emplace_back(detokenize(o.tokens));
        return std::make_pair(texts, res.trace);
      },
      py::arg("prompts"), py::arg("config"), py::arg("model") = nullptr, py::arg("script") = py::none());

  m.def("oracle_full_recompute", [](const Model& model, const StackedPrompt& prompt, const DecodeConfig& config) {
    std::vector<py::bytes> values;
    for (const auto& s : oracle_full_recompute(model, prompt, config)) values.emplace_back(detokenize(s.emitted));
    return values;
  });

  m.def("inference_mask", [](const std::vector<PositionId>& q, const std::vector<PositionId>& k,
                             const std::vector<std::uint8_t>& live) { return to_rows(inference_mask(q, k, live)); });
  m.def("training_mask", [](const StackedPrompt& p, const std::vector<std::string>& gold) {
    return to_rows(training_mask(p.layout, p.plan, to_gold(gold)));
  });
  m.def("mask_equivalence_check", [](const StackedPrompt& p, const std::vector<std::string>& gold) {
    const auto r = mask_equivalence_check(p.layout, p.plan, to_gold(gold));
    return std::make_pair(r.equal, r.summary());
  });

  m.def("exact_f1", [](const PyValues& pred, const PyValues& gold) { return report_dict(harness::exact_f1(pred, gold)); });
  m.def(
      "judge_f1",
      [](std::uint64_t c, std::uint64_t cn, std::uint64_t i, std::uint64_t mi, std::uint64_t h) {
        return report_dict(harness::judge_f1({c, cn, i, mi, h}));
      },
      py::arg("C"), py::arg("CN"), py::arg("I"), py::arg("M"), py::arg("H"));
  m.def("cost_per_1k", &harness::cost_per_1k, py::arg("products_per_second_per_gpu"), py::arg("hourly_rate"),
        py::arg("num_gpus"));
  m.def("rate_for_cost", &harness::rate_for_cost, py::arg("cost"), py::arg("hourly_rate"), py::arg("num_gpus"));

  m.def(
      "synth_corpus",
      [](std::uint64_t seed, std::size_t categories, std::size_t products, std::size_t attrs, double absent,
         bool null_aware) {
        harness::SynthOptions so{seed, categories, products, attrs, absent, null_aware};
        const auto c = harness::synth_corpus(so);
        py::dict out;
        out["jsonl"] = harness::to_jsonl(c.records);
        py::dict sets;
        for (const auto& s : c.attribute_sets) sets[py::str(s.category)] = s.attributes;
        out["attribute_sets"] = sets;
        PyScript script;
        for (const auto& r : c.records)
          for (const auto& [attr, v] : *r.labels) script[r.id][attr] = *c.script.find(r.id, attr);
        out["script"] = script;
        return out;
      },
      py::arg("seed") = 1, py::arg("categories") = 2, py::arg("products") = 24, py::arg("attrs_per_category") = 12,
      py::arg("absent_fraction") = 0.0, py::arg("null_aware") = true);

  m.def(
      "run_extraction",
      [](const std::string& jsonl, const std::string& mode, std::optional<PyScript> script, const Model* model,
         std::size_t k_max, std::size_t docs_per_prompt, std::size_t batch_size) {
        const auto records = harness::parse_jsonl(jsonl);
        const auto sets = harness::derive_attribute_sets(records);
        const ScriptTable table = script ? to_script(*script) : harness::script_from_labels(records);
        harness::RunOptions ro;
        ro.mode = harness::parse_mode(mode);
        ro.config.k_max = k_max;
        ro.config.docs_per_prompt = docs_per_prompt;
        ro.config.batch_size = batch_size;
        const bool scripted = model == nullptr || script.has_value();
        const auto out = harness::run_extraction(records, sets, backend_for(model, scripted ? &table : nullptr), ro);
        const auto gold = harness::gold_labels(records);
        py::dict d;
        d["values"] = bytes_values(out.parsed.values);
        d["trace"] = out.trace;
        d["parse_warnings"] = out.parsed.warnings;
        d["metrics"] = report_dict(harness::exact_f1(out.parsed.values, gold));
        return d;
      },
      py::arg("jsonl"), py::arg("mode") = "hpd", py::arg("script") = py::none(), py::arg("model") = nullptr,
      py::arg("k_max") = 30, py::arg("docs_per_prompt") = 6, py::arg("batch_size") = 1,
      "Runs a labelled JSONL corpus end to end and scores it. Without a model the labels are scripted.");
}
