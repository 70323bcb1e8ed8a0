// Copyright 2026 The dprewrite Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings for the rewriting engine and its metrics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dprewrite/attack.h"
#include "dprewrite/cli.h"
#include "dprewrite/error.h"
#include "dprewrite/lm_provider.h"
#include "dprewrite/mechanism.h"
#include "dprewrite/metrics.h"
#include "dprewrite/prompt.h"
#include "dprewrite/rewriter.h"
#include "dprewrite/tokenizer.h"

namespace py = pybind11;

namespace dprewrite {
namespace {

PrivacyParams make_params(const std::string& strategy, std::optional<double> epsilon,
                          std::optional<std::size_t> top_k, double sensitivity) {
  const std::size_t k = top_k.value_or(kFullVocab);
  switch (parse_strategy(strategy)) {
    case Strategy::kNonDp:
      if (!top_k) throw DomainError("non-dp needs top_k");
      return PrivacyParams::non_dp(k);
    case Strategy::kDp:
      if (!epsilon) throw DomainError("dp needs epsilon");
      return PrivacyParams::dp(*epsilon, sensitivity, k);
    case Strategy::kQuasiDp:
      if (!epsilon) throw DomainError("quasi-dp needs epsilon");
      return PrivacyParams::quasi_dp(*epsilon, sensitivity, k);
  }
  throw DomainError("unknown strategy");
}

// Local rewriting model over `texts`: n-gram plus prompt words, mixed with a
// copy distribution.
class LocalRewriter {
 public:
  LocalRewriter(const std::vector<std::string>& texts, int order, double alpha,
                double copy_weight)
      : provider_(make_local_provider(
            train_ngram(texts, order, alpha, tokenize(build_prompt(""))),
            copy_weight)) {}

  py::dict rewrite(const std::string& text, const std::string& strategy,
                   std::optional<double> epsilon, std::optional<std::size_t> top_k,
                   std::uint64_t seed, std::size_t max_new_tokens,
                   std::pair<double, double> bounds) const {
    const ClipBounds clip(bounds.first, bounds.second);
    GenerationConfig config;
    config.max_new_tokens = max_new_tokens;
    const RewriteRecord out = [&] {
      py::gil_scoped_release release;
      return dprewrite::rewrite(text, make_params(strategy, epsilon, top_k, clip.sensitivity()),
                                clip, *provider_, config, seed);
    }();
    py::dict d;
    d["rewritten"] = out.rewritten;
    d["tokens"] = out.tokens;
    d["temperature"] = out.params.temperature();
    d["per_token_epsilon"] = out.per_token_epsilon;
    d["composed_epsilon"] = out.composed_epsilon;
    return d;
  }

  std::size_t vocab_size() const { return provider_->vocabulary().size(); }

 private:
  ProviderHandle provider_;
};

int main_entry(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"dprewrite"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = 0;
  {
    py::gil_scoped_release release;
    status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  py::print(out.str(), py::arg("end") = "");
  py::print(err.str(), py::arg("end") = "",
            py::arg("file") = py::module_::import("sys").attr("stderr"));
  return status;
}

}  // namespace
}  // namespace dprewrite

PYBIND11_MODULE(_core, m) {
  using namespace dprewrite;
  m.doc() = "Differentially private text rewriting engine";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.attr("DEFAULT_CLIP_LO") = default_clip_bounds().lo();
  m.attr("DEFAULT_CLIP_HI") = default_clip_bounds().hi();
  m.attr("DEFAULT_TOP_K") = kDefaultTopK;

  m.def("temperature_from_epsilon", &temperature_from_epsilon, py::arg("epsilon"),
        py::arg("sensitivity"));
  m.def("epsilon_from_temperature", &epsilon_from_temperature,
        py::arg("temperature"), py::arg("sensitivity"));
  m.def(
      "clip_logits",
      [](const std::vector<double>& logits, double lo, double hi) {
        return clip_logits(LogitVector{logits}, ClipBounds(lo, hi)).values;
      },
      py::arg("logits"), py::arg("lo"), py::arg("hi"));
  m.def(
      "softmax_with_temperature",
      [](const std::vector<double>& logits, double temperature) {
        return softmax_with_temperature(LogitVector{logits}, temperature).probabilities;
      },
      py::arg("logits"), py::arg("temperature"));
  m.def(
      "exponential_mechanism_distribution",
      [](const std::vector<double>& utilities, double epsilon, double sensitivity) {
        return exponential_mechanism_distribution(LogitVector{utilities}, epsilon,
                                                  sensitivity)
            .probabilities;
      },
      py::arg("utilities"), py::arg("epsilon"), py::arg("sensitivity"));
  m.def(
      "sample_tokens",
      [](const std::vector<double>& logits, const std::string& strategy,
         std::optional<double> epsilon, std::optional<std::size_t> top_k,
         std::size_t draws, std::uint64_t seed, std::pair<double, double> bounds) {
        const ClipBounds clip(bounds.first, bounds.second);
        const PrivacyParams params =
            make_params(strategy, epsilon, top_k, clip.sensitivity());
        Rng rng(seed);
        const LogitVector l{logits};
        std::vector<TokenId> out(draws);
        for (auto& id : out) id = select_token(l, params, clip, rng);
        return out;
      },
      py::arg("logits"), py::arg("strategy"), py::arg("epsilon") = py::none(),
      py::arg("top_k") = py::none(), py::arg("draws") = 1, py::arg("seed") = 0,
      py::arg("bounds") = std::make_pair(default_clip_bounds().lo(),
                                         default_clip_bounds().hi()));

  m.def(
      "bleu",
      [](const std::string& candidate, const std::string& reference, int max_n) {
        return bleu(candidate, reference, max_n);
      },
      py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4);
  m.def(
      "cosine_similarity",
      [](const std::string& a, const std::string& b) {
        return cosine_similarity(embed(a), embed(b));
      },
      py::arg("a"), py::arg("b"));
  m.def("relative_gain", &relative_gain, py::arg("cs_priv"), py::arg("cs_base"),
        py::arg("f1_priv"), py::arg("f1_base"));
  m.def("tokenize", [](const std::string& text) { return tokenize(text); },
        py::arg("text"));
  m.def("build_prompt", [](const std::string& text) { return build_prompt(text); },
        py::arg("text"));

  py::class_<LocalRewriter>(m, "LocalRewriter")
      .def(py::init<const std::vector<std::string>&, int, double, double>(),
           py::arg("texts"), py::arg("order") = 3, py::arg("alpha") = 0.1,
           py::arg("copy_weight") = 0.8)
      .def("rewrite", &LocalRewriter::rewrite, py::arg("text"),
           py::arg("strategy") = "dp", py::arg("epsilon") = py::none(),
           py::arg("top_k") = std::optional<std::size_t>(kDefaultTopK),
           py::arg("seed") = 0, py::arg("max_new_tokens") = 64,
           py::arg("bounds") = std::make_pair(default_clip_bounds().lo(),
                                              default_clip_bounds().hi()))
      .def_property_readonly("vocab_size", &LocalRewriter::vocab_size);

  m.def("main", &main_entry, py::arg("args"),
        "Runs the dprewrite command line with `args`; returns the exit status.");
}
