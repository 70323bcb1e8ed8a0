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

#ifndef DPREWRITE_EVALUATION_H_
#define DPREWRITE_EVALUATION_H_

// One evaluation row per (strategy, parameter) and the merged results table
// with columns Baseline | DP | Quasi-DP | Non-DP.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dprewrite/attack.h"
#include "dprewrite/corpus.h"
#include "dprewrite/lm_provider.h"
#include "dprewrite/rewriter.h"

namespace dprewrite {

inline constexpr std::string_view kBaselineStrategy = "baseline";
inline constexpr std::string_view kBaselineParam = "inf";

// F1 values in percent.
struct AttributeF1 {
  double static_f1 = 0.0;
  double adaptive_f1 = 0.0;
};

struct EvalRow {
  std::string strategy;  // "baseline", "dp", "quasi-dp" or "non-dp"
  std::string param;     // epsilon or k label; "inf" for the baseline
  double cs = 0.0;
  double bleu = 0.0;
  std::optional<double> ppl;
  AttributeF1 author, gender, age;
  // Absent for the baseline.
  std::optional<double> gamma_author, gamma_gender, gamma_age, gamma_sum;
  int models_averaged = 1;
  std::string attacker;

  bool is_baseline() const { return strategy == kBaselineStrategy; }
};

inline constexpr std::array<std::string_view, 17> kEvalColumns = {
    "strategy",       "param",          "CS",
    "BLEU",           "PPL",            "Author F1 (s)",
    "Author F1 (a)",  "Gender F1 (s)",  "Gender F1 (a)",
    "Age F1 (s)",     "Age F1 (a)",     "Author gamma",
    "Gender gamma",   "Age gamma",      "Sum gamma",
    "models_averaged", "attacker"};

// Utility of the originals against themselves and attackers trained and
// evaluated on original text. Static and adaptive F1 coincide.
EvalRow evaluate_baseline(const Corpus& original, const LogitsProvider& lm,
                          const AttackConfig& attack);

// Utility of the rewrites, static and adaptive attacks for every attribute
// (run concurrently), and gammas against cs_base = 1 and the adaptive
// baseline F1 of each attribute.
EvalRow evaluate_privatized(const Corpus& original,
                            const std::vector<PrivatizedDocument>& docs,
                            const LogitsProvider& lm,
                            const AttackConfig& attack);

// Full-precision CSV, one line per row under a kEvalColumns header.
std::string write_eval_csv(const std::vector<EvalRow>& rows);
// Throws FormatError on a missing column or an unparsable number. Empty or
// "-" cells read as absent optionals.
std::vector<EvalRow> read_eval_csv(std::string_view text);

struct ResultsTable {
  std::vector<EvalRow> columns;
};

// Orders columns Baseline, DP, Quasi-DP, Non-DP; within a group epsilon
// ascends and k descends. Rows sharing (strategy, param), e.g. from two
// datasets, are averaged field by field. With a baseline present, gammas are
// recomputed from CS and adaptive F1; otherwise the given gammas are kept.
ResultsTable assemble_table(const std::vector<EvalRow>& rows);

// Metric rows by setting columns. Both renderings use the same cell strings:
// CS and BLEU to 3 decimals, PPL to 0, F1 to 2, gammas to 3, "-" if absent.
std::vector<std::vector<std::string>> table_cells(const ResultsTable& table);
std::string render_csv(const ResultsTable& table);
std::string render_markdown(const ResultsTable& table);

}  // namespace dprewrite

#endif  // DPREWRITE_EVALUATION_H_
