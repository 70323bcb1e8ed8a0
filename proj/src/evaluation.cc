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

#include "dprewrite/evaluation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <limits>
#include <map>

#include "dprewrite/csv.h"
#include "dprewrite/error.h"
#include "dprewrite/metrics.h"

namespace dprewrite {
namespace {

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string full(const std::optional<double>& v) { return v ? full(*v) : ""; }

std::string fixed(double v, int decimals) {
  if (std::fabs(v) < 0.5 * std::pow(10.0, -decimals)) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string fixed(const std::optional<double>& v, int decimals) {
  return v ? fixed(*v, decimals) : "-";
}

double parse_number(const std::string& cell, std::string_view column) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("column '" + std::string(column) +
                      "': not a number: '" + cell + "'");
  }
  return v;
}

std::optional<double> parse_optional(const std::string& cell,
                                     std::string_view column) {
  if (cell.empty() || cell == "-") return std::nullopt;
  return parse_number(cell, column);
}

int group_of(std::string_view strategy) {
  if (strategy == kBaselineStrategy) return 0;
  if (strategy == "dp") return 1;
  if (strategy == "quasi-dp") return 2;
  if (strategy == "non-dp") return 3;
  throw FormatError("unknown strategy '" + std::string(strategy) + "'");
}

constexpr std::array<std::string_view, 4> kGroupNames = {"Baseline", "DP",
                                                         "Quasi-DP", "Non-DP"};

std::optional<double> mean_of(const std::vector<const EvalRow*>& rows,
                              std::optional<double> EvalRow::*field) {
  double sum = 0.0;
  for (const EvalRow* r : rows) {
    if (!(r->*field)) return std::nullopt;
    sum += *(r->*field);
  }
  return sum / static_cast<double>(rows.size());
}

template <typename F>
double mean_by(const std::vector<const EvalRow*>& rows, F get) {
  double sum = 0.0;
  for (const EvalRow* r : rows) sum += get(*r);
  return sum / static_cast<double>(rows.size());
}

EvalRow average_rows(const std::vector<const EvalRow*>& rows) {
  EvalRow out = *rows.front();
  if (rows.size() == 1) return out;
  out.cs = mean_by(rows, [](const EvalRow& r) { return r.cs; });
  out.bleu = mean_by(rows, [](const EvalRow& r) { return r.bleu; });
  out.ppl = mean_of(rows, &EvalRow::ppl);
  auto avg_attr = [&](AttributeF1 EvalRow::*attr) {
    return AttributeF1{
        mean_by(rows, [&](const EvalRow& r) { return (r.*attr).static_f1; }),
        mean_by(rows, [&](const EvalRow& r) { return (r.*attr).adaptive_f1; })};
  };
  out.author = avg_attr(&EvalRow::author);
  out.gender = avg_attr(&EvalRow::gender);
  out.age = avg_attr(&EvalRow::age);
  out.gamma_author = mean_of(rows, &EvalRow::gamma_author);
  out.gamma_gender = mean_of(rows, &EvalRow::gamma_gender);
  out.gamma_age = mean_of(rows, &EvalRow::gamma_age);
  out.gamma_sum = mean_of(rows, &EvalRow::gamma_sum);
  return out;
}

void set_gammas(EvalRow& row, double cs_base, const EvalRow& baseline) {
  const GainReport g = compute_gains(
      row.cs, cs_base,
      {row.author.adaptive_f1, baseline.author.adaptive_f1},
      {row.gender.adaptive_f1, baseline.gender.adaptive_f1},
      {row.age.adaptive_f1, baseline.age.adaptive_f1});
  row.gamma_author = g.author;
  row.gamma_gender = g.gender;
  row.gamma_age = g.age;
  row.gamma_sum = g.sum;
}

}  // namespace

EvalRow evaluate_baseline(const Corpus& original, const LogitsProvider& lm,
                          const AttackConfig& attack) {
  const UtilityReport u = utility_report(original, original, lm);
  EvalRow row;
  row.strategy = std::string(kBaselineStrategy);
  row.param = std::string(kBaselineParam);
  row.cs = u.mean_cs;
  row.bleu = u.mean_bleu;
  row.ppl = u.mean_ppl;
  row.models_averaged = u.models_averaged;
  row.attacker = std::string(kAttackerName);

  std::array<Attribute, 3> attributes{Attribute::kAuthor, Attribute::kGender,
                                      Attribute::kAge};
  std::array<std::future<AttackReport>, 3> runs;
  for (std::size_t i = 0; i < 3; ++i) {
    AttackConfig cfg = attack;
    cfg.attribute = attributes[i];
    runs[i] = std::async(std::launch::async, [&original, cfg] {
      return run_adaptive_attack(original, original, cfg);
    });
  }
  AttributeF1* slots[] = {&row.author, &row.gender, &row.age};
  for (std::size_t i = 0; i < 3; ++i) {
    const double f1 = 100.0 * runs[i].get().baseline_f1;
    *slots[i] = {f1, f1};
  }
  return row;
}

EvalRow evaluate_privatized(const Corpus& original,
                            const std::vector<PrivatizedDocument>& docs,
                            const LogitsProvider& lm,
                            const AttackConfig& attack) {
  if (docs.empty()) throw DomainError("no privatized documents to evaluate");
  const Corpus privatized = rewritten_corpus(docs);
  const UtilityReport u = utility_report(original, privatized, lm);
  EvalRow row;
  row.strategy = std::string(to_string(docs.front().record.params.strategy()));
  row.param = param_label(docs.front().record.params);
  row.cs = u.mean_cs;
  row.bleu = u.mean_bleu;
  for (const UtilityRow& r : u.rows) {
    if (r.ppl) {
      row.ppl = u.mean_ppl;
      break;
    }
  }
  row.models_averaged = u.models_averaged;
  row.attacker = std::string(kAttackerName);

  std::array<Attribute, 3> attributes{Attribute::kAuthor, Attribute::kGender,
                                      Attribute::kAge};
  std::array<std::future<AttackReport>, 6> runs;
  for (std::size_t i = 0; i < 3; ++i) {
    AttackConfig cfg = attack;
    cfg.attribute = attributes[i];
    runs[2 * i] = std::async(std::launch::async, [&, cfg] {
      return run_static_attack(original, privatized, cfg);
    });
    runs[2 * i + 1] = std::async(std::launch::async, [&, cfg] {
      return run_adaptive_attack(original, privatized, cfg);
    });
  }
  AttributeF1* slots[] = {&row.author, &row.gender, &row.age};
  AttributeScores scores[3];
  for (std::size_t i = 0; i < 3; ++i) {
    const AttackReport s = runs[2 * i].get();
    const AttackReport a = runs[2 * i + 1].get();
    *slots[i] = {100.0 * s.mean_f1, 100.0 * a.mean_f1};
    scores[i] = {100.0 * a.mean_f1, 100.0 * a.baseline_f1};
  }
  const GainReport g =
      compute_gains(row.cs, 1.0, scores[0], scores[1], scores[2]);
  row.gamma_author = g.author;
  row.gamma_gender = g.gender;
  row.gamma_age = g.age;
  row.gamma_sum = g.sum;
  return row;
}

std::string write_eval_csv(const std::vector<EvalRow>& rows) {
  std::vector<std::string> header(kEvalColumns.begin(), kEvalColumns.end());
  std::string out = csv_line(header);
  for (const EvalRow& r : rows) {
    const std::vector<std::string> cells = {
        r.strategy,
        r.param,
        full(r.cs),
        full(r.bleu),
        full(r.ppl),
        full(r.author.static_f1),
        full(r.author.adaptive_f1),
        full(r.gender.static_f1),
        full(r.gender.adaptive_f1),
        full(r.age.static_f1),
        full(r.age.adaptive_f1),
        full(r.gamma_author),
        full(r.gamma_gender),
        full(r.gamma_age),
        full(r.gamma_sum),
        std::to_string(r.models_averaged),
        r.attacker};
    out += csv_line(cells);
  }
  return out;
}

std::vector<EvalRow> read_eval_csv(std::string_view text) {
  const std::vector<CsvRow> table = parse_csv(text);
  if (table.empty()) throw FormatError("empty evaluation CSV");
  const CsvRow& header = table.front();
  std::map<std::string_view, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  // models_averaged and attacker are optional so that hand-written tables
  // with only the metric columns can be read.
  for (std::size_t i = 0; i < 11; ++i) {
    if (!column.contains(kEvalColumns[i])) {
      throw FormatError("evaluation CSV lacks column '" +
                        std::string(kEvalColumns[i]) + "'");
    }
  }
  std::vector<EvalRow> rows;
  for (std::size_t line = 1; line < table.size(); ++line) {
    const CsvRow& cells = table[line];
    if (cells.size() == 1 && cells[0].empty()) continue;
    auto cell = [&](std::string_view name) -> std::string {
      auto it = column.find(name);
      if (it == column.end() || it->second >= cells.size()) return "";
      return cells[it->second];
    };
    auto number = [&](std::string_view name) {
      return parse_number(cell(name), name);
    };
    auto optional = [&](std::string_view name) {
      return parse_optional(cell(name), name);
    };
    try {
      EvalRow r;
      r.strategy = cell("strategy");
      group_of(r.strategy);
      r.param = cell("param");
      r.cs = number("CS");
      r.bleu = number("BLEU");
      r.ppl = optional("PPL");
      r.author = {number("Author F1 (s)"), number("Author F1 (a)")};
      r.gender = {number("Gender F1 (s)"), number("Gender F1 (a)")};
      r.age = {number("Age F1 (s)"), number("Age F1 (a)")};
      r.gamma_author = optional("Author gamma");
      r.gamma_gender = optional("Gender gamma");
      r.gamma_age = optional("Age gamma");
      r.gamma_sum = optional("Sum gamma");
      const std::string models = cell("models_averaged");
      r.models_averaged =
          models.empty() ? 1
                         : static_cast<int>(parse_number(models, "models_averaged"));
      r.attacker = cell("attacker");
      rows.push_back(std::move(r));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line + 1) + ": " + e.what());
    }
  }
  return rows;
}

ResultsTable assemble_table(const std::vector<EvalRow>& rows) {
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const EvalRow*>>
      grouped;
  for (const EvalRow& r : rows) {
    group_of(r.strategy);
    auto key = std::make_pair(r.strategy, r.param);
    auto& bucket = grouped[key];
    if (bucket.empty()) keys.push_back(key);
    bucket.push_back(&r);
  }
  // Strongest privacy first: epsilon ascending, k descending. Non-numeric
  // labels follow in first-appearance order.
  auto rank = [](const std::pair<std::string, std::string>& key) {
    char* end = nullptr;
    const double v = std::strtod(key.second.c_str(), &end);
    if (key.second.empty() || *end != '\0') {
      return std::numeric_limits<double>::infinity();
    }
    return key.first == "non-dp" ? -v : v;
  };
  std::stable_sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    const int ga = group_of(a.first), gb = group_of(b.first);
    return ga != gb ? ga < gb : rank(a) < rank(b);
  });
  ResultsTable table;
  for (const auto& key : keys) table.columns.push_back(average_rows(grouped[key]));
  if (!table.columns.empty() && table.columns.front().is_baseline()) {
    const EvalRow baseline = table.columns.front();
    for (EvalRow& c : table.columns) {
      if (c.is_baseline()) {
        c.gamma_author = c.gamma_gender = c.gamma_age = c.gamma_sum =
            std::nullopt;
      } else {
        set_gammas(c, baseline.cs, baseline);
      }
    }
  }
  return table;
}

std::vector<std::vector<std::string>> table_cells(const ResultsTable& table) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{""};
  std::vector<std::string> params{"epsilon/k value"};
  for (const EvalRow& c : table.columns) {
    head.emplace_back(kGroupNames[group_of(c.strategy)]);
    params.push_back(c.is_baseline() ? "inf" : c.param);
  }
  cells.push_back(std::move(head));
  cells.push_back(std::move(params));

  auto add = [&](std::string name, auto value) {
    std::vector<std::string> line{std::move(name)};
    for (const EvalRow& c : table.columns) line.push_back(value(c));
    cells.push_back(std::move(line));
  };
  add("CS", [](const EvalRow& r) { return fixed(r.cs, 3); });
  add("BLEU", [](const EvalRow& r) { return fixed(r.bleu, 3); });
  add("PPL", [](const EvalRow& r) { return fixed(r.ppl, 0); });
  add("Author F1 (s)", [](const EvalRow& r) { return fixed(r.author.static_f1, 2); });
  add("Author F1 (a)", [](const EvalRow& r) { return fixed(r.author.adaptive_f1, 2); });
  add("Gender F1 (s)", [](const EvalRow& r) { return fixed(r.gender.static_f1, 2); });
  add("Gender F1 (a)", [](const EvalRow& r) { return fixed(r.gender.adaptive_f1, 2); });
  add("Age F1 (s)", [](const EvalRow& r) { return fixed(r.age.static_f1, 2); });
  add("Age F1 (a)", [](const EvalRow& r) { return fixed(r.age.adaptive_f1, 2); });
  add("Author gamma", [](const EvalRow& r) { return fixed(r.gamma_author, 3); });
  add("Gender gamma", [](const EvalRow& r) { return fixed(r.gamma_gender, 3); });
  add("Age gamma", [](const EvalRow& r) { return fixed(r.gamma_age, 3); });
  add("Sum gamma", [](const EvalRow& r) { return fixed(r.gamma_sum, 3); });
  return cells;
}

std::string render_csv(const ResultsTable& table) {
  std::string out;
  for (const auto& line : table_cells(table)) out += csv_line(line);
  return out;
}

std::string render_markdown(const ResultsTable& table) {
  const auto cells = table_cells(table);
  std::string out;
  auto emit = [&](const std::vector<std::string>& line) {
    out += "|";
    for (const auto& c : line) out += " " + c + " |";
    out += "\n";
  };
  emit(cells.front());
  out += "|";
  for (std::size_t i = 0; i < cells.front().size(); ++i) out += " --- |";
  out += "\n";
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out;
}

}  // namespace dprewrite
