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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dprewrite/csv.h"
#include "dprewrite/error.h"

namespace dprewrite {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EvalRow make_row(std::string strategy, std::string param, double cs,
                 double author_a) {
  EvalRow r;
  r.strategy = std::move(strategy);
  r.param = std::move(param);
  r.cs = cs;
  r.bleu = 0.5;
  r.ppl = 100.0;
  r.author = {author_a, author_a};
  r.gender = {50.0, 50.0};
  r.age = {30.0, 30.0};
  r.attacker = kAttackerName;
  return r;
}

TEST(Csv, QuotedFields) {
  const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\n1,,3\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (CsvRow{"a", "b,c", "d\"e"}));
  EXPECT_EQ(rows[1], (CsvRow{"1", "", "3"}));
  EXPECT_THROW(parse_csv("\"open"), FormatError);
}

TEST(Csv, LineRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "quote\"d", ""};
  const auto rows = parse_csv(csv_line(fields));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], fields);
}

TEST(EvalCsv, RoundTrip) {
  std::vector<EvalRow> rows{make_row("baseline", "inf", 1.0, 66.45),
                            make_row("dp", "25", 0.589, 2.68)};
  rows[0].ppl.reset();
  rows[1].gamma_author = 0.549;
  rows[1].gamma_sum = 0.833;
  rows[1].models_averaged = 2;
  const auto back = read_eval_csv(write_eval_csv(rows));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_FALSE(back[0].ppl.has_value());
  EXPECT_TRUE(back[0].is_baseline());
  EXPECT_EQ(back[1].param, "25");
  EXPECT_DOUBLE_EQ(back[1].cs, 0.589);
  EXPECT_DOUBLE_EQ(*back[1].gamma_author, 0.549);
  EXPECT_FALSE(back[1].gamma_gender.has_value());
  EXPECT_EQ(back[1].models_averaged, 2);
  EXPECT_EQ(back[1].attacker, kAttackerName);
}

TEST(EvalCsv, Errors) {
  EXPECT_THROW(read_eval_csv("strategy,param\ndp,25\n"), FormatError);
  std::string bad = write_eval_csv({make_row("dp", "25", 0.5, 10)});
  bad.replace(bad.find("0.5"), 3, "abc");
  EXPECT_THROW(read_eval_csv(bad), FormatError);
}

TEST(Table, GroupOrderAndAveraging) {
  const std::vector<EvalRow> rows{
      make_row("non-dp", "50", 0.9, 60), make_row("dp", "250", 0.7, 40),
      make_row("baseline", "inf", 1.0, 66), make_row("quasi-dp", "25", 0.6, 20),
      make_row("dp", "25", 0.5, 10), make_row("dp", "250", 0.8, 50)};
  const ResultsTable t = assemble_table(rows);
  std::vector<std::string> order;
  for (const auto& c : t.columns) order.push_back(c.strategy + ":" + c.param);
  EXPECT_EQ(order, (std::vector<std::string>{"baseline:inf", "dp:25", "dp:250",
                                             "quasi-dp:25", "non-dp:50"}));
  EXPECT_NEAR(t.columns[2].cs, 0.75, 1e-12);
  EXPECT_NEAR(t.columns[2].author.adaptive_f1, 45.0, 1e-12);
  // Recomputed gamma: 0.75 / 1 - 45 / 66.
  EXPECT_NEAR(*t.columns[2].gamma_author, 0.75 - 45.0 / 66.0, 1e-12);
  EXPECT_FALSE(t.columns[0].gamma_author.has_value());
}

TEST(Table, PrivacyOrderWithinGroups) {
  std::vector<EvalRow> rows;
  for (const char* k : {"3", "50", "10"}) rows.push_back(make_row("non-dp", k, 0.9, 50));
  for (const char* e : {"100", "25", "custom", "50"}) rows.push_back(make_row("quasi-dp", e, 0.9, 50));
  std::vector<std::string> order;
  for (const auto& c : assemble_table(rows).columns) order.push_back(c.param);
  EXPECT_EQ(order, (std::vector<std::string>{"25", "50", "100", "custom", "50", "10", "3"}));
}

TEST(Table, WithoutBaselineKeepsGivenGammas) {
  EvalRow r = make_row("dp", "25", 0.5, 10);
  r.gamma_sum = 0.42;
  const ResultsTable t = assemble_table({r});
  EXPECT_EQ(*t.columns[0].gamma_sum, 0.42);
}

TEST(Table, ReferenceGammasReproduce) {
  const auto rows = read_eval_csv(
      read_file(std::string(DPREWRITE_TEST_DATA) + "/reference_results.csv"));
  ASSERT_EQ(rows.size(), 16u);
  const ResultsTable t = assemble_table(rows);
  ASSERT_EQ(t.columns.size(), 16u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].is_baseline()) continue;
    const EvalRow* col = nullptr;
    for (const auto& c : t.columns) {
      if (c.strategy == rows[i].strategy && c.param == rows[i].param) col = &c;
    }
    ASSERT_NE(col, nullptr);
    EXPECT_NEAR(*col->gamma_author, *rows[i].gamma_author, 0.002) << rows[i].param;
    EXPECT_NEAR(*col->gamma_gender, *rows[i].gamma_gender, 0.002) << rows[i].param;
    EXPECT_NEAR(*col->gamma_age, *rows[i].gamma_age, 0.002) << rows[i].param;
    EXPECT_NEAR(*col->gamma_sum, *rows[i].gamma_sum, 0.002) << rows[i].param;
  }
}

TEST(Render, CsvAndMarkdownShareCells) {
  const auto rows = read_eval_csv(
      read_file(std::string(DPREWRITE_TEST_DATA) + "/reference_results.csv"));
  const ResultsTable t = assemble_table(rows);
  const auto cells = table_cells(t);
  const auto csv = parse_csv(render_csv(t));
  EXPECT_EQ(csv, cells);

  const std::string md = render_markdown(t);
  std::istringstream lines(md);
  std::string line;
  std::vector<CsvRow> md_rows;
  while (std::getline(lines, line)) {
    if (line.find("---") != std::string::npos) continue;
    CsvRow row;
    std::size_t pos = 1;
    while (pos < line.size()) {
      const std::size_t next = line.find('|', pos);
      std::string cell = line.substr(pos, next - pos);
      cell.erase(0, cell.find_first_not_of(' '));
      cell.erase(cell.find_last_not_of(' ') + 1);
      row.push_back(cell);
      pos = next + 1;
    }
    md_rows.push_back(row);
  }
  EXPECT_EQ(md_rows, cells);
}

TEST(Render, Formatting) {
  EvalRow base = make_row("baseline", "inf", 1.0, 66.454);
  base.ppl = 41.4;
  EvalRow dp = make_row("dp", "25", 0.5894, 2.6849);
  dp.ppl.reset();
  const auto cells = table_cells(assemble_table({base, dp}));
  bool saw_cs = false, saw_f1 = false, saw_dash = false;
  for (const auto& row : cells) {
    for (const auto& c : row) {
      saw_cs |= c == "0.589";
      saw_f1 |= c == "2.68";
      saw_dash |= c == "-";
    }
  }
  EXPECT_TRUE(saw_cs);
  EXPECT_TRUE(saw_f1);
  EXPECT_TRUE(saw_dash);
}

}  // namespace
}  // namespace dprewrite
