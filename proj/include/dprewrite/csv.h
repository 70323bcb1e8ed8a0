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

#ifndef DPREWRITE_CSV_H_
#define DPREWRITE_CSV_H_

// Minimal RFC 4180 reading and writing: comma separated, fields quoted when
// they contain a comma, quote, CR or LF; quotes doubled inside quotes.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dprewrite {

using CsvRow = std::vector<std::string>;

// Throws FormatError on an unterminated quoted field. A trailing newline does
// not produce an empty row.
std::vector<CsvRow> parse_csv(std::string_view text);

std::string csv_field(std::string_view value);
// Fields joined by commas, terminated by '\n'.
std::string csv_line(std::span<const std::string> fields);

}  // namespace dprewrite

#endif  // DPREWRITE_CSV_H_
