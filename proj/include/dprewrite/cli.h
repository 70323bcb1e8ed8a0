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

#ifndef DPREWRITE_CLI_H_
#define DPREWRITE_CLI_H_

// The dprewrite command-line tool: prepare, rewrite, eval, report, serve.

#include <ostream>

namespace dprewrite {

inline constexpr int kExitOk = 0;
// A per-document or per-run error was recorded; outputs may be partial.
inline constexpr int kExitRunErrors = 1;
inline constexpr int kExitUsage = 2;

// Parses `argv` and runs one subcommand. Progress goes to `out`, diagnostics
// to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace dprewrite

#endif  // DPREWRITE_CLI_H_
