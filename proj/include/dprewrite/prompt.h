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

#ifndef DPREWRITE_PROMPT_H_
#define DPREWRITE_PROMPT_H_

#include <string>
#include <string_view>

namespace dprewrite {

inline constexpr std::string_view kPromptPrefix = "Document: ";
inline constexpr std::string_view kPromptSuffix = " Paraphrase of Document: ";

// kPromptPrefix + text + kPromptSuffix. The text is inserted verbatim, so a
// document that itself contains the template words is not escaped.
std::string build_prompt(std::string_view text);

}  // namespace dprewrite

#endif  // DPREWRITE_PROMPT_H_
