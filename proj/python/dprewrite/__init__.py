# Copyright 2026 The dprewrite Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Differentially private text rewriting with DP, Quasi-DP and Non-DP sampling."""

from ._core import (
    DEFAULT_CLIP_HI,
    DEFAULT_CLIP_LO,
    DEFAULT_TOP_K,
    DomainError,
    Error,
    FormatError,
    LocalRewriter,
    bleu,
    build_prompt,
    clip_logits,
    cosine_similarity,
    epsilon_from_temperature,
    exponential_mechanism_distribution,
    main,
    relative_gain,
    sample_tokens,
    softmax_with_temperature,
    temperature_from_epsilon,
    tokenize,
)

__all__ = [
    "DEFAULT_CLIP_HI",
    "DEFAULT_CLIP_LO",
    "DEFAULT_TOP_K",
    "DomainError",
    "Error",
    "FormatError",
    "LocalRewriter",
    "bleu",
    "build_prompt",
    "clip_logits",
    "cosine_similarity",
    "epsilon_from_temperature",
    "exponential_mechanism_distribution",
    "main",
    "relative_gain",
    "sample_tokens",
    "softmax_with_temperature",
    "temperature_from_epsilon",
    "tokenize",
]
