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

#ifndef DPREWRITE_ERROR_H_
#define DPREWRITE_ERROR_H_

#include <stdexcept>
#include <string>

namespace dprewrite {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid numeric argument (non-positive epsilon, out-of-range age, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Clip bounds with zero width; sensitivity 0 leaves epsilon undefined.
class DegenerateBoundsError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed file, record or wire message.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Two corpora that should be index-aligned are not.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempt" +
              (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts) {}

  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

}  // namespace dprewrite

#endif  // DPREWRITE_ERROR_H_
