// Copyright 2026 The peershield Authors.
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

#ifndef PEERSHIELD_ERRORS_H_
#define PEERSHIELD_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peershield {

// Malformed or out-of-contract input. CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A snapshot line that failed to parse. Line numbers are 1-based.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Requests that cannot be satisfied by construction (allocation exceeding
// the census, a game too large to materialize). CLI exit code 2.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeGuardError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

// A selection plan asked a bucket for more live records than it holds.
class ShortfallError : public InfeasibleError {
 public:
  ShortfallError(std::string bucket, std::size_t requested, std::size_t available)
      : InfeasibleError("bucket " + bucket + " holds " + std::to_string(available) +
                        " selectable records, plan requested " +
                        std::to_string(requested)),
        bucket_(std::move(bucket)),
        requested_(requested),
        available_(available) {}
  const std::string& bucket() const { return bucket_; }
  std::size_t requested() const { return requested_; }
  std::size_t available() const { return available_; }

 private:
  std::string bucket_;
  std::size_t requested_;
  std::size_t available_;
};

}  // namespace peershield

#endif  // PEERSHIELD_ERRORS_H_
