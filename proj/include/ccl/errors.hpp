// Copyright 2026 The CCL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ccl {

// Base of every error raised by the library. The C API maps each subclass
// onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or hyperparameters (exit code 2 on the CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Value outside the domain of an operation (log of non-positive, zero norm).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller violated a precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or failed numerical procedure (exit code 3 on the CLI).
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccl
