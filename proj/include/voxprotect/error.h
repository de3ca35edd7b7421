// Copyright 2026 The voxprotect Authors
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

#ifndef VOXPROTECT_ERROR_H_
#define VOXPROTECT_ERROR_H_

#include <stdexcept>
#include <string>

namespace voxprotect {

// Root of every exception thrown by the library. The CLI maps the three
// families below onto its exit codes (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Audio input problems.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

class RateError : public DataError {
 public:
  using DataError::DataError;
};

// Model input problems.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// Raised when an operation requires a model in eval mode.
class ModeError : public Error {
 public:
  using Error::Error;
};

}  // namespace voxprotect

#endif  // VOXPROTECT_ERROR_H_
