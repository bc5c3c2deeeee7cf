// Copyright 2026 The ITR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ITR_ERRORS_H_
#define ITR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace itr {

// Base of every error raised by the library. Callers that only want to
// report and exit can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument supplied by the caller (k too large, horizon <= 0, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A declared column is absent from an input file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell holds a value that cannot be interpreted.
class ValueError : public Error {
 public:
  using Error::Error;
};

// Missing or empty input file.
class InputError : public Error {
 public:
  using Error::Error;
};

// Input that makes an estimator undefined (empty stratum, zero weights, no
// matching subjects).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A model could not be fitted on the given data.
class FitError : public Error {
 public:
  using Error::Error;
};

// A fitted model could not be evaluated (no OOB samples, ...).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace itr

#endif  // ITR_ERRORS_H_
