// Copyright 2026 The sqlab Authors
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

#ifndef SQLAB_CORE_ERROR_HPP_
#define SQLAB_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sqlab {

// Base class for everything this library throws on contract violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UniverseMismatch : public Error {
 public:
  using Error::Error;
};

class UniverseNotTabulatable : public Error {
 public:
  using Error::Error;
};

class UniverseTooSmall : public Error {
 public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

class GaussianNeedsMonteCarlo : public Error {
 public:
  using Error::Error;
};

class WrongPopulationKind : public Error {
 public:
  using Error::Error;
};

class DatasetTooSmall : public Error {
 public:
  using Error::Error;
};

class SampleTooSmall : public Error {
 public:
  using Error::Error;
};

class MissingParameter : public Error {
 public:
  using Error::Error;
};

class SessionHalted : public Error {
 public:
  using Error::Error;
};

class QueryBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class HardUpdateBudgetExhausted : public Error {
 public:
  using Error::Error;
};

class FiringBudgetExhausted : public Error {
 public:
  using Error::Error;
};

class ConditionViolated : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqlab

#endif  // SQLAB_CORE_ERROR_HPP_
