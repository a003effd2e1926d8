// Copyright 2026 The Noumenal Authors
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

namespace noumenal {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two systems built over different site universes were combined.
struct UniverseMismatchError : Error {
  using Error::Error;
};

/// An operation/state pair (or two operations) live on different systems.
struct SystemMismatchError : Error {
  using Error::Error;
};

/// A projection target is not a subsystem of the source.
struct NotASubsystemError : Error {
  using Error::Error;
};

/// Systems required to be disjoint overlap.
struct DisjointnessError : Error {
  using Error::Error;
};

/// An enumeration or closure computation exceeded its configured budget.
struct BudgetExceededError : Error {
  using Error::Error;
};

/// Join product requested on classes with no common global representative.
struct IncompatibleClassesError : Error {
  using Error::Error;
};

/// A matrix or table failed structural validation (dimension, unitarity,
/// bijectivity, hermiticity, trace, positivity).
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace noumenal
