// Copyright 2026 The froc Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace froc {

/// Base class of every failure thrown by the library. Subtypes map onto the
/// CLI exit-code contract: anything but io_error exits 1, io_error exits 2.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric argument is outside its mathematical domain (NaN, loss <= 0, ...).
class domain_error : public error {
public:
  using error::error;
};

/// Structured input violates an invariant (bad row, mismatched sample means, ...).
class validation_error : public error {
public:
  using error::error;
};

/// A required piece of configuration is missing or empty.
class config_error : public error {
public:
  using error::error;
};

/// Stream or file failure; distinct so callers can report partial writes.
class io_error : public error {
public:
  using error::error;
};

/// Lookup of a configuration id that is not in the table.
class not_found_error : public error {
public:
  using error::error;
};

/// Caller asked for something the interface does not offer (unknown report kind, ...).
class usage_error : public error {
public:
  using error::error;
};

}  // namespace froc
