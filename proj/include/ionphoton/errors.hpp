// Copyright 2026 The ionphoton Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ionphoton {

// Every library failure derives from Error. The category decides the CLI
// exit code: configuration (2), numeric (3) or data format (4).
class Error : public std::runtime_error {
 public:
  enum class Category { kConfig, kNumeric, kFormat };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::kConfig, what) {}
};

class InvalidTransitionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::kNumeric, what) {}
};

// Raised when a queried value lies outside a function's attainable span.
class OutOfRangeError : public DomainError {
 public:
  OutOfRangeError(const std::string& what, double lo, double hi)
      : DomainError(what), lo_(lo), hi_(hi) {}
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

 private:
  double lo_, hi_;
};

class AmbiguousSteadyStateError : public DomainError {
 public:
  explicit AmbiguousSteadyStateError(std::size_t null_dimension)
      : DomainError("ambiguous steady state: null space of the Liouvillian has dimension " +
                    std::to_string(null_dimension)),
        dimension_(null_dimension) {}
  std::size_t null_dimension() const noexcept { return dimension_; }

 private:
  std::size_t dimension_;
};

class IntegrationError : public DomainError {
 public:
  IntegrationError(const std::string& what, double t_reached)
      : DomainError(what + " (reached t = " + std::to_string(t_reached) + " s)"),
        t_reached_(t_reached) {}
  double t_reached() const noexcept { return t_reached_; }

 private:
  double t_reached_;
};

class QuadratureError : public DomainError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : DomainError(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(Category::kFormat, what) {}
};

// Well-formed records that violate stream ordering.
class IntegrityError : public FormatError {
 public:
  IntegrityError(const std::string& what, std::size_t offset)
      : FormatError(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace ionphoton
