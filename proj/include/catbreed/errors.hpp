// Copyright 2026 The catbreed Authors
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

#ifndef CATBREED_ERRORS_HPP
#define CATBREED_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace catbreed {

/// An argument outside the domain of the operation (bad photon number, transmission > 1, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Invalid configuration value. Carries the offending field name.
class ConfigError : public DomainError {
  public:
    ConfigError(std::string field, const std::string &message)
        : DomainError(field + ": " + message), field_(std::move(field)) {}

    const std::string &field() const { return field_; }

  private:
    std::string field_;
};

/// Numerical failure of an otherwise valid computation.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The Fock truncation is too small for the requested operation.
class TruncationError : public NumericalError {
  public:
    TruncationError(const std::string &message, double deviation)
        : NumericalError(message + " (deviation " + std::to_string(deviation) + ")"), deviation_(deviation) {}

    double deviation() const { return deviation_; }

  private:
    double deviation_;
};

/// Conditioning on an outcome that has (numerically) zero probability.
class HeraldImpossible : public NumericalError {
  public:
    HeraldImpossible(const std::string &message, double probability)
        : NumericalError(message), probability_(probability) {}

    double probability() const { return probability_; }

  private:
    double probability_;
};

/// Malformed input file. Line is 1-based; 0 when not applicable.
class IoError : public std::runtime_error {
  public:
    IoError(const std::string &message, int line = 0)
        : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")" : message), line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

}  // namespace catbreed

#endif  // CATBREED_ERRORS_HPP
