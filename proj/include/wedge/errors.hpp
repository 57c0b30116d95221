/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace wedge {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Result not representable in double precision (use the scaled variant).
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// |rho| too close to 1: the diffusion matrix cannot be inverted reliably.
class SingularModelError : public DomainError {
public:
    using DomainError::DomainError;
};

// A computed quantity violates an invariant it should satisfy by construction.
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Information state whose fields contradict each other.
class InconsistentStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature did not reach its tolerance; carries the best estimate.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double value, double error)
        : std::runtime_error(what + " (estimate " + std::to_string(value) +
                             ", error " + std::to_string(error) + ")"),
          value_(value), error_(error) {}

    double value() const noexcept { return value_; }
    double error() const noexcept { return error_; }

private:
    double value_;
    double error_;
};

// A conditioning probability is too small to divide by.
class DegenerateConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Too few simulated paths satisfy a conditioning event.
class InsufficientSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wedge
