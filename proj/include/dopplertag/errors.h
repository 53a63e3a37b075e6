// Copyright 2026 The Dopplertag Authors
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

#ifndef DOPPLERTAG_ERRORS_H_
#define DOPPLERTAG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dopplertag {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A measured shift is impossible for the claimed sender speed.
class InconsistentMeasurement : public Error {
 public:
  using Error::Error;
};

// No angle satisfies the resolution inequality.
class NoSolution : public Error {
 public:
  using Error::Error;
};

// Two localization lines are (nearly) parallel.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

// Scene or sweep configuration cannot be simulated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input document does not match its schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Receiver pipeline found no tone-bearing frames.
class ToneNotDetected : public Error {
 public:
  using Error::Error;
};

// Reply transport failed during a session.
class SessionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dopplertag

#endif  // DOPPLERTAG_ERRORS_H_
