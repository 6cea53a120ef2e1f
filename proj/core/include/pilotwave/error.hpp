// Copyright 2026 The pilotwave Authors.
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

#ifndef PILOTWAVE_ERROR_HPP_
#define PILOTWAVE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pilotwave {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: a violated precondition or an invalid configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The numerics failed at run time (node collision, instability, a flow
/// that never reached its target).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pilotwave

#endif  // PILOTWAVE_ERROR_HPP_
