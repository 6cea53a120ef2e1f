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

#ifndef PILOTWAVE_PARALLEL_HPP_
#define PILOTWAVE_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace pilotwave {

/// Fork-join over [0, n): indices are split into `workers` contiguous
/// chunks, one thread per chunk. The first exception thrown by any chunk is
/// rethrown after all threads join. Each index is visited exactly once, so
/// results written to per-index slots do not depend on the worker count.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace pilotwave

#endif  // PILOTWAVE_PARALLEL_HPP_
