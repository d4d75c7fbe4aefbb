// Copyright 2026 The vbmix Authors
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

#ifndef VBMIX_PARALLEL_HPP_
#define VBMIX_PARALLEL_HPP_

#include <functional>

namespace vbmix {

/// Worker count from VBMIX_WORKERS, else the hardware concurrency.
int default_worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; the first exception thrown is rethrown after all threads
/// join. Results must be written to per-index slots for determinism.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace vbmix

#endif  // VBMIX_PARALLEL_HPP_
