// Copyright 2026 the lsrkit authors
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

#pragma once

#include <string>
#include <vector>

#include "lsrkit/formats.hpp"

namespace lsrkit {

struct RrfConfig {
  double k = 60.0;  // smoothing constant, > 0
};

// Reciprocal Rank Fusion: per query, score(d) = sum over runs containing d of
// 1 / (k + rank), ranks 1-based. Queries are the union across runs; a query
// missing from a run is fused from the runs that contain it. Depends only on
// ranks, never on input scores. Throws std::invalid_argument on < 2 runs.
RankedRun rrf_fuse(const std::vector<const RankedRun*>& runs, const RrfConfig& config,
                   const std::string& out_tag);

// Top `depth` entries per query, order preserved.
RankedRun truncate_run(const RankedRun& run, std::size_t depth);

}  // namespace lsrkit
