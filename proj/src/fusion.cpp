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

#include "lsrkit/fusion.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace lsrkit {

RankedRun rrf_fuse(const std::vector<const RankedRun*>& runs, const RrfConfig& config,
                   const std::string& out_tag) {
  if (runs.size() < 2) {
    throw std::invalid_argument("rrf_fuse needs at least 2 runs, got " +
                                std::to_string(runs.size()));
  }
  if (!(config.k > 0.0)) throw std::invalid_argument("RRF k must be > 0");

  std::set<std::string> qids;
  for (const RankedRun* run : runs) {
    for (const auto& [qid, entries] : run->queries()) qids.insert(qid);
  }

  RankedRun fused(out_tag);
  for (const auto& qid : qids) {
    std::map<DocId, std::vector<double>> contributions;
    for (const RankedRun* run : runs) {
      const auto* entries = run->find_query(qid);
      if (!entries) continue;
      for (std::size_t rank = 1; rank <= entries->size(); ++rank) {
        contributions[(*entries)[rank - 1].doc].push_back(
            1.0 / (config.k + static_cast<double>(rank)));
      }
    }
    std::vector<RunEntry> entries;
    entries.reserve(contributions.size());
    for (auto& [doc, parts] : contributions) {
      // Summed in sorted order so the result is independent of the order the
      // runs were passed in (float addition is not associative).
      std::sort(parts.begin(), parts.end());
      double score = 0.0;
      for (double p : parts) score += p;
      entries.push_back({doc, score});
    }
    std::sort(entries.begin(), entries.end(), run_entry_before);
    fused.set_query_sorted(qid, std::move(entries));
  }
  return fused;
}

RankedRun truncate_run(const RankedRun& run, std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("depth must be >= 1");
  RankedRun out(run.tag());
  for (const auto& [qid, entries] : run.queries()) {
    std::vector<RunEntry> head(entries.begin(),
                               entries.begin() + static_cast<std::ptrdiff_t>(
                                                     std::min(depth, entries.size())));
    out.set_query_sorted(qid, std::move(head));
  }
  return out;
}

}  // namespace lsrkit
