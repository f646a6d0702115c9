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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lsrkit/formats.hpp"

namespace lsrkit {

/// Pointwise reranker scores per (query, doc). Scores come from an external
/// model via JSONL ({"qid": "...", "scores": {"docid": score, ...}}) or from
/// a builtin stand-in. Negative scores are fine (rerankers emit logits).
class RerankScores {
 public:
  void set(const std::string& qid, const DocId& doc, double score);
  const std::map<DocId, double>* find_query(const std::string& qid) const;
  const std::map<std::string, std::map<DocId, double>>& queries() const {
    return queries_;
  }

 private:
  std::map<std::string, std::map<DocId, double>> queries_;
};

RerankScores read_scores(const std::filesystem::path& path);
RerankScores parse_scores_text(std::string_view text, const std::string& path);
std::string encode_scores(const RerankScores& scores);
void write_scores(const RerankScores& scores, const std::filesystem::path& path);

enum class TailPolicy { kAppendBelow, kDrop };

struct RerankConfig {
  std::size_t depth = 100;
  TailPolicy tail = TailPolicy::kAppendBelow;
};

// Top-N candidates per query, original order.
std::map<std::string, std::vector<DocId>> extract_candidates(const RankedRun& run,
                                                             std::size_t n);
// JSONL export: {"qid":"...","candidates":["d1",...]} per query.
std::string encode_candidates(const std::map<std::string, std::vector<DocId>>& cands);
void write_candidates(const RankedRun& run, std::size_t n,
                      const std::filesystem::path& path);

// Reorders the top-N head by (reranker score desc, doc asc); the tail keeps
// its original order below the head (or is dropped). Output scores are the
// synthetic 1/rank sequence, so the run stays strictly decreasing and
// downstream rank fusion sees exactly the spliced order.
// Throws std::invalid_argument naming the query and doc when a head candidate
// has no score; unknown docs in `scores` are ignored with a warning.
RankedRun splice_rerank(const RankedRun& run, const RerankScores& scores,
                        const RerankConfig& config, const std::string& tag);

enum class BuiltinScorer { kIdentity, kOracle, kNoise };

// Desk-scale stand-ins for an external pointwise model over the top-N
// candidates. identity reproduces the input order; oracle scores by relevance
// grade with original rank as tiebreak (requires qrels); noise assigns a
// seeded random permutation of ranks.
RerankScores builtin_reranker(const RankedRun& run, std::size_t n, BuiltinScorer mode,
                              const Qrels* qrels = nullptr, std::uint64_t seed = 0);

struct DepthSweepRow {
  std::size_t depth;
  double mean_ndcg;
};

// One spliced run + nDCG@cutoff evaluation per depth.
std::vector<DepthSweepRow> depth_sweep(const RankedRun& run, const RerankScores& scores,
                                       const std::vector<std::size_t>& depths,
                                       const Qrels& qrels, std::size_t cutoff = 20,
                                       TailPolicy tail = TailPolicy::kAppendBelow);

std::string render_sweep_table(const std::vector<DepthSweepRow>& rows,
                               std::size_t cutoff = 20);

}  // namespace lsrkit
