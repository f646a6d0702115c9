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

#include <map>
#include <string>
#include <vector>

#include "lsrkit/formats.hpp"

namespace lsrkit {

struct MetricReport {
  std::string metric;   // "ndcg" or "recall"
  std::size_t cutoff = 0;
  std::map<std::string, double> per_query;  // evaluated queries only
  double mean = 0.0;        // over queries with >= 1 positive judgment
  std::size_t query_count = 0;       // evaluated queries
  std::size_t unjudged_queries = 0;  // seen but lacking positive judgments
};

enum class GainMode {
  kLinear,       // gain = grade (ranx default)
  kExponential,  // gain = 2^grade - 1
};

// DCG@k = sum_{i=1..k} gain(grade(d_i)) / log2(i + 1); nDCG = DCG / IDCG.
// Queries judged in qrels but absent from the run score 0; queries with no
// positive judgment are excluded from the mean and counted separately.
MetricReport ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k,
                       GainMode gain = GainMode::kLinear);

// |relevant in top-k| / |relevant|, grade > 0 counts as relevant.
MetricReport recall_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);

// Aligned `name  value` rows, 3 decimals, input order preserved.
// Throws std::invalid_argument when reports mix metrics or cutoffs.
std::string compare_table(
    const std::vector<std::pair<std::string, const MetricReport*>>& reports);

// TSV: qid, one value column per report, then per-report deltas vs the first.
std::string per_query_tsv(
    const std::vector<std::pair<std::string, const MetricReport*>>& reports);

}  // namespace lsrkit
