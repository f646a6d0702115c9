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

// Ten-query nDCG@20 fixture. Expected values were computed with an
// independent reference script and frozen; they cover perfect rankings,
// misses, graded inversions, cutoff truncation, more relevant docs than the
// cutoff, and the two excluded-query cases (no judgments at all, only
// grade-0 judgments).
namespace lsrkit::test {

struct GoldenCase {
  std::string qid;
  std::vector<DocId> ranking;
  std::map<DocId, int> judgments;
  double expected;  // < 0 marks "excluded from the mean"
};

inline std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> cases;
  cases.push_back({"q01", {"a", "b"}, {{"a", 1}}, 1.0});
  cases.push_back({"q02", {"b", "c"}, {{"a", 1}}, 0.0});
  cases.push_back({"q03", {"d2", "d1", "d3"}, {{"d1", 2}, {"d2", 1}},
                   0.8597186998521972});
  cases.push_back({"q04", {"b", "c", "x"}, {{"x", 1}}, 0.5});
  cases.push_back({"q05", {"c", "a", "d", "b"}, {{"a", 3}, {"b", 2}, {"c", 1}},
                   0.7883773914853737});

  GoldenCase q06{"q06", {}, {{"z", 1}}, 0.0};  // z only appears at rank 25 > 20
  for (int i = 0; i < 24; ++i) q06.ranking.push_back("f" + std::to_string(i));
  q06.ranking.push_back("z");
  cases.push_back(std::move(q06));

  GoldenCase q07{"q07", {}, {}, 0.5374794100696233};  // 25 relevant, cutoff 20
  for (int i = 0; i < 25; ++i) {
    q07.judgments["r" + std::to_string(i)] = 1;
  }
  for (int i = 0; i < 30; ++i) {
    q07.ranking.push_back((i % 2 == 0 ? "r" : "n") + std::to_string(i));
  }
  cases.push_back(std::move(q07));

  cases.push_back({"q08", {"a", "b"}, {}, -1.0});                       // unjudged
  cases.push_back({"q09", {"a", "b"}, {{"a", 0}, {"b", 0}}, -1.0});     // zero grades
  cases.push_back({"q10", {"b", "d", "a", "e", "c"},
                   {{"a", 5}, {"b", 4}, {"c", 3}, {"d", 1}}, 0.876998229216894});
  return cases;
}

constexpr double kGoldenMean = 0.570321716328011;  // over the 8 evaluated queries
constexpr std::size_t kGoldenEvaluated = 8;
constexpr std::size_t kGoldenExcluded = 2;

// The fixture as run + qrels structures. Scores are synthetic descending.
inline std::pair<RankedRun, Qrels> golden_fixture() {
  RankedRun run("golden");
  Qrels qrels;
  for (const auto& c : golden_cases()) {
    std::vector<RunEntry> entries;
    double score = 1000.0;
    for (const auto& doc : c.ranking) entries.push_back({doc, score -= 1.0});
    run.set_query_sorted(c.qid, std::move(entries));
    for (const auto& [doc, grade] : c.judgments) qrels.set(c.qid, doc, grade);
  }
  return {std::move(run), std::move(qrels)};
}

// Worked single-query example values (same q03 data, stated separately).
constexpr double kWorkedDcg = 2.261859507142915;
constexpr double kWorkedIdcg = 2.6309297535714578;
constexpr double kWorkedNdcg = 0.8597186998521972;

}  // namespace lsrkit::test
