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

#include "lsrkit/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "lsrkit/common.hpp"
#include "lsrkit/eval.hpp"

namespace lsrkit {

void RerankScores::set(const std::string& qid, const DocId& doc, double score) {
  if (!std::isfinite(score)) throw std::invalid_argument("non-finite reranker score");
  queries_[qid][doc] = score;
}

const std::map<DocId, double>* RerankScores::find_query(const std::string& qid) const {
  auto it = queries_.find(qid);
  return it == queries_.end() ? nullptr : &it->second;
}

RerankScores parse_scores_text(std::string_view text, const std::string& path) {
  RerankScores out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw ParseError(path, line_no, "malformed JSON object");
    }
    if (!obj.contains("qid") || !obj["qid"].is_string()) {
      throw ParseError(path, line_no, "missing string \"qid\"");
    }
    if (!obj.contains("scores") || !obj["scores"].is_object()) {
      throw ParseError(path, line_no, "missing object \"scores\"");
    }
    const std::string qid = obj["qid"].get<std::string>();
    for (const auto& [doc, val] : obj["scores"].items()) {
      if (!val.is_number()) {
        throw ParseError(path, line_no, "non-numeric score for doc \"" + doc + "\"");
      }
      out.set(qid, doc, val.get<double>());
    }
  }
  return out;
}

RerankScores read_scores(const std::filesystem::path& path) {
  return parse_scores_text(read_file(path), path.string());
}

std::string encode_scores(const RerankScores& scores) {
  std::string out;
  for (const auto& [qid, docs] : scores.queries()) {
    out += "{\"qid\":\"" + json_escape(qid) + "\",\"scores\":{";
    bool first = true;
    for (const auto& [doc, score] : docs) {
      if (!first) out += ',';
      first = false;
      out += '"';
      out += json_escape(doc);
      out += "\":";
      out += format_double(score);
    }
    out += "}}\n";
  }
  return out;
}

void write_scores(const RerankScores& scores, const std::filesystem::path& path) {
  write_file_atomic(path, encode_scores(scores));
}

std::map<std::string, std::vector<DocId>> extract_candidates(const RankedRun& run,
                                                             std::size_t n) {
  if (n == 0) throw std::invalid_argument("candidate depth must be >= 1");
  std::map<std::string, std::vector<DocId>> out;
  for (const auto& [qid, entries] : run.queries()) {
    std::vector<DocId>& docs = out[qid];
    const std::size_t take = std::min(n, entries.size());
    docs.reserve(take);
    for (std::size_t i = 0; i < take; ++i) docs.push_back(entries[i].doc);
  }
  return out;
}

std::string encode_candidates(const std::map<std::string, std::vector<DocId>>& cands) {
  std::string out;
  for (const auto& [qid, docs] : cands) {
    out += "{\"qid\":\"" + json_escape(qid) + "\",\"candidates\":[";
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (i > 0) out += ',';
      out += '"';
      out += json_escape(docs[i]);
      out += '"';
    }
    out += "]}\n";
  }
  return out;
}

void write_candidates(const RankedRun& run, std::size_t n,
                      const std::filesystem::path& path) {
  write_file_atomic(path, encode_candidates(extract_candidates(run, n)));
}

RankedRun splice_rerank(const RankedRun& run, const RerankScores& scores,
                        const RerankConfig& config, const std::string& tag) {
  if (config.depth == 0) throw std::invalid_argument("rerank depth must be >= 1");

  std::size_t unknown = 0;
  std::string first_unknown;
  RankedRun out(tag);

  for (const auto& [qid, entries] : run.queries()) {
    const std::size_t head_n = std::min(config.depth, entries.size());
    const auto* qscores = scores.find_query(qid);

    struct HeadDoc {
      DocId doc;
      double score;
    };
    std::vector<HeadDoc> head;
    head.reserve(head_n);
    for (std::size_t i = 0; i < head_n; ++i) {
      const DocId& doc = entries[i].doc;
      const std::map<DocId, double>::const_iterator it =
          qscores ? qscores->find(doc) : std::map<DocId, double>::const_iterator{};
      if (!qscores || it == qscores->end()) {
        throw std::invalid_argument("missing reranker score for query " + qid +
                                    " doc " + doc);
      }
      head.push_back({doc, it->second});
    }
    if (qscores) {
      std::unordered_set<std::string_view> head_docs;
      for (const auto& h : head) head_docs.insert(h.doc);
      for (const auto& [doc, s] : *qscores) {
        if (!head_docs.count(doc)) {
          ++unknown;
          if (first_unknown.empty()) first_unknown = qid + "/" + doc;
        }
      }
    }

    std::stable_sort(head.begin(), head.end(), [](const HeadDoc& a, const HeadDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.doc < b.doc;
    });

    // Synthetic 1/rank scores keep the list strictly decreasing; the tail
    // continues below the head minimum in its original order.
    std::vector<RunEntry> spliced;
    spliced.reserve(config.tail == TailPolicy::kAppendBelow ? entries.size() : head_n);
    std::size_t rank = 1;
    for (const auto& h : head) {
      spliced.push_back({h.doc, 1.0 / static_cast<double>(rank++)});
    }
    if (config.tail == TailPolicy::kAppendBelow) {
      for (std::size_t i = head_n; i < entries.size(); ++i) {
        spliced.push_back({entries[i].doc, 1.0 / static_cast<double>(rank++)});
      }
    }
    out.set_query_sorted(qid, std::move(spliced));
  }

  if (unknown > 0) {
    log_warn("splice_rerank: ignored " + std::to_string(unknown) +
             " score(s) for docs outside the rerank head (first: " + first_unknown + ")");
  }
  return out;
}

RerankScores builtin_reranker(const RankedRun& run, std::size_t n, BuiltinScorer mode,
                              const Qrels* qrels, std::uint64_t seed) {
  if (mode == BuiltinScorer::kOracle && qrels == nullptr) {
    throw std::invalid_argument("oracle reranker requires qrels");
  }
  RerankScores scores;
  std::mt19937_64 rng(seed);
  for (const auto& [qid, entries] : run.queries()) {
    const std::size_t head_n = std::min(n, entries.size());
    switch (mode) {
      case BuiltinScorer::kIdentity:
        for (std::size_t i = 0; i < head_n; ++i) {
          scores.set(qid, entries[i].doc, -static_cast<double>(i + 1));
        }
        break;
      case BuiltinScorer::kOracle:
        // grade dominates, original rank breaks ties; ranges per grade are
        // disjoint because rank <= n.
        for (std::size_t i = 0; i < head_n; ++i) {
          const double grade = qrels->grade(qid, entries[i].doc);
          scores.set(qid, entries[i].doc,
                     grade * static_cast<double>(n + 1) - static_cast<double>(i + 1));
        }
        break;
      case BuiltinScorer::kNoise: {
        // Hand-rolled Fisher-Yates: std::shuffle is not reproducible across
        // standard libraries.
        std::vector<std::size_t> perm(head_n);
        for (std::size_t i = 0; i < head_n; ++i) perm[i] = i;
        for (std::size_t i = head_n; i > 1; --i) {
          const std::size_t j = static_cast<std::size_t>(rng() % i);
          std::swap(perm[i - 1], perm[j]);
        }
        for (std::size_t i = 0; i < head_n; ++i) {
          scores.set(qid, entries[i].doc, static_cast<double>(perm[i]));
        }
        break;
      }
    }
  }
  return scores;
}

std::vector<DepthSweepRow> depth_sweep(const RankedRun& run, const RerankScores& scores,
                                       const std::vector<std::size_t>& depths,
                                       const Qrels& qrels, std::size_t cutoff,
                                       TailPolicy tail) {
  std::vector<DepthSweepRow> rows;
  rows.reserve(depths.size());
  for (std::size_t depth : depths) {
    const RankedRun spliced =
        splice_rerank(run, scores, RerankConfig{depth, tail}, run.tag());
    rows.push_back({depth, ndcg_at_k(spliced, qrels, cutoff).mean});
  }
  return rows;
}

std::string render_sweep_table(const std::vector<DepthSweepRow>& rows,
                               std::size_t cutoff) {
  std::size_t width = 5;  // "depth"
  for (const auto& row : rows) {
    width = std::max(width, std::to_string(row.depth).size());
  }
  std::ostringstream out;
  out << std::string(width - 5, ' ') << "depth  nDCG@" << cutoff << "\n";
  for (const auto& row : rows) {
    const std::string d = std::to_string(row.depth);
    char value[16];
    std::snprintf(value, sizeof(value), "%.3f", row.mean_ndcg);
    out << std::string(width - d.size(), ' ') << d << "  " << value << "\n";
  }
  return out.str();
}

}  // namespace lsrkit
