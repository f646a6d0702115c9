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

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "lsrkit/common.hpp"
#include "lsrkit/sparse.hpp"

namespace lsrkit {

/// External document/query identifier. Non-empty, no whitespace; byte-wise
/// comparison defines the global tie order.
using DocId = std::string;

struct VectorRecord {
  DocId id;
  SparseVector vector;
  bool operator==(const VectorRecord&) const = default;
};

// --- Vector files: JSON Lines, one object per record ------------------------
//
//   {"id":"d1","vector":{"3":0.5,"7":1.5}}
//
// Keys of "vector" are decimal TermIds; values are positive weights. The
// canonical form written by encode_vector_record() has term keys ascending
// and weights in shortest exact decimal, so write -> read -> write is
// byte-identical.

/// Single-pass streaming reader. Throws ParseError (with path:line) on
/// malformed JSON, duplicate terms, non-positive weights, bad ids, or a
/// DocId repeated earlier in the file.
class VectorFileReader {
 public:
  explicit VectorFileReader(std::filesystem::path path);
  std::optional<VectorRecord> next();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

std::vector<VectorRecord> read_vectors(const std::filesystem::path& path);
std::string encode_vector_record(const VectorRecord& rec);
void write_vectors(const std::vector<VectorRecord>& records,
                   const std::filesystem::path& path);

// Parses one JSONL line (no duplicate-id tracking). Used by the reader and
// directly by tests.
VectorRecord parse_vector_line(std::string_view line, const std::string& path,
                               std::size_t line_no);

// --- Ranked runs -------------------------------------------------------------

struct RunEntry {
  DocId doc;
  double score;
  bool operator==(const RunEntry&) const = default;
};

/// Per-query ranked lists, the inter-stage currency. Queries are kept in
/// ascending qid byte order; within a query entries are (score desc, doc asc)
/// and ranks are the 1-based positions.
class RankedRun {
 public:
  RankedRun() = default;
  explicit RankedRun(std::string tag) : tag_(std::move(tag)) {}

  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  // Sorts into canonical order; throws std::invalid_argument on duplicate doc.
  void set_query(const std::string& qid, std::vector<RunEntry> entries);
  // Entries must already be canonical (checked in debug paths by callers).
  void set_query_sorted(const std::string& qid, std::vector<RunEntry> entries);

  const std::map<std::string, std::vector<RunEntry>>& queries() const {
    return queries_;
  }
  const std::vector<RunEntry>* find_query(const std::string& qid) const;
  std::size_t num_queries() const { return queries_.size(); }

  bool operator==(const RankedRun&) const = default;

 private:
  std::string tag_;
  std::map<std::string, std::vector<RunEntry>> queries_;
};

// Canonical (score desc, doc asc) comparison used everywhere runs are built.
bool run_entry_before(const RunEntry& a, const RunEntry& b);

// TREC run format: `qid Q0 docid rank score tag`, ranks 1-based.
void write_run(const RankedRun& run, const std::filesystem::path& path);
std::string encode_run(const RankedRun& run);

// Reads and normalizes: lines for one query are re-sorted by
// (score desc, doc asc) and re-ranked, with a warning, if the file disagrees.
// Duplicate (qid, docid) is an error.
RankedRun read_run(const std::filesystem::path& path);
RankedRun parse_run_text(std::string_view text, const std::string& path);

// --- Qrels -------------------------------------------------------------------

/// Graded relevance judgments: `qid 0 docid rel`, grades >= 0.
class Qrels {
 public:
  void set(const std::string& qid, const DocId& doc, int grade);
  int grade(const std::string& qid, const DocId& doc) const;  // 0 if unjudged
  const std::map<std::string, std::map<DocId, int>>& queries() const {
    return queries_;
  }
  const std::map<DocId, int>* find_query(const std::string& qid) const;
  bool operator==(const Qrels&) const = default;

 private:
  std::map<std::string, std::map<DocId, int>> queries_;
};

Qrels read_qrels(const std::filesystem::path& path);
Qrels parse_qrels_text(std::string_view text, const std::string& path);
std::string encode_qrels(const Qrels& qrels);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

}  // namespace lsrkit
