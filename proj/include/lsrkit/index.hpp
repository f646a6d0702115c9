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
#include <optional>
#include <string>
#include <vector>

#include "lsrkit/formats.hpp"
#include "lsrkit/sparse.hpp"

namespace lsrkit {

struct Posting {
  std::uint32_t doc;  // internal ordinal, never exposed
  double impact;
};

/// Impact-ordered posting list: postings sorted by (impact desc, doc asc).
struct PostingList {
  TermId term = 0;
  std::vector<Posting> postings;
  double max_impact = 0.0;  // == postings.front().impact
};

struct BlockSummary {
  std::size_t begin;
  double max_impact;  // true max of the block == impact at begin
};

// Fixed-size blocks over an impact-ordered list.
std::vector<BlockSummary> make_blocks(const PostingList& list, std::size_t block_size);

/// Approximate-search knobs. Candidate-set approximation only: every scored
/// candidate receives its true dot product from the forward store.
struct ApproxConfig {
  double alpha = 0.5;          // fraction of each posting list traversed, (0, 1]
  std::size_t block_size = 64; // postings per block summary, >= 1
  double gamma = 1.0;          // threshold scale, >= 1; 1.0 never drops a true top-k doc
};

struct ScoredDoc {
  DocId doc;
  double score;
  bool operator==(const ScoredDoc&) const = default;
};

struct SearchResult {
  std::vector<ScoredDoc> hits;  // (score desc, doc asc), only scores > 0
  bool exhaustive = true;
  bool operator==(const SearchResult&) const = default;
};

class IndexFormatError : public std::runtime_error {
 public:
  enum class Kind { kBadMagic, kBadVersion, kTruncated, kChecksum };
  IndexFormatError(Kind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Impact-ordered inverted index over a vector collection, plus the forward
/// (pooled) vectors used for full-precision rescoring in approximate mode.
/// Immutable once built; concurrent searches need no synchronization.
class InvertedIndex {
 public:
  static InvertedIndex build(VectorFileReader& reader,
                             std::optional<std::uint32_t> doc_pool);
  static InvertedIndex build(const std::vector<VectorRecord>& records,
                             std::optional<std::uint32_t> doc_pool);

  // Exact top-k by dot product, ties (score desc, DocId byte asc).
  // `use_pruning` toggles upper-bound admission pruning; results are identical
  // either way (the toggle exists so tests can prove it).
  SearchResult search_exact(const SparseVector& query, std::size_t k,
                            std::optional<std::uint32_t> query_pool = {},
                            bool use_pruning = true) const;

  // Traverses only the top ceil(alpha * len) postings per query term and skips
  // blocks that cannot lift the running threshold scaled by gamma. Candidates
  // are rescored against the forward store, so returned scores are exact.
  SearchResult search_approx(const SparseVector& query, std::size_t k,
                             const ApproxConfig& config,
                             std::optional<std::uint32_t> query_pool = {}) const;

  std::size_t num_docs() const { return docs_.size(); }
  std::size_t num_terms() const { return lists_.size(); }
  const DocId& doc_id(std::uint32_t ordinal) const { return docs_[ordinal]; }
  const SparseVector& forward(std::uint32_t ordinal) const { return forward_[ordinal]; }
  std::optional<std::uint32_t> doc_pool() const { return doc_pool_; }
  const std::vector<PostingList>& posting_lists() const { return lists_; }
  const PostingList* find_list(TermId term) const;

  /// Stats over the indexed (pooled) postings.
  CollectionStats stats() const;

  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

 private:
  std::vector<DocId> docs_;           // ordinal -> external id, ingestion order
  std::vector<SparseVector> forward_; // ordinal -> stored (pooled) vector
  std::vector<PostingList> lists_;    // ascending by term
  std::optional<std::uint32_t> doc_pool_;

  void add_document(const DocId& id, const SparseVector& v);
  void finalize();
  SearchResult rank_candidates(std::vector<std::pair<std::uint32_t, double>>& scored,
                               std::size_t k, bool exhaustive) const;
};

struct RecallReport {
  std::vector<std::pair<std::string, double>> per_query;  // qid -> overlap fraction
  double mean = 0.0;
};

// Overlap |approx top-k  intersect  exact top-k| / |exact top-k| per query
// (1.0 when the exact list is empty).
RecallReport recall_vs_exact(const InvertedIndex& index,
                             const std::vector<VectorRecord>& queries,
                             std::size_t k, const ApproxConfig& config,
                             std::optional<std::uint32_t> query_pool = {});

// Batch retrieval into a run. `threads` > 1 fans queries out across threads;
// output is deterministic regardless.
RankedRun batch_search(const InvertedIndex& index,
                       const std::vector<VectorRecord>& queries, std::size_t k,
                       std::optional<std::uint32_t> query_pool,
                       const std::optional<ApproxConfig>& approx,
                       const std::string& tag, unsigned threads = 1);

}  // namespace lsrkit
