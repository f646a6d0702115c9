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
#include <vector>

namespace lsrkit {

/// Identifier of a latent dimension or vocabulary entry.
using TermId = std::uint32_t;

struct TermWeight {
  TermId term;
  double weight;
  bool operator==(const TermWeight&) const = default;
};

/// Sparse weighted vector: entries strictly ascending by term, all weights > 0.
class SparseVector {
 public:
  SparseVector() = default;

  // Sorts by term and validates. Throws std::invalid_argument on duplicate
  // terms or non-positive / non-finite weights.
  static SparseVector from_unsorted(std::vector<TermWeight> entries);
  // Same validation, but requires ascending input.
  static SparseVector from_sorted(std::vector<TermWeight> entries);

  const std::vector<TermWeight>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<TermWeight> entries_;
};

// Keeps the k highest-weight entries (ties keep the smaller TermId),
// re-sorted by term. Identity when nnz <= k.
SparseVector top_k_pool(const SparseVector& v, std::size_t k);

// Inner product over shared terms. Contributions are added in ascending
// TermId order; every scoring path in the engine uses this same order so
// scores compare bit-identically across exact, pruned and approximate search.
double dot(const SparseVector& a, const SparseVector& b);

struct CollectionStats {
  std::uint64_t count = 0;
  double mean_l0 = 0.0;  // 0 when count == 0
  std::uint64_t max_l0 = 0;
  std::uint64_t total_postings = 0;
};

class StatsAccumulator {
 public:
  void add(const SparseVector& v);
  CollectionStats finish() const;

 private:
  CollectionStats stats_;
};

}  // namespace lsrkit
