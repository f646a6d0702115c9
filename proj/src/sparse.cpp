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

#include "lsrkit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lsrkit {

namespace {
void validate_sorted(const std::vector<TermWeight>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("non-positive weight for term " +
                                  std::to_string(e.term));
    }
    if (i > 0 && entries[i - 1].term >= e.term) {
      throw std::invalid_argument(
          entries[i - 1].term == e.term
              ? "duplicate term " + std::to_string(e.term)
              : "entries not sorted by term");
    }
  }
}
}  // namespace

SparseVector SparseVector::from_unsorted(std::vector<TermWeight> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const TermWeight& a, const TermWeight& b) { return a.term < b.term; });
  return from_sorted(std::move(entries));
}

SparseVector SparseVector::from_sorted(std::vector<TermWeight> entries) {
  validate_sorted(entries);
  SparseVector v;
  v.entries_ = std::move(entries);
  return v;
}

SparseVector top_k_pool(const SparseVector& v, std::size_t k) {
  if (k == 0) throw std::invalid_argument("pool size must be >= 1");
  if (v.nnz() <= k) return v;

  std::vector<std::size_t> order(v.nnz());
  std::iota(order.begin(), order.end(), 0);
  const auto& entries = v.entries();
  // Highest weight first; ties keep the smaller TermId. Entries are term-sorted,
  // so comparing indices is comparing TermIds.
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   order.end(), [&](std::size_t a, std::size_t b) {
                     if (entries[a].weight != entries[b].weight)
                       return entries[a].weight > entries[b].weight;
                     return a < b;
                   });
  order.resize(k);
  std::sort(order.begin(), order.end());

  std::vector<TermWeight> kept;
  kept.reserve(k);
  for (std::size_t i : order) kept.push_back(entries[i]);
  return SparseVector::from_sorted(std::move(kept));
}

double dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  const auto& x = a.entries();
  const auto& y = b.entries();
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].term < y[j].term) {
      ++i;
    } else if (y[j].term < x[i].term) {
      ++j;
    } else {
      sum += x[i].weight * y[j].weight;
      ++i;
      ++j;
    }
  }
  return sum;
}

void StatsAccumulator::add(const SparseVector& v) {
  ++stats_.count;
  stats_.total_postings += v.nnz();
  stats_.max_l0 = std::max<std::uint64_t>(stats_.max_l0, v.nnz());
}

CollectionStats StatsAccumulator::finish() const {
  CollectionStats out = stats_;
  out.mean_l0 = out.count == 0
                    ? 0.0
                    : static_cast<double>(out.total_postings) /
                          static_cast<double>(out.count);
  return out;
}

}  // namespace lsrkit
