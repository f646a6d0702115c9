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

#include "lsrkit/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "lsrkit/common.hpp"

namespace lsrkit {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'R', 'I', 'D', 'X', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Cursor {
 public:
  Cursor(std::string_view data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(raw(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  std::uint64_t u64() { return raw(8); }
  double f64() { return std::bit_cast<double>(raw(8)); }

  std::string str(std::size_t n) {
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  std::uint64_t raw(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw IndexFormatError(IndexFormatError::Kind::kTruncated,
                             context_ + ": truncated index payload");
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string context_;
};

struct QueryTerm {
  const PostingList* list;
  double weight;
};

// Query terms present in the index, in ascending TermId order. Ascending
// order is the canonical accumulation order: it matches the merge order of
// dot(), so accumulated scores are bit-identical to rescored ones.
std::vector<QueryTerm> resolve_terms(const InvertedIndex& index,
                                     const SparseVector& query) {
  std::vector<QueryTerm> terms;
  terms.reserve(query.nnz());
  for (const auto& e : query.entries()) {
    if (const PostingList* list = index.find_list(e.term)) {
      terms.push_back({list, e.weight});
    }
  }
  return terms;
}

}  // namespace

std::vector<BlockSummary> make_blocks(const PostingList& list, std::size_t block_size) {
  if (block_size == 0) throw std::invalid_argument("block_size must be >= 1");
  std::vector<BlockSummary> blocks;
  for (std::size_t begin = 0; begin < list.postings.size(); begin += block_size) {
    blocks.push_back({begin, list.postings[begin].impact});
  }
  return blocks;
}

void InvertedIndex::add_document(const DocId& id, const SparseVector& v) {
  docs_.push_back(id);
  forward_.push_back(doc_pool_ ? top_k_pool(v, *doc_pool_) : v);
}

void InvertedIndex::finalize() {
  std::map<TermId, std::vector<Posting>> by_term;
  for (std::uint32_t ord = 0; ord < forward_.size(); ++ord) {
    for (const auto& e : forward_[ord].entries()) {
      by_term[e.term].push_back({ord, e.weight});
    }
  }
  lists_.clear();
  lists_.reserve(by_term.size());
  for (auto& [term, postings] : by_term) {
    std::sort(postings.begin(), postings.end(), [](const Posting& a, const Posting& b) {
      if (a.impact != b.impact) return a.impact > b.impact;
      return a.doc < b.doc;
    });
    PostingList list;
    list.term = term;
    list.max_impact = postings.front().impact;
    list.postings = std::move(postings);
    lists_.push_back(std::move(list));
  }
}

InvertedIndex InvertedIndex::build(VectorFileReader& reader,
                                   std::optional<std::uint32_t> doc_pool) {
  InvertedIndex index;
  index.doc_pool_ = doc_pool;
  while (auto rec = reader.next()) {
    index.add_document(rec->id, rec->vector);
  }
  index.finalize();
  return index;
}

InvertedIndex InvertedIndex::build(const std::vector<VectorRecord>& records,
                                   std::optional<std::uint32_t> doc_pool) {
  InvertedIndex index;
  index.doc_pool_ = doc_pool;
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.id).second) {
      throw std::invalid_argument("duplicate DocId \"" + rec.id + "\"");
    }
    index.add_document(rec.id, rec.vector);
  }
  index.finalize();
  return index;
}

const PostingList* InvertedIndex::find_list(TermId term) const {
  auto it = std::lower_bound(
      lists_.begin(), lists_.end(), term,
      [](const PostingList& list, TermId t) { return list.term < t; });
  if (it == lists_.end() || it->term != term) return nullptr;
  return &*it;
}

CollectionStats InvertedIndex::stats() const {
  StatsAccumulator acc;
  for (const auto& v : forward_) acc.add(v);
  return acc.finish();
}

SearchResult InvertedIndex::rank_candidates(
    std::vector<std::pair<std::uint32_t, double>>& scored, std::size_t k,
    bool exhaustive) const {
  auto before = [this](const std::pair<std::uint32_t, double>& a,
                       const std::pair<std::uint32_t, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    return docs_[a.first] < docs_[b.first];
  };
  if (scored.size() > k) {
    std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     scored.end(), before);
    scored.resize(k);
  }
  std::sort(scored.begin(), scored.end(), before);

  SearchResult result;
  result.exhaustive = exhaustive;
  result.hits.reserve(scored.size());
  for (const auto& [ord, score] : scored) {
    result.hits.push_back({docs_[ord], score});
  }
  return result;
}

SearchResult InvertedIndex::search_exact(const SparseVector& query, std::size_t k,
                                         std::optional<std::uint32_t> query_pool,
                                         bool use_pruning) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  const SparseVector pooled = query_pool ? top_k_pool(query, *query_pool) : query;
  const auto terms = resolve_terms(*this, pooled);
  if (terms.empty() || docs_.empty()) return {{}, true};

  // Suffix upper bounds: ub_after[i] = max total contribution of terms i..end.
  std::vector<double> ub_from(terms.size() + 1, 0.0);
  for (std::size_t i = terms.size(); i-- > 0;) {
    ub_from[i] = ub_from[i + 1] + terms[i].weight * terms[i].list->max_impact;
  }

  std::unordered_map<std::uint32_t, double> acc;
  acc.reserve(256);
  std::vector<double> scratch;
  bool admission_closed = false;

  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (use_pruning && !admission_closed && i > 0 && acc.size() >= k) {
      // theta = k-th largest accumulated partial. Partials only grow, so once
      // the remaining terms cannot beat it, no unseen doc can reach the top k.
      // Strict < keeps docs that could still tie into the boundary.
      scratch.clear();
      scratch.reserve(acc.size());
      for (const auto& [ord, score] : acc) scratch.push_back(score);
      std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       scratch.end(), std::greater<double>());
      const double theta = scratch[k - 1];
      if (ub_from[i] < theta) admission_closed = true;
    }
    const double qw = terms[i].weight;
    for (const Posting& p : terms[i].list->postings) {
      if (admission_closed) {
        auto it = acc.find(p.doc);
        if (it != acc.end()) it->second += qw * p.impact;
      } else {
        acc[p.doc] += qw * p.impact;
      }
    }
  }

  std::vector<std::pair<std::uint32_t, double>> scored(acc.begin(), acc.end());
  return rank_candidates(scored, k, /*exhaustive=*/true);
}

SearchResult InvertedIndex::search_approx(const SparseVector& query, std::size_t k,
                                          const ApproxConfig& config,
                                          std::optional<std::uint32_t> query_pool) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (!(config.alpha > 0.0) || config.alpha > 1.0) {
    throw std::invalid_argument("alpha must be in (0, 1]");
  }
  if (config.block_size == 0) throw std::invalid_argument("block_size must be >= 1");
  if (config.gamma < 1.0) throw std::invalid_argument("gamma must be >= 1");

  const SparseVector pooled = query_pool ? top_k_pool(query, *query_pool) : query;
  const auto terms = resolve_terms(*this, pooled);
  if (terms.empty() || docs_.empty()) return {{}, false};

  double total_ub = 0.0;
  for (const auto& t : terms) total_ub += t.weight * t.list->max_impact;

  // Best-k candidates by true (rescored) score; worst element on top.
  auto worse = [this](const std::pair<std::uint32_t, double>& a,
                      const std::pair<std::uint32_t, double>& b) {
    if (a.second != b.second) return a.second > b.second;  // heap: smallest score on top
    return docs_[a.first] < docs_[b.first];                // worst tie = largest doc id
  };
  std::vector<std::pair<std::uint32_t, double>> heap;
  heap.reserve(k + 1);
  std::unordered_set<std::uint32_t> rescored;
  double theta = -std::numeric_limits<double>::infinity();

  for (const auto& t : terms) {
    const auto& postings = t.list->postings;
    const auto limit = static_cast<std::size_t>(
        std::ceil(config.alpha * static_cast<double>(postings.size())));
    const double ub_rest = total_ub - t.weight * t.list->max_impact;

    for (std::size_t begin = 0; begin < limit; begin += config.block_size) {
      const double block_max = postings[begin].impact;
      // Impact order is descending, so once one block cannot reach the scaled
      // threshold, none of the later ones can either.
      if (heap.size() == k && t.weight * block_max + ub_rest < config.gamma * theta) {
        break;
      }
      const std::size_t end = std::min(begin + config.block_size, limit);
      for (std::size_t pos = begin; pos < end; ++pos) {
        const std::uint32_t ord = postings[pos].doc;
        if (!rescored.insert(ord).second) continue;
        const double score = dot(pooled, forward_[ord]);
        if (!(score > 0.0)) continue;
        heap.emplace_back(ord, score);
        std::push_heap(heap.begin(), heap.end(), worse);
        if (heap.size() > k) {
          std::pop_heap(heap.begin(), heap.end(), worse);
          heap.pop_back();
        }
        if (heap.size() == k) theta = heap.front().second;
      }
    }
  }

  std::vector<std::pair<std::uint32_t, double>> scored(heap.begin(), heap.end());
  return rank_candidates(scored, k, /*exhaustive=*/false);
}

// --- persistence ----------------------------------------------------------------

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::string payload;
  payload.push_back(doc_pool_ ? 1 : 0);
  put_u32(payload, doc_pool_.value_or(0));
  put_u32(payload, static_cast<std::uint32_t>(docs_.size()));
  for (const auto& id : docs_) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("DocId too long to persist: " + id);
    }
    put_u16(payload, static_cast<std::uint16_t>(id.size()));
    payload += id;
  }
  for (const auto& v : forward_) {
    put_u32(payload, static_cast<std::uint32_t>(v.nnz()));
    for (const auto& e : v.entries()) {
      put_u32(payload, e.term);
      put_f64(payload, e.weight);
    }
  }
  put_u32(payload, static_cast<std::uint32_t>(lists_.size()));
  for (const auto& list : lists_) {
    put_u32(payload, list.term);
    put_u32(payload, static_cast<std::uint32_t>(list.postings.size()));
    for (const auto& p : list.postings) {
      put_u32(payload, p.doc);
      put_f64(payload, p.impact);
    }
  }

  std::string file;
  file.append(kMagic, sizeof(kMagic));
  put_u32(file, kFormatVersion);
  put_u64(file, payload.size());
  file += payload;
  put_u32(file, crc32_bytes(payload));
  write_file_atomic(path, file);
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  const std::string file = read_file(path);
  const std::string ctx = path.string();
  if (file.size() < sizeof(kMagic) + 4 + 8 + 4) {
    throw IndexFormatError(IndexFormatError::Kind::kTruncated, ctx + ": file too short");
  }
  if (std::memcmp(file.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IndexFormatError(IndexFormatError::Kind::kBadMagic,
                           ctx + ": not an index file (bad magic)");
  }
  Cursor header(std::string_view(file).substr(sizeof(kMagic), 12), ctx);
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion) {
    throw IndexFormatError(IndexFormatError::Kind::kBadVersion,
                           ctx + ": unsupported index version " + std::to_string(version));
  }
  const std::uint64_t payload_len = header.u64();
  const std::size_t payload_off = sizeof(kMagic) + 12;
  if (file.size() != payload_off + payload_len + 4) {
    throw IndexFormatError(IndexFormatError::Kind::kTruncated,
                           ctx + ": truncated or oversized index file");
  }
  const std::string_view payload =
      std::string_view(file).substr(payload_off, payload_len);
  Cursor tail(std::string_view(file).substr(payload_off + payload_len, 4), ctx);
  if (tail.u32() != crc32_bytes(payload)) {
    throw IndexFormatError(IndexFormatError::Kind::kChecksum,
                           ctx + ": checksum mismatch");
  }

  Cursor cur(payload, ctx);
  InvertedIndex index;
  const bool has_pool = cur.str(1)[0] != 0;
  const std::uint32_t pool = cur.u32();
  if (has_pool) index.doc_pool_ = pool;

  const std::uint32_t num_docs = cur.u32();
  index.docs_.reserve(num_docs);
  for (std::uint32_t i = 0; i < num_docs; ++i) {
    index.docs_.push_back(cur.str(cur.u16()));
  }
  index.forward_.reserve(num_docs);
  for (std::uint32_t i = 0; i < num_docs; ++i) {
    const std::uint32_t nnz = cur.u32();
    std::vector<TermWeight> entries;
    entries.reserve(nnz);
    for (std::uint32_t j = 0; j < nnz; ++j) {
      const TermId term = cur.u32();
      const double weight = cur.f64();
      entries.push_back({term, weight});
    }
    index.forward_.push_back(SparseVector::from_sorted(std::move(entries)));
  }
  const std::uint32_t num_terms = cur.u32();
  index.lists_.reserve(num_terms);
  for (std::uint32_t i = 0; i < num_terms; ++i) {
    PostingList list;
    list.term = cur.u32();
    const std::uint32_t len = cur.u32();
    list.postings.reserve(len);
    for (std::uint32_t j = 0; j < len; ++j) {
      const std::uint32_t doc = cur.u32();
      const double impact = cur.f64();
      if (doc >= num_docs) {
        throw IndexFormatError(IndexFormatError::Kind::kTruncated,
                               ctx + ": posting references unknown doc ordinal");
      }
      list.postings.push_back({doc, impact});
    }
    if (list.postings.empty()) {
      throw IndexFormatError(IndexFormatError::Kind::kTruncated,
                             ctx + ": empty posting list");
    }
    list.max_impact = list.postings.front().impact;
    index.lists_.push_back(std::move(list));
  }
  if (!cur.exhausted()) {
    throw IndexFormatError(IndexFormatError::Kind::kTruncated,
                           ctx + ": trailing bytes in payload");
  }
  return index;
}

// --- batch helpers ----------------------------------------------------------------

RecallReport recall_vs_exact(const InvertedIndex& index,
                             const std::vector<VectorRecord>& queries,
                             std::size_t k, const ApproxConfig& config,
                             std::optional<std::uint32_t> query_pool) {
  RecallReport report;
  double sum = 0.0;
  for (const auto& q : queries) {
    const SearchResult exact = index.search_exact(q.vector, k, query_pool);
    const SearchResult approx = index.search_approx(q.vector, k, config, query_pool);
    double overlap = 1.0;
    if (!exact.hits.empty()) {
      std::unordered_set<std::string_view> exact_docs;
      for (const auto& h : exact.hits) exact_docs.insert(h.doc);
      std::size_t shared = 0;
      for (const auto& h : approx.hits) shared += exact_docs.count(h.doc);
      overlap = static_cast<double>(shared) / static_cast<double>(exact.hits.size());
    }
    report.per_query.emplace_back(q.id, overlap);
    sum += overlap;
  }
  report.mean = queries.empty() ? 0.0 : sum / static_cast<double>(queries.size());
  return report;
}

RankedRun batch_search(const InvertedIndex& index,
                       const std::vector<VectorRecord>& queries, std::size_t k,
                       std::optional<std::uint32_t> query_pool,
                       const std::optional<ApproxConfig>& approx,
                       const std::string& tag, unsigned threads) {
  std::vector<SearchResult> results(queries.size());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      results[i] = approx
                       ? index.search_approx(queries[i].vector, k, *approx, query_pool)
                       : index.search_exact(queries[i].vector, k, query_pool);
    }
  };
  if (threads <= 1 || queries.size() < 2) {
    run_range(0, queries.size());
  } else {
    const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(queries.size()));
    std::vector<std::thread> pool;
    pool.reserve(n);
    const std::size_t chunk = (queries.size() + n - 1) / n;
    for (unsigned t = 0; t < n; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(queries.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  RankedRun run(tag);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::vector<RunEntry> entries;
    entries.reserve(results[i].hits.size());
    for (auto& h : results[i].hits) entries.push_back({std::move(h.doc), h.score});
    run.set_query_sorted(queries[i].id, std::move(entries));
  }
  return run;
}

}  // namespace lsrkit
