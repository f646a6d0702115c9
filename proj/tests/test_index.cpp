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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "lsrkit/index.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace lsrkit;
using lsrkit::test::Gen;

namespace {

SparseVector vec(std::vector<TermWeight> entries) {
  return SparseVector::from_unsorted(std::move(entries));
}

std::filesystem::path temp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "lsrkit_index_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void check_equal(const SearchResult& got, const std::vector<ScoredDoc>& want) {
  REQUIRE(got.hits.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(got.hits[i].doc == want[i].doc);
    CHECK(got.hits[i].score == want[i].score);  // bit-exact by design
  }
}

}  // namespace

TEST_CASE("build lays out impact-ordered postings") {
  // d1={a:1}, d2={a:2, b:1}
  const std::vector<VectorRecord> docs = {{"d1", vec({{0, 1.0}})},
                                          {"d2", vec({{0, 2.0}, {1, 1.0}})}};
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
  REQUIRE(index.num_terms() == 2);

  const PostingList* a = index.find_list(0);
  REQUIRE(a != nullptr);
  REQUIRE(a->postings.size() == 2);
  CHECK(index.doc_id(a->postings[0].doc) == "d2");
  CHECK(a->postings[0].impact == 2.0);
  CHECK(index.doc_id(a->postings[1].doc) == "d1");
  CHECK(a->max_impact == 2.0);

  const PostingList* b = index.find_list(1);
  REQUIRE(b != nullptr);
  CHECK(b->postings.size() == 1);
  CHECK(index.stats().total_postings == 3);
}

TEST_CASE("doc pooling caps per-document postings at build") {
  const std::vector<VectorRecord> docs = {{"d1", vec({{0, 1.0}})},
                                          {"d2", vec({{0, 2.0}, {1, 1.0}})}};
  const InvertedIndex index = InvertedIndex::build(docs, 1u);
  const PostingList* a = index.find_list(0);
  REQUIRE(a != nullptr);
  CHECK(a->postings.size() == 2);
  CHECK(index.find_list(1) == nullptr);  // d2 kept only (a, 2)
  CHECK(index.stats().total_postings == 2);
}

TEST_CASE("duplicate doc ids are rejected") {
  const std::vector<VectorRecord> docs = {{"d1", vec({{0, 1.0}})},
                                          {"d1", vec({{1, 1.0}})}};
  CHECK_THROWS_AS(InvertedIndex::build(docs, std::nullopt), std::invalid_argument);
}

TEST_CASE("pooled build postings match a recount of pooled vectors") {
  Gen gen(5);
  const auto docs = gen.collection('d', 1000, 400, 60);
  const std::uint32_t pool = 16;
  const InvertedIndex index = InvertedIndex::build(docs, pool);
  std::uint64_t expected = 0;
  for (const auto& d : docs) expected += std::min<std::size_t>(pool, d.vector.nnz());
  CHECK(index.stats().total_postings == expected);
}

TEST_CASE("exact search basics") {
  const std::vector<VectorRecord> docs = {{"d1", vec({{0, 1.0}})},
                                          {"d2", vec({{0, 2.0}})}};
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);

  const SearchResult top1 = index.search_exact(vec({{0, 1.0}}), 1);
  REQUIRE(top1.hits.size() == 1);
  CHECK(top1.hits[0] == ScoredDoc{"d2", 2.0});
  CHECK(top1.exhaustive);

  CHECK(index.search_exact(vec({{9, 1.0}}), 5).hits.empty());
  CHECK(index.search_exact(SparseVector{}, 5).hits.empty());
  const InvertedIndex empty = InvertedIndex::build(std::vector<VectorRecord>{}, std::nullopt);
  CHECK(empty.search_exact(vec({{0, 1.0}}), 5).hits.empty());
  CHECK(empty.search_exact(vec({{0, 1.0}}), 5).exhaustive);
}

TEST_CASE("exact search equals the brute-force oracle") {
  Gen gen(2024);
  const auto docs = gen.collection('d', 120, 80, 24);
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
  for (int iter = 0; iter < 60; ++iter) {
    const SparseVector q = gen.sparse_vector(80, 12);
    const std::size_t k = gen.range(1, 30);
    check_equal(index.search_exact(q, k), test::oracle_top_k(docs, q, k));
  }
}

TEST_CASE("query pooling searches the pooled query") {
  Gen gen(11);
  const auto docs = gen.collection('d', 80, 60, 20);
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
  for (int iter = 0; iter < 20; ++iter) {
    const SparseVector q = gen.sparse_vector(60, 16);
    const SearchResult got = index.search_exact(q, 10, 4u);
    check_equal(got, test::oracle_top_k(docs, top_k_pool(q, 4), 10));
  }
}

TEST_CASE("upper-bound pruning never changes results") {
  Gen gen(404);
  for (int iter = 0; iter < 40; ++iter) {
    const auto docs = gen.collection('d', gen.range(5, 120), gen.range(10, 60),
                                     gen.range(1, 20));
    const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
    for (int qi = 0; qi < 10; ++qi) {
      const SparseVector q = gen.sparse_vector(gen.range(10, 60), gen.range(1, 12));
      const std::size_t k = gen.range(1, 25);
      const SearchResult pruned = index.search_exact(q, k, {}, true);
      const SearchResult full = index.search_exact(q, k, {}, false);
      CHECK(pruned == full);
    }
  }
}

TEST_CASE("doc-pooled scores never exceed unpooled scores") {
  Gen gen(606);
  const auto docs = gen.collection('d', 60, 50, 24);
  const InvertedIndex raw = InvertedIndex::build(docs, std::nullopt);
  const InvertedIndex pooled = InvertedIndex::build(docs, 8u);
  for (int iter = 0; iter < 20; ++iter) {
    const SparseVector q = gen.sparse_vector(50, 10);
    const SearchResult a = pooled.search_exact(q, 60);
    std::map<DocId, double> unpooled_scores;
    for (const auto& h : raw.search_exact(q, 60).hits) unpooled_scores[h.doc] = h.score;
    for (const auto& h : a.hits) {
      REQUIRE(unpooled_scores.count(h.doc));
      CHECK(h.score <= unpooled_scores[h.doc] + 1e-12);
    }
  }
}

TEST_CASE("approx with alpha=1 gamma=1 equals exact") {
  Gen gen(808);
  const ApproxConfig config{1.0, 4, 1.0};
  for (int iter = 0; iter < 30; ++iter) {
    const auto docs = gen.collection('d', gen.range(5, 100), gen.range(10, 50),
                                     gen.range(1, 16));
    const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
    for (int qi = 0; qi < 8; ++qi) {
      const SparseVector q = gen.sparse_vector(gen.range(10, 50), gen.range(1, 10));
      const std::size_t k = gen.range(1, 20);
      const SearchResult exact = index.search_exact(q, k);
      const SearchResult approx = index.search_approx(q, k, config);
      CHECK(approx.hits == exact.hits);
      CHECK_FALSE(approx.exhaustive);
    }
  }
}

TEST_CASE("alpha limits traversal to the top postings of a single term") {
  // 10 docs on one term, alpha=0.5 -> only the 5 highest impacts considered.
  std::vector<VectorRecord> docs;
  for (int i = 0; i < 10; ++i) {
    docs.push_back({Gen::label('d', i), vec({{0, 1.0 + i}})});
  }
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
  const SearchResult got =
      index.search_approx(vec({{0, 1.0}}), 10, ApproxConfig{0.5, 2, 1.0});
  REQUIRE(got.hits.size() == 5);  // the candidate set itself was truncated
  for (const auto& h : got.hits) {
    CHECK(h.score >= 6.0);  // impacts 6..10 survive
  }
}

TEST_CASE("recall_vs_exact is 1.0 at alpha=1 and monotone in alpha") {
  Gen gen(909);
  const auto docs = gen.collection('d', 400, 150, 30);
  const auto queries = gen.collection('q', 30, 150, 12);
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);

  const RecallReport full =
      recall_vs_exact(index, queries, 20, ApproxConfig{1.0, 16, 1.0});
  for (const auto& [qid, overlap] : full.per_query) CHECK(overlap == 1.0);
  CHECK(full.mean == 1.0);

  double prev = -1.0;
  for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    const RecallReport r =
        recall_vs_exact(index, queries, 20, ApproxConfig{alpha, 16, 1.0});
    CHECK(r.mean >= prev - 1e-12);
    prev = r.mean;
  }
}

TEST_CASE("recall with k larger than the collection") {
  Gen gen(111);
  const auto docs = gen.collection('d', 8, 20, 10);
  const auto queries = gen.collection('q', 5, 20, 6);
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
  const RecallReport r = recall_vs_exact(index, queries, 50, ApproxConfig{1.0, 4, 1.0});
  CHECK(r.mean == 1.0);
}

TEST_CASE("save then load reproduces search behavior exactly") {
  Gen gen(1234);
  const auto docs = gen.collection('d', 1000, 300, 40);
  const InvertedIndex built = InvertedIndex::build(docs, std::nullopt);
  const auto path = temp_path("persist.idx");
  built.save(path);
  const InvertedIndex loaded = InvertedIndex::load(path);

  CHECK(loaded.num_docs() == built.num_docs());
  CHECK(loaded.num_terms() == built.num_terms());
  for (int iter = 0; iter < 40; ++iter) {
    const SparseVector q = gen.sparse_vector(300, 16);
    const std::size_t k = gen.range(1, 30);
    CHECK(loaded.search_exact(q, k) == built.search_exact(q, k));
    const ApproxConfig config{0.4, 8, 1.5};
    CHECK(loaded.search_approx(q, k, config) == built.search_approx(q, k, config));
  }
}

TEST_CASE("empty and pooled indexes survive persistence") {
  const auto path = temp_path("empty.idx");
  InvertedIndex::build(std::vector<VectorRecord>{}, std::nullopt).save(path);
  const InvertedIndex empty = InvertedIndex::load(path);
  CHECK(empty.num_docs() == 0);
  CHECK(empty.search_exact(vec({{0, 1.0}}), 5).hits.empty());

  Gen gen(21);
  const auto docs = gen.collection('d', 30, 40, 12);
  const auto pooled_path = temp_path("pooled.idx");
  InvertedIndex::build(docs, 6u).save(pooled_path);
  const InvertedIndex pooled = InvertedIndex::load(pooled_path);
  REQUIRE(pooled.doc_pool().has_value());
  CHECK(*pooled.doc_pool() == 6);
}

TEST_CASE("approx config is validated") {
  const InvertedIndex index =
      InvertedIndex::build(std::vector<VectorRecord>{{"d1", vec({{0, 1.0}})}},
                           std::nullopt);
  const SparseVector q = vec({{0, 1.0}});
  CHECK_THROWS_AS(index.search_approx(q, 5, ApproxConfig{0.0, 8, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(index.search_approx(q, 5, ApproxConfig{1.5, 8, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(index.search_approx(q, 5, ApproxConfig{0.5, 0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(index.search_approx(q, 5, ApproxConfig{0.5, 8, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("index build and save are deterministic") {
  Gen gen_a(55), gen_b(55);
  const auto docs_a = gen_a.collection('d', 200, 100, 20);
  const auto docs_b = gen_b.collection('d', 200, 100, 20);
  const auto path_a = temp_path("det_a.idx");
  const auto path_b = temp_path("det_b.idx");
  InvertedIndex::build(docs_a, 8u).save(path_a);
  InvertedIndex::build(docs_b, 8u).save(path_b);
  CHECK(read_file(path_a) == read_file(path_b));
}

TEST_CASE("corrupt index files are rejected without partial loads") {
  Gen gen(77);
  const auto docs = gen.collection('d', 50, 40, 12);
  const auto path = temp_path("corrupt.idx");
  InvertedIndex::build(docs, std::nullopt).save(path);
  const std::string good = read_file(path);

  SUBCASE("wrong magic") {
    std::string bad = good;
    bad[0] = 'X';
    write_file_atomic(path, bad);
    try {
      InvertedIndex::load(path);
      FAIL("expected IndexFormatError");
    } catch (const IndexFormatError& ex) {
      CHECK(ex.kind() == IndexFormatError::Kind::kBadMagic);
    }
  }
  SUBCASE("wrong version") {
    std::string bad = good;
    bad[8] = 42;  // version field follows the 8-byte magic
    write_file_atomic(path, bad);
    try {
      InvertedIndex::load(path);
      FAIL("expected IndexFormatError");
    } catch (const IndexFormatError& ex) {
      CHECK(ex.kind() == IndexFormatError::Kind::kBadVersion);
    }
  }
  SUBCASE("truncated") {
    write_file_atomic(path, good.substr(0, good.size() / 2));
    try {
      InvertedIndex::load(path);
      FAIL("expected IndexFormatError");
    } catch (const IndexFormatError& ex) {
      CHECK(ex.kind() == IndexFormatError::Kind::kTruncated);
    }
  }
  SUBCASE("flipped payload byte") {
    std::string bad = good;
    bad[good.size() / 2] = static_cast<char>(bad[good.size() / 2] ^ 0x5a);
    write_file_atomic(path, bad);
    try {
      InvertedIndex::load(path);
      FAIL("expected IndexFormatError");
    } catch (const IndexFormatError& ex) {
      CHECK(ex.kind() == IndexFormatError::Kind::kChecksum);
    }
  }
}

TEST_CASE("batch search is deterministic across thread counts") {
  Gen gen(31);
  const auto docs = gen.collection('d', 300, 120, 24);
  const auto queries = gen.collection('q', 40, 120, 10);
  const InvertedIndex index = InvertedIndex::build(docs, std::nullopt);
  const RankedRun serial = batch_search(index, queries, 15, {}, {}, "t", 1);
  const RankedRun parallel = batch_search(index, queries, 15, {}, {}, "t", 8);
  CHECK(serial == parallel);
}
