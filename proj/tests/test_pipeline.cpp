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
#include <random>

#include "lsrkit/eval.hpp"
#include "lsrkit/index.hpp"
#include "lsrkit/pipeline.hpp"
#include "lsrkit/synth.hpp"
#include "support/gen.hpp"

using namespace lsrkit;

namespace {

// TEST_DATA_DIR points at the repository root (set from CMake).
std::filesystem::path repo_root() { return LSRKIT_REPO_ROOT; }

std::filesystem::path fresh_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "lsrkit_pipeline_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Small corpus + index laid out the way the shipped specs expect.
std::filesystem::path make_workspace(const char* name, std::uint64_t seed = 42) {
  const auto base = fresh_dir(name);
  SynthConfig config;
  config.seed = seed;
  config.num_docs = 400;
  config.num_queries = 20;
  config.vocab_size = 1500;
  config.doc_nnz = 60;
  config.query_nnz = 20;
  config.planted_per_query = 5;
  write_synth_corpus(config, base / "work" / "corpus");
  const auto docs = read_vectors(base / "work" / "corpus" / "docs.jsonl");
  InvertedIndex::build(docs, std::nullopt).save(base / "work" / "index.bin");
  return base;
}

}  // namespace

TEST_CASE("the five shipped pipeline specs validate cleanly") {
  for (const char* name : {"run1.pipeline", "run2.pipeline", "run3.pipeline",
                           "run4.pipeline", "run5.pipeline"}) {
    const auto spec = PipelineSpec::parse_file(repo_root() / "pipelines" / name);
    const auto diags = validate(spec);
    for (const auto& d : diags) {
      CAPTURE(name);
      CAPTURE(d.stage);
      FAIL_CHECK(d.message);
    }
    CHECK(diags.empty());
  }
}

TEST_CASE("validate flags cycles naming the stages") {
  const auto spec = PipelineSpec::parse_text(
      "version 1\n"
      "stage a fuse\n inputs b b\n k 10\n"
      "stage b fuse\n inputs a a\n k 10\n",
      "mem");
  const auto diags = validate(spec);
  REQUIRE(!diags.empty());
  bool found_cycle = false;
  for (const auto& d : diags) {
    if (d.message.find("cycle") != std::string::npos) {
      found_cycle = true;
      CHECK(d.message.find('a') != std::string::npos);
      CHECK(d.message.find('b') != std::string::npos);
    }
  }
  CHECK(found_cycle);
}

TEST_CASE("validate flags unresolved references") {
  const auto spec = PipelineSpec::parse_text(
      "version 1\n"
      "stage e evaluate\n input ghost\n qrels q.txt\n",
      "mem");
  const auto diags = validate(spec);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].stage == "e");
  CHECK(diags[0].message.find("ghost") != std::string::npos);
}

TEST_CASE("validate flags missing keys, bad kinds and bad values") {
  const auto spec = PipelineSpec::parse_text(
      "version 1\n"
      "stage r retrieve\n index i.bin\n"          // missing queries, k
      "stage w wibble\n"                          // unknown kind
      "stage f fuse\n inputs r\n k 0\n"           // one input, k not positive
      "stage v evaluate\n input f\n qrels q\n metric foo\n",
      "mem");
  const auto diags = validate(spec);
  CHECK(diags.size() >= 5);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(PipelineSpec::parse_text("stage a retrieve\n", "mem"), ParseError);
  CHECK_THROWS_AS(PipelineSpec::parse_text("version 2\n", "mem"), ParseError);
  CHECK_THROWS_AS(PipelineSpec::parse_text("version 1\nk 10\n", "mem"), ParseError);
  CHECK_THROWS_AS(
      PipelineSpec::parse_text("version 1\nstage a fuse\nstage a fuse\n", "mem"),
      ParseError);
  CHECK_THROWS_AS(
      PipelineSpec::parse_text("version 1\nstage a fuse\nk 1\nk 2\n", "mem"),
      ParseError);
}

TEST_CASE("run1 shape produces two artifacts") {
  const auto base = make_workspace("run1");
  const auto spec = PipelineSpec::parse_file(repo_root() / "pipelines" / "run1.pipeline");
  const Manifest manifest = execute(spec, base / "out", base);
  REQUIRE_FALSE(manifest.failed_stage.has_value());
  REQUIRE(manifest.entries.size() == 2);
  CHECK(manifest.entries[0].stage == "full");
  CHECK(manifest.entries[0].file == "full/out.run");
  CHECK(manifest.entries[1].stage == "score");
  CHECK(manifest.entries[1].file == "score/report.txt");
  CHECK(std::filesystem::exists(base / "out" / "manifest.tsv"));

  // every produced run satisfies the run-file invariants when re-read
  const RankedRun run = read_run(base / "out" / "full" / "out.run");
  CHECK(run.num_queries() == 20);
}

TEST_CASE("run5 shape produces seven artifacts in topological order") {
  const auto base = make_workspace("run5");
  const auto spec = PipelineSpec::parse_file(repo_root() / "pipelines" / "run5.pipeline");
  const Manifest manifest = execute(spec, base / "out", base);
  REQUIRE_FALSE(manifest.failed_stage.has_value());
  REQUIRE(manifest.entries.size() == 7);

  const std::vector<std::string> stages = {
      manifest.entries[0].stage, manifest.entries[1].stage, manifest.entries[2].stage,
      manifest.entries[3].stage, manifest.entries[4].stage, manifest.entries[5].stage,
      manifest.entries[6].stage};
  CHECK(stages == std::vector<std::string>{"full", "pooled", "firststage", "reranked",
                                           "reranked", "final", "score"});
  CHECK(manifest.entries[3].file == "reranked/scores.jsonl");
  CHECK(manifest.entries[4].file == "reranked/out.run");
}

TEST_CASE("execution is deterministic and replayable") {
  const auto base = make_workspace("replay");
  const auto spec = PipelineSpec::parse_file(repo_root() / "pipelines" / "run5.pipeline");
  execute(spec, base / "out1", base);
  execute(spec, base / "out2", base);
  const std::string m1 = read_file(base / "out1" / "manifest.tsv");
  const std::string m2 = read_file(base / "out2" / "manifest.tsv");
  CHECK(m1 == m2);
  CHECK(!m1.empty());
}

TEST_CASE("a failing stage keeps completed artifacts and is recorded") {
  const auto base = make_workspace("fail");
  const auto spec = PipelineSpec::parse_text(
      "version 1\n"
      "stage full retrieve\n"
      "  index work/index.bin\n"
      "  queries work/corpus/queries.jsonl\n"
      "  k 100\n"
      "stage broken rerank\n"
      "  input full\n"
      "  depth 10\n"
      "  scorer file\n"
      "  scores does_not_exist.jsonl\n"
      "stage score evaluate\n"
      "  input broken\n"
      "  qrels work/corpus/qrels.txt\n",
      "mem");
  const Manifest manifest = execute(spec, base / "out", base);
  REQUIRE(manifest.failed_stage.has_value());
  CHECK(*manifest.failed_stage == "broken");
  REQUIRE(manifest.entries.size() == 1);  // retrieve completed, evaluate skipped
  CHECK(std::filesystem::exists(base / "out" / "full" / "out.run"));
  const std::string manifest_text = read_file(base / "out" / "manifest.tsv");
  CHECK(manifest_text.find("FAILED\tbroken") != std::string::npos);
}

TEST_CASE("execute rejects invalid specs") {
  const auto spec = PipelineSpec::parse_text(
      "version 1\nstage e evaluate\n input ghost\n qrels q\n", "mem");
  CHECK_THROWS_AS(execute(spec, fresh_dir("invalid"), "."), std::invalid_argument);
}

TEST_CASE("synth corpus is seed-deterministic") {
  const auto dir_a = fresh_dir("synth_a");
  const auto dir_b = fresh_dir("synth_b");
  SynthConfig config;
  config.seed = 99;
  config.num_docs = 120;
  config.num_queries = 10;
  config.vocab_size = 500;
  config.planted_per_query = 3;
  write_synth_corpus(config, dir_a);
  write_synth_corpus(config, dir_b);
  for (const char* name : {"docs.jsonl", "queries.jsonl", "qrels.txt"}) {
    CHECK(read_file(dir_a / name) == read_file(dir_b / name));
  }
  config.seed = 100;
  write_synth_corpus(config, dir_b);
  CHECK(read_file(dir_a / "docs.jsonl") != read_file(dir_b / "docs.jsonl"));
}

TEST_CASE("synth with no planted relevance yields empty qrels") {
  SynthConfig config;
  config.num_docs = 50;
  config.num_queries = 5;
  config.vocab_size = 200;
  config.planted_per_query = 0;
  const SynthData data = synth_corpus(config);
  CHECK(data.qrels.queries().empty());
  CHECK(data.docs.size() == 50);
  CHECK(data.queries.size() == 5);
}

TEST_CASE("exact retrieval beats a shuffled-run baseline on the planted corpus") {
  SynthConfig config;
  config.seed = 7;
  config.num_docs = 500;
  config.num_queries = 25;
  config.vocab_size = 2000;
  config.planted_per_query = 5;
  const SynthData data = synth_corpus(config);
  const InvertedIndex index = InvertedIndex::build(data.docs, std::nullopt);
  const RankedRun run = batch_search(index, data.queries, 100, {}, {}, "synth", 1);
  const double real = ndcg_at_k(run, data.qrels, 20).mean;

  // random-permutation baseline: shuffle each query's list, 100 times
  std::mt19937_64 rng(123);
  double shuffled_sum = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    RankedRun shuffled("shuffled");
    for (const auto& [qid, entries] : run.queries()) {
      std::vector<RunEntry> permuted = entries;
      for (std::size_t i = permuted.size(); i > 1; --i) {
        std::swap(permuted[i - 1], permuted[rng() % i]);
      }
      double score = static_cast<double>(permuted.size());
      for (auto& e : permuted) e.score = score--;
      shuffled.set_query_sorted(qid, std::move(permuted));
    }
    shuffled_sum += ndcg_at_k(shuffled, data.qrels, 20).mean;
  }
  const double baseline = shuffled_sum / 100.0;
  CHECK(real > baseline);
  MESSAGE("planted corpus nDCG@20 ", real, " vs shuffle baseline ", baseline);
}
