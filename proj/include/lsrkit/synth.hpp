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

#include "lsrkit/formats.hpp"

namespace lsrkit {

/// Seeded synthetic collection: each query gets `planted_per_query` relevant
/// documents that share boosted query terms, with grades cycling 1..3 and the
/// term boost growing with the grade, so retrieval quality is measurable and
/// an oracle reranker has real work to do.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t num_docs = 1000;
  std::size_t num_queries = 50;
  std::size_t vocab_size = 5000;
  // nnz is drawn uniformly from [0.5 * mean, 1.5 * mean), at least 1.
  double doc_nnz = 80.0;
  double query_nnz = 24.0;
  std::size_t planted_per_query = 5;
};

struct SynthData {
  std::vector<VectorRecord> docs;
  std::vector<VectorRecord> queries;
  Qrels qrels;
};

// Generation uses mt19937_64 plus hand-rolled samplers only, so identical
// seeds give byte-identical files on any platform.
SynthData synth_corpus(const SynthConfig& config);

struct SynthPaths {
  std::filesystem::path docs;
  std::filesystem::path queries;
  std::filesystem::path qrels;
};

SynthPaths write_synth_corpus(const SynthConfig& config,
                              const std::filesystem::path& out_dir);

}  // namespace lsrkit
