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

#include "lsrkit/synth.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace lsrkit {

namespace {

// Portable samplers on top of the standardized mt19937_64 stream. The std
// distributions are implementation-defined, which would break byte-identical
// output across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double u01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  std::size_t nnz(double mean) {
    const auto v = static_cast<std::size_t>(mean * (0.5 + u01()));
    return std::max<std::size_t>(1, v);
  }

  // Quadratic skew toward low term ids: a crude popularity curve.
  TermId term(std::size_t vocab) {
    const double u = u01();
    return static_cast<TermId>(u * u * static_cast<double>(vocab));
  }

 private:
  std::mt19937_64 rng_;
};

std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t v = count > 0 ? count - 1 : 0; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(i);
  return prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::map<TermId, double> sample_vector(Sampler& rng, std::size_t vocab, double mean_nnz,
                                       double weight_base) {
  const std::size_t n = std::min(rng.nnz(mean_nnz), vocab);
  std::map<TermId, double> entries;
  while (entries.size() < n) {
    const TermId t = rng.term(vocab);
    const double u = rng.u01();
    entries.emplace(t, weight_base + 2.0 * u * u);
  }
  return entries;
}

SparseVector to_vector(const std::map<TermId, double>& entries) {
  std::vector<TermWeight> v;
  v.reserve(entries.size());
  for (const auto& [term, weight] : entries) v.push_back({term, weight});
  return SparseVector::from_sorted(std::move(v));
}

}  // namespace

SynthData synth_corpus(const SynthConfig& config) {
  if (config.num_docs == 0 || config.num_queries == 0 || config.vocab_size == 0) {
    throw std::invalid_argument("synth corpus dimensions must be positive");
  }
  Sampler rng(config.seed);

  std::vector<std::map<TermId, double>> docs;
  docs.reserve(config.num_docs);
  for (std::size_t i = 0; i < config.num_docs; ++i) {
    docs.push_back(sample_vector(rng, config.vocab_size, config.doc_nnz, 0.05));
  }

  std::vector<std::map<TermId, double>> queries;
  queries.reserve(config.num_queries);
  for (std::size_t j = 0; j < config.num_queries; ++j) {
    queries.push_back(sample_vector(rng, config.vocab_size, config.query_nnz, 0.1));
  }

  // Plant relevance: each relevant doc absorbs a grade-scaled subset of its
  // query's terms with boosted weights. Boost ranges overlap across grades so
  // first-stage retrieval makes inversions an oracle reranker can fix.
  Qrels qrels;
  const std::size_t planted = std::min(config.planted_per_query, config.num_docs);
  for (std::size_t j = 0; j < config.num_queries; ++j) {
    const std::string qid = padded_id('q', j, config.num_queries);
    std::vector<std::pair<TermId, double>> qterms(queries[j].begin(), queries[j].end());
    std::set<std::size_t> used;
    for (std::size_t r = 0; r < planted; ++r) {
      std::size_t di = rng.below(config.num_docs);
      while (used.count(di)) di = rng.below(config.num_docs);
      used.insert(di);

      const int grade = static_cast<int>(r % 3) + 1;
      const auto share = std::max<std::size_t>(
          1, static_cast<std::size_t>(static_cast<double>(qterms.size()) *
                                      (0.25 + 0.15 * grade)));
      std::set<std::size_t> picked;
      while (picked.size() < std::min(share, qterms.size())) {
        picked.insert(rng.below(qterms.size()));
      }
      for (std::size_t ti : picked) {
        const double boost =
            (0.7 + 0.45 * grade) * (0.5 + rng.u01());
        docs[di][qterms[ti].first] += boost;
      }
      qrels.set(qid, padded_id('d', di, config.num_docs), grade);
    }
  }

  SynthData data;
  data.docs.reserve(config.num_docs);
  for (std::size_t i = 0; i < config.num_docs; ++i) {
    data.docs.push_back({padded_id('d', i, config.num_docs), to_vector(docs[i])});
  }
  data.queries.reserve(config.num_queries);
  for (std::size_t j = 0; j < config.num_queries; ++j) {
    data.queries.push_back({padded_id('q', j, config.num_queries), to_vector(queries[j])});
  }
  data.qrels = std::move(qrels);
  return data;
}

SynthPaths write_synth_corpus(const SynthConfig& config,
                              const std::filesystem::path& out_dir) {
  const SynthData data = synth_corpus(config);
  std::filesystem::create_directories(out_dir);
  SynthPaths paths{out_dir / "docs.jsonl", out_dir / "queries.jsonl",
                   out_dir / "qrels.txt"};
  write_vectors(data.docs, paths.docs);
  write_vectors(data.queries, paths.queries);
  write_qrels(data.qrels, paths.qrels);
  return paths;
}

}  // namespace lsrkit
