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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsrkit/common.hpp"

namespace lsrkit {

// Declarative stage-graph format, version 1. Line-oriented: '#' starts a
// comment, the first directive must be `version 1`, and each
// `stage <name> <kind>` line opens a block of `key value...` lines.
//
//   version 1
//
//   stage first retrieve
//     index   work/index.bin
//     queries work/corpus/queries.jsonl
//     k       1000
//     # query-pool 40, mode approx, alpha/beta/gamma, tag are optional
//
//   stage fused fuse
//     inputs first second
//     k 10
//
//   stage better rerank
//     input  fused
//     depth  100
//     scorer oracle          # identity | oracle | noise | file
//     qrels  work/corpus/qrels.txt
//     # tail append_below | drop; seed for noise; scores <path> for file
//
//   stage scored evaluate
//     input  better
//     qrels  work/corpus/qrels.txt
//     metric ndcg
//     cutoff 20
//
// Relative paths are resolved against a base directory chosen at execution
// time. Stage outputs land under <workdir>/<stage>/: retrieve and fuse write
// out.run; rerank writes scores.jsonl plus out.run; evaluate writes
// report.txt. The manifest at <workdir>/manifest.tsv lists every artifact
// with its size and content checksum, in execution order.

struct RawStage {
  std::string name;
  std::string kind;
  std::map<std::string, std::vector<std::string>> keys;
  std::size_t line = 0;
};

struct PipelineSpec {
  int version = 0;
  std::vector<RawStage> stages;

  // Throws ParseError on syntax errors (bad version line, malformed stage
  // header, key outside a stage, repeated key). Semantic problems are
  // reported by validate() instead.
  static PipelineSpec parse_file(const std::filesystem::path& path);
  static PipelineSpec parse_text(std::string_view text, const std::string& context);
};

struct Diagnostic {
  std::string stage;  // empty for spec-level problems
  std::string message;
};

/// Empty result iff the spec is executable: known kinds, required keys
/// present and well-formed, references resolve, no cycles, evaluate stages
/// point at exactly one run-producing stage.
std::vector<Diagnostic> validate(const PipelineSpec& spec);

struct ManifestEntry {
  std::string stage;
  std::string file;  // relative to the workdir
  std::uint64_t size = 0;
  std::uint32_t crc32 = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;  // execution order
  std::optional<std::string> failed_stage;
  std::string error;
};

std::string encode_manifest(const Manifest& manifest);

/// Topological execution. Completed artifacts are kept on stage failure and
/// the manifest records the failure point. Every produced run is re-read and
/// invariant-checked before downstream stages consume it.
Manifest execute(const PipelineSpec& spec, const std::filesystem::path& workdir,
                 const std::filesystem::path& base_dir = ".", unsigned threads = 1);

}  // namespace lsrkit
