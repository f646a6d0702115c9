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

#include "lsrkit/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lsrkit/eval.hpp"
#include "lsrkit/fusion.hpp"
#include "lsrkit/index.hpp"
#include "lsrkit/rerank.hpp"

namespace lsrkit {

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

const std::set<std::string> kStageKinds = {"retrieve", "fuse", "rerank", "evaluate"};
const char* kRunProducing[] = {"retrieve", "fuse", "rerank"};

bool produces_run(const std::string& kind) {
  return std::find(std::begin(kRunProducing), std::end(kRunProducing), kind) !=
         std::end(kRunProducing);
}

struct KeyView {
  const RawStage& stage;
  std::vector<Diagnostic>& diags;

  const std::vector<std::string>* get(const std::string& key) const {
    auto it = stage.keys.find(key);
    return it == stage.keys.end() ? nullptr : &it->second;
  }
  std::optional<std::string> single(const std::string& key) const {
    const auto* vals = get(key);
    if (!vals) return std::nullopt;
    if (vals->size() != 1) {
      diags.push_back({stage.name, "key \"" + key + "\" wants exactly one value"});
      return std::nullopt;
    }
    return (*vals)[0];
  }
  std::optional<std::uint64_t> positive_int(const std::string& key) const {
    auto raw = single(key);
    if (!raw) return std::nullopt;
    std::uint64_t v = 0;
    if (!parse_u64(*raw, v) || v == 0) {
      diags.push_back({stage.name, "key \"" + key + "\" wants a positive integer, got \"" +
                                        *raw + "\""});
      return std::nullopt;
    }
    return v;
  }
  std::optional<double> positive_real(const std::string& key) const {
    auto raw = single(key);
    if (!raw) return std::nullopt;
    double v = 0;
    if (!parse_double(*raw, v) || !(v > 0)) {
      diags.push_back({stage.name, "key \"" + key + "\" wants a positive number, got \"" +
                                        *raw + "\""});
      return std::nullopt;
    }
    return v;
  }
  void require(const std::string& key) const {
    if (!get(key)) diags.push_back({stage.name, "missing required key \"" + key + "\""});
  }
  void reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, vals] : stage.keys) {
      if (!known.count(key)) {
        diags.push_back({stage.name, "unknown key \"" + key + "\""});
      }
    }
  }
};

std::vector<std::string> stage_inputs(const RawStage& stage) {
  std::vector<std::string> inputs;
  auto copy_all = [&](const char* key) {
    auto it = stage.keys.find(key);
    if (it != stage.keys.end()) {
      inputs.insert(inputs.end(), it->second.begin(), it->second.end());
    }
  };
  copy_all("inputs");
  copy_all("input");
  return inputs;
}

}  // namespace

PipelineSpec PipelineSpec::parse_text(std::string_view text, const std::string& context) {
  PipelineSpec spec;
  bool saw_version = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::set<std::string> names;

  while (pos <= text.size()) {
    if (pos == text.size()) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (!saw_version) {
      if (tokens.size() != 2 || tokens[0] != "version") {
        throw ParseError(context, line_no, "expected \"version <n>\" first");
      }
      std::uint64_t v = 0;
      if (!parse_u64(tokens[1], v) || v != 1) {
        throw ParseError(context, line_no, "unsupported pipeline version \"" +
                                               tokens[1] + "\"");
      }
      spec.version = static_cast<int>(v);
      saw_version = true;
      continue;
    }

    if (tokens[0] == "stage") {
      if (tokens.size() != 3) {
        throw ParseError(context, line_no, "expected \"stage <name> <kind>\"");
      }
      if (!names.insert(tokens[1]).second) {
        throw ParseError(context, line_no, "duplicate stage name \"" + tokens[1] + "\"");
      }
      spec.stages.push_back({tokens[1], tokens[2], {}, line_no});
      continue;
    }

    if (spec.stages.empty()) {
      throw ParseError(context, line_no, "key line before any stage");
    }
    RawStage& stage = spec.stages.back();
    const std::string key = tokens[0];
    if (stage.keys.count(key)) {
      throw ParseError(context, line_no, "repeated key \"" + key + "\" in stage \"" +
                                             stage.name + "\"");
    }
    stage.keys[key] = std::vector<std::string>(tokens.begin() + 1, tokens.end());
  }
  if (!saw_version) throw ParseError(context, 1, "empty spec: missing version line");
  return spec;
}

PipelineSpec PipelineSpec::parse_file(const std::filesystem::path& path) {
  return parse_text(read_file(path), path.string());
}

std::vector<Diagnostic> validate(const PipelineSpec& spec) {
  std::vector<Diagnostic> diags;
  std::set<std::string> names;
  std::map<std::string, const RawStage*> by_name;
  for (const auto& stage : spec.stages) {
    names.insert(stage.name);
    by_name[stage.name] = &stage;
  }

  for (const auto& stage : spec.stages) {
    KeyView view{stage, diags};
    if (!kStageKinds.count(stage.kind)) {
      diags.push_back({stage.name, "unknown stage kind \"" + stage.kind + "\""});
      continue;
    }
    if (stage.kind == "retrieve") {
      view.require("index");
      view.require("queries");
      view.require("k");
      view.positive_int("k");
      if (view.get("query-pool")) view.positive_int("query-pool");
      if (auto mode = view.single("mode"); mode && *mode != "exact" && *mode != "approx") {
        diags.push_back({stage.name, "mode must be exact or approx, got \"" + *mode + "\""});
      }
      if (view.get("alpha")) {
        if (auto a = view.positive_real("alpha"); a && *a > 1.0) {
          diags.push_back({stage.name, "alpha must be in (0, 1]"});
        }
      }
      if (view.get("beta")) view.positive_int("beta");
      if (view.get("gamma")) {
        if (auto g = view.positive_real("gamma"); g && *g < 1.0) {
          diags.push_back({stage.name, "gamma must be >= 1"});
        }
      }
      view.reject_unknown({"index", "queries", "k", "query-pool", "mode", "alpha",
                           "beta", "gamma", "tag"});
    } else if (stage.kind == "fuse") {
      view.require("inputs");
      view.require("k");
      view.positive_real("k");
      if (const auto* inputs = view.get("inputs"); inputs && inputs->size() < 2) {
        diags.push_back({stage.name, "fuse wants at least 2 inputs"});
      }
      view.reject_unknown({"inputs", "k", "tag"});
    } else if (stage.kind == "rerank") {
      view.require("input");
      view.single("input");
      view.require("depth");
      view.positive_int("depth");
      view.require("scorer");
      auto scorer = view.single("scorer");
      if (scorer) {
        if (*scorer == "oracle") {
          view.require("qrels");
        } else if (*scorer == "file") {
          view.require("scores");
        } else if (*scorer == "noise") {
          if (view.get("seed")) view.single("seed");
        } else if (*scorer != "identity") {
          diags.push_back({stage.name,
                           "scorer must be identity, oracle, noise or file, got \"" +
                               *scorer + "\""});
        }
      }
      if (auto tail = view.single("tail");
          tail && *tail != "append_below" && *tail != "drop") {
        diags.push_back({stage.name, "tail must be append_below or drop"});
      }
      view.reject_unknown({"input", "depth", "scorer", "qrels", "scores", "seed",
                           "tail", "tag"});
    } else if (stage.kind == "evaluate") {
      view.require("input");
      view.single("input");
      view.require("qrels");
      if (auto metric = view.single("metric");
          metric && *metric != "ndcg" && *metric != "recall") {
        diags.push_back({stage.name, "metric must be ndcg or recall"});
      }
      if (view.get("cutoff")) view.positive_int("cutoff");
      view.reject_unknown({"input", "qrels", "metric", "cutoff"});
    }

    // Reference checks.
    for (const auto& ref : stage_inputs(stage)) {
      if (!names.count(ref)) {
        diags.push_back({stage.name, "references undefined stage \"" + ref + "\""});
      } else if (ref == stage.name) {
        diags.push_back({stage.name, "references itself"});
      } else if (!produces_run(by_name.at(ref)->kind)) {
        diags.push_back({stage.name,
                         "input \"" + ref + "\" does not produce a run (kind " +
                             by_name.at(ref)->kind + ")"});
      }
    }
  }

  // Cycle detection over resolvable edges (Kahn).
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> downstream;
  std::set<std::string> names_ok;
  for (const auto& stage : spec.stages) {
    indegree[stage.name];
    names_ok.insert(stage.name);
  }
  for (const auto& stage : spec.stages) {
    for (const auto& ref : stage_inputs(stage)) {
      if (names_ok.count(ref) && ref != stage.name) {
        downstream[ref].push_back(stage.name);
        ++indegree[stage.name];
      }
    }
  }
  std::vector<std::string> ready;
  for (const auto& [name, deg] : indegree) {
    if (deg == 0) ready.push_back(name);
  }
  std::size_t emitted = 0;
  while (!ready.empty()) {
    const std::string name = ready.back();
    ready.pop_back();
    ++emitted;
    for (const auto& next : downstream[name]) {
      if (--indegree[next] == 0) ready.push_back(next);
    }
  }
  if (emitted != indegree.size()) {
    std::string cycle;
    for (const auto& [name, deg] : indegree) {
      if (deg > 0) {
        if (!cycle.empty()) cycle += ", ";
        cycle += name;
      }
    }
    diags.push_back({"", "dependency cycle between stages: " + cycle});
  }
  return diags;
}

std::string encode_manifest(const Manifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    char crc[16];
    std::snprintf(crc, sizeof(crc), "%08x", e.crc32);
    out += e.stage + '\t' + e.file + '\t' + std::to_string(e.size) + '\t' + crc + '\n';
  }
  if (manifest.failed_stage) {
    out += "FAILED\t" + *manifest.failed_stage + '\t' + manifest.error + '\n';
  }
  return out;
}

namespace {

class Executor {
 public:
  Executor(const PipelineSpec& spec, std::filesystem::path workdir,
           std::filesystem::path base, unsigned threads)
      : spec_(spec), workdir_(std::move(workdir)), base_(std::move(base)),
        threads_(threads) {}

  Manifest run() {
    std::filesystem::create_directories(workdir_);
    const auto order = topological_order();
    for (const RawStage* stage : order) {
      try {
        execute_stage(*stage);
      } catch (const std::exception& ex) {
        manifest_.failed_stage = stage->name;
        manifest_.error = ex.what();
        log_error("stage " + stage->name + " failed: " + ex.what());
        break;
      }
    }
    write_file_atomic(workdir_ / "manifest.tsv", encode_manifest(manifest_));
    return manifest_;
  }

 private:
  std::vector<const RawStage*> topological_order() const {
    // Kahn's algorithm; ready stages run in declaration order so execution
    // (and the manifest) is deterministic.
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> downstream;
    std::map<std::string, const RawStage*> by_name;
    for (const auto& stage : spec_.stages) {
      indegree[stage.name];
      by_name[stage.name] = &stage;
    }
    for (const auto& stage : spec_.stages) {
      for (const auto& ref : stage_inputs(stage)) {
        downstream[ref].push_back(stage.name);
        ++indegree[stage.name];
      }
    }
    std::vector<const RawStage*> order;
    std::set<std::string> done;
    while (order.size() < spec_.stages.size()) {
      for (const auto& stage : spec_.stages) {
        if (done.count(stage.name) || indegree[stage.name] != 0) continue;
        order.push_back(&stage);
        done.insert(stage.name);
        for (const auto& next : downstream[stage.name]) --indegree[next];
      }
    }
    return order;
  }

  std::filesystem::path resolve(const std::string& raw) const {
    std::filesystem::path p(raw);
    return p.is_absolute() ? p : base_ / p;
  }

  std::string value(const RawStage& stage, const std::string& key) const {
    return stage.keys.at(key).at(0);
  }
  std::optional<std::string> maybe(const RawStage& stage, const std::string& key) const {
    auto it = stage.keys.find(key);
    return it == stage.keys.end() ? std::nullopt
                                  : std::optional<std::string>(it->second.at(0));
  }
  std::string tag_of(const RawStage& stage) const {
    return maybe(stage, "tag").value_or(stage.name);
  }

  void record(const std::string& stage, const std::filesystem::path& path) {
    const std::string content = read_file(path);
    manifest_.entries.push_back(
        {stage, std::filesystem::relative(path, workdir_).generic_string(),
         content.size(), crc32_bytes(content)});
  }

  // Writes, records, re-reads and invariant-checks a produced run.
  void emit_run(const RawStage& stage, const RankedRun& run) {
    const auto path = workdir_ / stage.name / "out.run";
    write_run(run, path);
    record(stage.name, path);
    runs_[stage.name] = read_run(path);
  }

  const InvertedIndex& load_index_cached(const std::filesystem::path& path) {
    const std::string key = path.string();
    auto it = index_cache_.find(key);
    if (it == index_cache_.end()) {
      it = index_cache_.emplace(key, InvertedIndex::load(path)).first;
    }
    return it->second;
  }

  void execute_stage(const RawStage& stage) {
    if (stage.kind == "retrieve") {
      const InvertedIndex& index = load_index_cached(resolve(value(stage, "index")));
      const auto queries = read_vectors(resolve(value(stage, "queries")));
      std::uint64_t k = 0;
      parse_u64(value(stage, "k"), k);
      std::optional<std::uint32_t> pool;
      if (auto raw = maybe(stage, "query-pool")) {
        std::uint64_t v = 0;
        parse_u64(*raw, v);
        pool = static_cast<std::uint32_t>(v);
      }
      std::optional<ApproxConfig> approx;
      if (maybe(stage, "mode").value_or("exact") == "approx") {
        ApproxConfig cfg;
        if (auto a = maybe(stage, "alpha")) parse_double(*a, cfg.alpha);
        if (auto b = maybe(stage, "beta")) {
          std::uint64_t v = 0;
          parse_u64(*b, v);
          cfg.block_size = v;
        }
        if (auto g = maybe(stage, "gamma")) parse_double(*g, cfg.gamma);
        approx = cfg;
      }
      emit_run(stage, batch_search(index, queries, k, pool, approx, tag_of(stage),
                                   threads_));
    } else if (stage.kind == "fuse") {
      std::vector<const RankedRun*> inputs;
      for (const auto& name : stage.keys.at("inputs")) inputs.push_back(&runs_.at(name));
      double k = 0;
      parse_double(value(stage, "k"), k);
      emit_run(stage, rrf_fuse(inputs, RrfConfig{k}, tag_of(stage)));
    } else if (stage.kind == "rerank") {
      const RankedRun& input = runs_.at(value(stage, "input"));
      std::uint64_t depth = 0;
      parse_u64(value(stage, "depth"), depth);
      const std::string scorer = value(stage, "scorer");

      RerankScores scores;
      if (scorer == "file") {
        scores = read_scores(resolve(value(stage, "scores")));
      } else {
        Qrels qrels;
        if (scorer == "oracle") qrels = read_qrels(resolve(value(stage, "qrels")));
        std::uint64_t seed = 0;
        if (auto raw = maybe(stage, "seed")) parse_u64(*raw, seed);
        const BuiltinScorer mode = scorer == "identity" ? BuiltinScorer::kIdentity
                                   : scorer == "oracle" ? BuiltinScorer::kOracle
                                                        : BuiltinScorer::kNoise;
        scores = builtin_reranker(input, depth, mode,
                                  scorer == "oracle" ? &qrels : nullptr, seed);
      }
      const auto scores_path = workdir_ / stage.name / "scores.jsonl";
      write_scores(scores, scores_path);
      record(stage.name, scores_path);

      RerankConfig config;
      config.depth = depth;
      config.tail = maybe(stage, "tail").value_or("append_below") == "drop"
                        ? TailPolicy::kDrop
                        : TailPolicy::kAppendBelow;
      emit_run(stage, splice_rerank(input, scores, config, tag_of(stage)));
    } else if (stage.kind == "evaluate") {
      const RankedRun& input = runs_.at(value(stage, "input"));
      const Qrels qrels = read_qrels(resolve(value(stage, "qrels")));
      const std::string metric = maybe(stage, "metric").value_or("ndcg");
      std::uint64_t cutoff = 20;
      if (auto raw = maybe(stage, "cutoff")) parse_u64(*raw, cutoff);
      const MetricReport report = metric == "recall"
                                      ? recall_at_k(input, qrels, cutoff)
                                      : ndcg_at_k(input, qrels, cutoff);
      std::string text = "metric " + report.metric + "@" + std::to_string(report.cutoff) +
                         "\nrun " + input.tag() + "\nmean " + format_double(report.mean);
      char rounded[16];
      std::snprintf(rounded, sizeof(rounded), "%.3f", report.mean);
      text += std::string("\nmean_rounded ") + rounded;
      text += "\nqueries " + std::to_string(report.query_count);
      text += "\nunjudged " + std::to_string(report.unjudged_queries) + "\n";
      const auto path = workdir_ / stage.name / "report.txt";
      write_file_atomic(path, text);
      record(stage.name, path);
    } else {
      throw std::invalid_argument("unknown stage kind " + stage.kind);
    }
  }

  const PipelineSpec& spec_;
  std::filesystem::path workdir_;
  std::filesystem::path base_;
  unsigned threads_;
  Manifest manifest_;
  std::map<std::string, RankedRun> runs_;
  std::unordered_map<std::string, InvertedIndex> index_cache_;
};

}  // namespace

Manifest execute(const PipelineSpec& spec, const std::filesystem::path& workdir,
                 const std::filesystem::path& base_dir, unsigned threads) {
  const auto diags = validate(spec);
  if (!diags.empty()) {
    std::string msg = "pipeline spec is invalid:";
    for (const auto& d : diags) {
      msg += "\n  " + (d.stage.empty() ? std::string("(spec)") : d.stage) + ": " +
             d.message;
    }
    throw std::invalid_argument(msg);
  }
  return Executor(spec, workdir, base_dir, threads).run();
}

}  // namespace lsrkit
