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

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsrkit/common.hpp"
#include "lsrkit/eval.hpp"
#include "lsrkit/fusion.hpp"
#include "lsrkit/index.hpp"
#include "lsrkit/pipeline.hpp"
#include "lsrkit/rerank.hpp"
#include "lsrkit/synth.hpp"

namespace {

using namespace lsrkit;

struct SearchArgs {
  std::string index_path;
  std::string queries_path;
  std::size_t k = 10;
  std::uint32_t query_pool = 0;  // 0 = none
  bool approx = false;
  double alpha = 0.5;
  std::size_t beta = 64;
  double gamma = 1.0;
  std::string tag = "lsrkit";
  std::string out;
};

void add_search_options(CLI::App* cmd, SearchArgs& args) {
  cmd->add_option("--index", args.index_path, "index file")->required();
  cmd->add_option("--queries", args.queries_path, "query vectors (JSONL)")->required();
  cmd->add_option("--k", args.k, "results per query")->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--query-pool", args.query_pool,
                  "keep only the K highest-weight query terms")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--approx", args.approx, "approximate (pruned) search");
  cmd->add_option("--alpha", args.alpha, "fraction of each posting list traversed")
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--beta", args.beta, "block size for skip summaries")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", args.gamma, "threshold scale (>= 1)")
      ->check(CLI::Range(1.0, 1e9));
  cmd->add_option("--run-tag", args.tag, "tag column for the output run");
  cmd->add_option("--out", args.out, "output run file")->required();
}

int run_search(const SearchArgs& args, unsigned threads) {
  const InvertedIndex index = InvertedIndex::load(args.index_path);
  const auto queries = read_vectors(args.queries_path);
  std::optional<std::uint32_t> pool;
  if (args.query_pool > 0) pool = args.query_pool;
  std::optional<ApproxConfig> approx;
  if (args.approx) approx = ApproxConfig{args.alpha, args.beta, args.gamma};
  const RankedRun run =
      batch_search(index, queries, args.k, pool, approx, args.tag, threads);
  write_run(run, args.out);
  log_info("wrote " + std::to_string(run.num_queries()) + " queries to " + args.out);
  return 0;
}

std::vector<std::pair<std::string, const MetricReport*>> named_reports(
    const std::vector<std::string>& names, const std::vector<MetricReport>& reports) {
  std::vector<std::pair<std::string, const MetricReport*>> out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out.emplace_back(names[i], &reports[i]);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learned-sparse-retrieval engine and cascade toolkit"};
  app.require_subcommand(1);

  unsigned threads = 1;
  std::string log_level = "warn";
  app.add_option("--threads", threads, "worker threads for batch search")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "error|warn|info|debug");

  // ---- index ----
  auto* index_cmd = app.add_subcommand("index", "build or query an inverted index");
  index_cmd->require_subcommand(1);

  auto* build_cmd = index_cmd->add_subcommand("build", "build an index from vectors");
  std::string build_vectors, build_out;
  std::uint32_t doc_pool = 0;
  build_cmd->add_option("--vectors", build_vectors, "document vectors (JSONL)")->required();
  build_cmd->add_option("--out", build_out, "output index file")->required();
  build_cmd->add_option("--doc-pool", doc_pool,
                        "keep only the K highest-weight terms per document")
      ->check(CLI::PositiveNumber);

  SearchArgs index_search_args;
  auto* index_search_cmd = index_cmd->add_subcommand("search", "top-k retrieval");
  add_search_options(index_search_cmd, index_search_args);

  SearchArgs search_args;
  auto* search_cmd = app.add_subcommand("search", "top-k retrieval (alias of index search)");
  add_search_options(search_cmd, search_args);

  // ---- fuse ----
  auto* fuse_cmd = app.add_subcommand("fuse", "combine ranked runs");
  fuse_cmd->require_subcommand(1);
  auto* rrf_cmd = fuse_cmd->add_subcommand("rrf", "reciprocal rank fusion");
  std::vector<std::string> fuse_runs;
  double fuse_k = 60.0;
  std::string fuse_tag = "fused", fuse_out;
  rrf_cmd->add_option("--runs", fuse_runs, "input run files (2+)")
      ->required()
      ->expected(2, -1);
  rrf_cmd->add_option("--k", fuse_k, "RRF smoothing constant")
      ->check(CLI::Range(1e-9, 1e12));
  rrf_cmd->add_option("--tag", fuse_tag, "output run tag");
  rrf_cmd->add_option("--out", fuse_out, "output run file")->required();

  // ---- rerank ----
  auto* rerank_cmd = app.add_subcommand("rerank", "top-N rerank-and-splice");
  rerank_cmd->require_subcommand(1);

  auto* extract_cmd = rerank_cmd->add_subcommand("extract", "export top-N candidates");
  std::string extract_run, extract_out;
  std::size_t extract_n = 100;
  extract_cmd->add_option("--run", extract_run, "input run")->required();
  extract_cmd->add_option("--n", extract_n, "candidates per query")
      ->required()->check(CLI::PositiveNumber);
  extract_cmd->add_option("--out", extract_out, "candidates JSONL")->required();

  auto* splice_cmd = rerank_cmd->add_subcommand("splice", "apply reranker scores");
  std::string splice_run, splice_scores, splice_tag = "reranked", splice_out;
  std::string splice_tail = "append_below";
  std::size_t splice_n = 100;
  splice_cmd->add_option("--run", splice_run, "input run")->required();
  splice_cmd->add_option("--scores", splice_scores, "reranker scores JSONL")->required();
  splice_cmd->add_option("--n", splice_n, "rerank depth")->required()
      ->check(CLI::PositiveNumber);
  splice_cmd->add_option("--tail", splice_tail, "append_below|drop")
      ->check(CLI::IsMember({"append_below", "drop"}));
  splice_cmd->add_option("--tag", splice_tag, "output run tag");
  splice_cmd->add_option("--out", splice_out, "output run file")->required();

  auto* sweep_cmd = rerank_cmd->add_subcommand("sweep", "nDCG across rerank depths");
  std::string sweep_run, sweep_qrels, sweep_scores, sweep_scorer = "file", sweep_out;
  std::vector<std::size_t> sweep_depths;
  std::size_t sweep_cutoff = 20;
  std::uint64_t sweep_seed = 0;
  sweep_cmd->add_option("--run", sweep_run, "input run")->required();
  sweep_cmd->add_option("--depths", sweep_depths, "comma-separated depths")
      ->required()->delimiter(',')->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--qrels", sweep_qrels, "relevance judgments")->required();
  sweep_cmd->add_option("--scores", sweep_scores, "reranker scores JSONL");
  sweep_cmd->add_option("--scorer", sweep_scorer,
                        "file|identity|oracle|noise (default file)")
      ->check(CLI::IsMember({"file", "identity", "oracle", "noise"}));
  sweep_cmd->add_option("--seed", sweep_seed, "seed for the noise scorer");
  sweep_cmd->add_option("--cutoff", sweep_cutoff, "metric cutoff")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_out, "write the table here instead of stdout");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate runs against qrels");
  std::string eval_run, eval_qrels, eval_metric = "ndcg", eval_per_query;
  std::size_t eval_k = 20;
  bool eval_exp_gain = false;
  eval_cmd->add_option("--run", eval_run, "run file");
  eval_cmd->add_option("--qrels", eval_qrels, "relevance judgments");
  eval_cmd->add_option("--metric", eval_metric, "ndcg|recall")
      ->check(CLI::IsMember({"ndcg", "recall"}));
  eval_cmd->add_option("--k", eval_k, "cutoff")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--exp-gain", eval_exp_gain, "use 2^grade - 1 gains for nDCG");
  eval_cmd->add_option("--per-query", eval_per_query, "write per-query TSV here");

  auto* compare_cmd = eval_cmd->add_subcommand("compare", "side-by-side run comparison");
  std::vector<std::string> compare_runs;
  std::string compare_qrels, compare_metric = "ndcg", compare_per_query;
  std::size_t compare_k = 20;
  compare_cmd->add_option("--runs", compare_runs, "run files")
      ->required()->expected(1, -1);
  compare_cmd->add_option("--qrels", compare_qrels, "relevance judgments")->required();
  compare_cmd->add_option("--metric", compare_metric, "ndcg|recall")
      ->check(CLI::IsMember({"ndcg", "recall"}));
  compare_cmd->add_option("--k", compare_k, "cutoff")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--per-query", compare_per_query, "write per-query TSV here");

  // ---- pipeline ----
  auto* pipeline_cmd = app.add_subcommand("pipeline", "declarative stage graphs");
  pipeline_cmd->require_subcommand(1);
  auto* validate_cmd = pipeline_cmd->add_subcommand("validate", "check a spec");
  std::string validate_spec;
  validate_cmd->add_option("spec", validate_spec, "pipeline spec file")->required();
  auto* run_cmd = pipeline_cmd->add_subcommand("run", "execute a spec");
  std::string run_spec, run_workdir, run_base = ".";
  run_cmd->add_option("spec", run_spec, "pipeline spec file")->required();
  run_cmd->add_option("--workdir", run_workdir, "output directory")->required();
  run_cmd->add_option("--base", run_base, "base directory for relative input paths");

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  SynthConfig synth_config;
  std::string synth_out;
  synth_cmd->add_option("--seed", synth_config.seed, "RNG seed");
  synth_cmd->add_option("--docs", synth_config.num_docs, "number of documents")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--queries", synth_config.num_queries, "number of queries")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--vocab", synth_config.vocab_size, "vocabulary size")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--doc-nnz", synth_config.doc_nnz, "mean document nnz")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--query-nnz", synth_config.query_nnz, "mean query nnz")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--relevant", synth_config.planted_per_query,
                        "planted relevant docs per query");
  synth_cmd->add_option("--out-dir", synth_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    set_log_level(parse_log_level(log_level));

    if (build_cmd->parsed()) {
      VectorFileReader reader(build_vectors);
      std::optional<std::uint32_t> pool;
      if (doc_pool > 0) pool = doc_pool;
      const InvertedIndex index = InvertedIndex::build(reader, pool);
      index.save(build_out);
      const CollectionStats stats = index.stats();
      std::cout << "indexed " << stats.count << " docs, " << stats.total_postings
                << " postings, mean l0 " << format_double(stats.mean_l0) << ", max l0 "
                << stats.max_l0 << "\n";
      return 0;
    }
    if (index_search_cmd->parsed()) return run_search(index_search_args, threads);
    if (search_cmd->parsed()) return run_search(search_args, threads);

    if (rrf_cmd->parsed()) {
      std::vector<RankedRun> runs;
      runs.reserve(fuse_runs.size());
      for (const auto& path : fuse_runs) runs.push_back(read_run(path));
      std::vector<const RankedRun*> ptrs;
      for (const auto& r : runs) ptrs.push_back(&r);
      write_run(rrf_fuse(ptrs, RrfConfig{fuse_k}, fuse_tag), fuse_out);
      return 0;
    }

    if (extract_cmd->parsed()) {
      write_candidates(read_run(extract_run), extract_n, extract_out);
      return 0;
    }
    if (splice_cmd->parsed()) {
      RerankConfig config;
      config.depth = splice_n;
      config.tail = splice_tail == "drop" ? TailPolicy::kDrop : TailPolicy::kAppendBelow;
      const RankedRun run = read_run(splice_run);
      write_run(splice_rerank(run, read_scores(splice_scores), config, splice_tag),
                splice_out);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const RankedRun run = read_run(sweep_run);
      const Qrels qrels = read_qrels(sweep_qrels);
      RerankScores scores;
      if (sweep_scorer == "file") {
        if (sweep_scores.empty()) {
          std::cerr << "error: --scorer file needs --scores\n";
          return 1;
        }
        scores = read_scores(sweep_scores);
      } else {
        const std::size_t max_depth =
            *std::max_element(sweep_depths.begin(), sweep_depths.end());
        const BuiltinScorer mode = sweep_scorer == "identity" ? BuiltinScorer::kIdentity
                                   : sweep_scorer == "oracle" ? BuiltinScorer::kOracle
                                                              : BuiltinScorer::kNoise;
        scores = builtin_reranker(run, max_depth, mode,
                                  sweep_scorer == "oracle" ? &qrels : nullptr, sweep_seed);
      }
      const auto rows = depth_sweep(run, scores, sweep_depths, qrels, sweep_cutoff);
      const std::string table = render_sweep_table(rows, sweep_cutoff);
      if (sweep_out.empty()) {
        std::cout << table;
      } else {
        write_file_atomic(sweep_out, table);
      }
      return 0;
    }

    if (compare_cmd->parsed()) {
      const Qrels qrels = read_qrels(compare_qrels);
      std::vector<MetricReport> reports;
      std::vector<std::string> names;
      for (const auto& path : compare_runs) {
        const RankedRun run = read_run(path);
        names.push_back(run.tag().empty() ? path : run.tag());
        reports.push_back(compare_metric == "recall" ? recall_at_k(run, qrels, compare_k)
                                                     : ndcg_at_k(run, qrels, compare_k));
      }
      const auto named = named_reports(names, reports);
      std::cout << compare_table(named);
      if (!compare_per_query.empty()) {
        write_file_atomic(compare_per_query, per_query_tsv(named));
      }
      return 0;
    }
    if (eval_cmd->parsed()) {
      if (eval_run.empty() || eval_qrels.empty()) {
        std::cerr << "error: eval needs --run and --qrels\n";
        return 1;
      }
      const RankedRun run = read_run(eval_run);
      const Qrels qrels = read_qrels(eval_qrels);
      const MetricReport report =
          eval_metric == "recall"
              ? recall_at_k(run, qrels, eval_k)
              : ndcg_at_k(run, qrels, eval_k,
                          eval_exp_gain ? GainMode::kExponential : GainMode::kLinear);
      char rounded[16];
      std::snprintf(rounded, sizeof(rounded), "%.3f", report.mean);
      std::cout << report.metric << "@" << report.cutoff << " " << rounded << "  (mean "
                << format_double(report.mean) << " over " << report.query_count
                << " queries, " << report.unjudged_queries << " without judgments)\n";
      if (!eval_per_query.empty()) {
        const std::string name = run.tag().empty() ? eval_run : run.tag();
        write_file_atomic(eval_per_query, per_query_tsv({{name, &report}}));
      }
      return 0;
    }

    if (validate_cmd->parsed()) {
      const PipelineSpec spec = PipelineSpec::parse_file(validate_spec);
      const auto diags = validate(spec);
      for (const auto& d : diags) {
        std::cout << (d.stage.empty() ? std::string("(spec)") : d.stage) << ": "
                  << d.message << "\n";
      }
      if (diags.empty()) {
        std::cout << "ok: " << spec.stages.size() << " stages\n";
        return 0;
      }
      return 1;
    }
    if (run_cmd->parsed()) {
      const PipelineSpec spec = PipelineSpec::parse_file(run_spec);
      const Manifest manifest = execute(spec, run_workdir, run_base, threads);
      for (const auto& e : manifest.entries) {
        std::cout << e.stage << "\t" << e.file << "\n";
      }
      if (manifest.failed_stage) {
        std::cerr << "error: stage " << *manifest.failed_stage << " failed: "
                  << manifest.error << "\n";
        return 1;
      }
      return 0;
    }

    if (synth_cmd->parsed()) {
      const SynthPaths paths = write_synth_corpus(synth_config, synth_out);
      std::cout << "wrote " << paths.docs.string() << ", " << paths.queries.string()
                << ", " << paths.qrels.string() << "\n";
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
