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

#include "lsrkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lsrkit/common.hpp"

namespace lsrkit {

namespace {

double gain_of(int grade, GainMode mode) {
  if (mode == GainMode::kLinear) return static_cast<double>(grade);
  return std::exp2(static_cast<double>(grade)) - 1.0;
}

bool has_positive(const std::map<DocId, int>& judgments) {
  for (const auto& [doc, grade] : judgments) {
    if (grade > 0) return true;
  }
  return false;
}

// Union of run and qrels query ids, split into evaluated (>= 1 positive
// judgment) and unjudged.
struct QueryUniverse {
  std::vector<std::string> evaluated;
  std::size_t unjudged = 0;
};

QueryUniverse query_universe(const RankedRun& run, const Qrels& qrels) {
  std::set<std::string> all;
  for (const auto& [qid, entries] : run.queries()) all.insert(qid);
  for (const auto& [qid, docs] : qrels.queries()) all.insert(qid);

  QueryUniverse u;
  for (const auto& qid : all) {
    const auto* judgments = qrels.find_query(qid);
    if (judgments && has_positive(*judgments)) {
      u.evaluated.push_back(qid);
    } else {
      ++u.unjudged;
    }
  }
  return u;
}

MetricReport make_report(const RankedRun& run, const Qrels& qrels, std::string metric,
                         std::size_t k,
                         const std::function<double(const std::vector<RunEntry>*,
                                                    const std::map<DocId, int>&)>& value) {
  if (k == 0) throw std::invalid_argument("cutoff must be >= 1");
  const QueryUniverse u = query_universe(run, qrels);
  MetricReport report;
  report.metric = std::move(metric);
  report.cutoff = k;
  report.unjudged_queries = u.unjudged;
  double sum = 0.0;
  for (const auto& qid : u.evaluated) {
    const double v = value(run.find_query(qid), *qrels.find_query(qid));
    report.per_query[qid] = v;
    sum += v;
  }
  report.query_count = report.per_query.size();
  report.mean = report.query_count == 0
                    ? 0.0
                    : sum / static_cast<double>(report.query_count);
  return report;
}

}  // namespace

MetricReport ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k,
                       GainMode gain) {
  return make_report(
      run, qrels, "ndcg", k,
      [k, gain](const std::vector<RunEntry>* entries,
                const std::map<DocId, int>& judgments) {
        double dcg = 0.0;
        if (entries) {
          const std::size_t depth = std::min(k, entries->size());
          for (std::size_t i = 0; i < depth; ++i) {
            auto it = judgments.find((*entries)[i].doc);
            const int grade = it == judgments.end() ? 0 : it->second;
            if (grade > 0) {
              dcg += gain_of(grade, gain) / std::log2(static_cast<double>(i) + 2.0);
            }
          }
        }
        std::vector<int> grades;
        grades.reserve(judgments.size());
        for (const auto& [doc, grade] : judgments) {
          if (grade > 0) grades.push_back(grade);
        }
        std::sort(grades.begin(), grades.end(), std::greater<int>());
        double idcg = 0.0;
        const std::size_t ideal_depth = std::min(k, grades.size());
        for (std::size_t i = 0; i < ideal_depth; ++i) {
          idcg += gain_of(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
        }
        return idcg > 0.0 ? dcg / idcg : 0.0;  // idcg == 0 never reaches here
      });
}

MetricReport recall_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
  return make_report(
      run, qrels, "recall", k,
      [k](const std::vector<RunEntry>* entries, const std::map<DocId, int>& judgments) {
        std::size_t relevant = 0;
        for (const auto& [doc, grade] : judgments) {
          if (grade > 0) ++relevant;
        }
        std::size_t found = 0;
        if (entries) {
          const std::size_t depth = std::min(k, entries->size());
          for (std::size_t i = 0; i < depth; ++i) {
            auto it = judgments.find((*entries)[i].doc);
            if (it != judgments.end() && it->second > 0) ++found;
          }
        }
        return static_cast<double>(found) / static_cast<double>(relevant);
      });
}

std::string compare_table(
    const std::vector<std::pair<std::string, const MetricReport*>>& reports) {
  if (reports.empty()) return "";
  const std::string& metric = reports.front().second->metric;
  const std::size_t cutoff = reports.front().second->cutoff;
  std::size_t width = 0;
  for (const auto& [name, report] : reports) {
    if (report->metric != metric || report->cutoff != cutoff) {
      throw std::invalid_argument("compare_table: mismatched metric/cutoff (" +
                                  report->metric + "@" + std::to_string(report->cutoff) +
                                  " vs " + metric + "@" + std::to_string(cutoff) + ")");
    }
    width = std::max(width, name.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "" << "  " << metric << "@"
      << cutoff << "\n";
  for (const auto& [name, report] : reports) {
    char value[16];
    std::snprintf(value, sizeof(value), "%.3f", report->mean);
    out << std::left << std::setw(static_cast<int>(width)) << name << "  " << value
        << "\n";
  }
  return out.str();
}

std::string per_query_tsv(
    const std::vector<std::pair<std::string, const MetricReport*>>& reports) {
  std::set<std::string> qids;
  for (const auto& [name, report] : reports) {
    for (const auto& [qid, v] : report->per_query) qids.insert(qid);
  }
  std::string out = "qid";
  for (const auto& [name, report] : reports) out += "\t" + name;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    out += "\tdelta_" + reports[i].first;
  }
  out += '\n';
  for (const auto& qid : qids) {
    out += qid;
    std::vector<double> values;
    for (const auto& [name, report] : reports) {
      auto it = report->per_query.find(qid);
      values.push_back(it == report->per_query.end() ? 0.0 : it->second);
      out += '\t' + format_double(values.back());
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
      out += '\t' + format_double(values[i] - values[0]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace lsrkit
