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

#include "lsrkit/formats.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace lsrkit {

namespace {

bool valid_doc_id(std::string_view id) {
  if (id.empty()) return false;
  for (unsigned char c : id) {
    if (std::isspace(c)) return false;
  }
  return true;
}

// SAX handler for one vector record line. Accepts exactly
// {"id": <string>, "vector": {<digits>: <positive number>, ...}}.
class VectorLineSax {
 public:
  std::string id;
  std::vector<TermWeight> entries;
  bool saw_id = false;
  bool saw_vector = false;
  std::string error;

  bool fail(std::string msg) {
    if (error.empty()) error = std::move(msg);
    return false;
  }

  bool null() { return fail("unexpected null"); }
  bool boolean(bool) { return fail("unexpected boolean"); }
  bool number_integer(std::int64_t v) { return number(static_cast<double>(v)); }
  bool number_unsigned(std::uint64_t v) { return number(static_cast<double>(v)); }
  bool number_float(double v, const std::string&) { return number(v); }
  bool binary(std::vector<std::uint8_t>&) { return fail("unexpected binary"); }

  bool string(std::string& val) {
    if (depth_ == 1 && key_ == "id") {
      if (saw_id) return fail("duplicate \"id\" key");
      if (!valid_doc_id(val)) return fail("invalid id (empty or whitespace)");
      id = val;
      saw_id = true;
      return true;
    }
    return fail("unexpected string value");
  }

  bool start_object(std::size_t) {
    ++depth_;
    if (depth_ == 1) return true;
    if (depth_ == 2 && key_ == "vector") {
      if (saw_vector) return fail("duplicate \"vector\" key");
      saw_vector = true;
      in_vector_ = true;
      return true;
    }
    return fail("unexpected nested object");
  }

  bool end_object() {
    if (depth_ == 2) in_vector_ = false;
    --depth_;
    return true;
  }

  bool start_array(std::size_t) { return fail("unexpected array"); }
  bool end_array() { return true; }

  bool key(std::string& k) {
    key_ = k;
    if (depth_ == 1) {
      if (k != "id" && k != "vector") return fail("unknown key \"" + k + "\"");
      return true;
    }
    return true;  // term id key, validated in number()
  }

  bool parse_error(std::size_t, const std::string&,
                   const nlohmann::json::exception& ex) {
    return fail(ex.what());
  }

 private:
  bool number(double v) {
    if (!in_vector_) return fail("unexpected number");
    TermId term = 0;
    auto res = std::from_chars(key_.data(), key_.data() + key_.size(), term);
    if (res.ec != std::errc() || res.ptr != key_.data() + key_.size()) {
      return fail("term key \"" + key_ + "\" is not a valid TermId");
    }
    if (!(v > 0.0)) {
      return fail("non-positive weight " + format_double(v) + " for term " + key_);
    }
    entries.push_back({term, v});
    return true;
  }

  int depth_ = 0;
  bool in_vector_ = false;
  std::string key_;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

VectorRecord parse_vector_line(std::string_view line, const std::string& path,
                               std::size_t line_no) {
  VectorLineSax sax;
  bool ok = nlohmann::json::sax_parse(line, &sax,
                                      nlohmann::json::input_format_t::json,
                                      /*strict=*/true);
  if (!ok || !sax.error.empty()) {
    throw ParseError(path, line_no,
                     sax.error.empty() ? "malformed JSON" : sax.error);
  }
  if (!sax.saw_id) throw ParseError(path, line_no, "missing \"id\"");
  if (!sax.saw_vector) throw ParseError(path, line_no, "missing \"vector\"");
  try {
    return VectorRecord{std::move(sax.id),
                        SparseVector::from_unsorted(std::move(sax.entries))};
  } catch (const std::invalid_argument& ex) {
    throw ParseError(path, line_no, ex.what());
  }
}

VectorFileReader::VectorFileReader(std::filesystem::path path)
    : path_(std::move(path)), in_(path_) {
  if (!in_) throw std::runtime_error("cannot open " + path_.string());
}

std::optional<VectorRecord> VectorFileReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.empty()) continue;
    VectorRecord rec = parse_vector_line(line, path_.string(), line_no_);
    if (!seen_ids_.insert(rec.id).second) {
      throw ParseError(path_.string(), line_no_, "duplicate DocId \"" + rec.id + "\"");
    }
    return rec;
  }
  return std::nullopt;
}

std::vector<VectorRecord> read_vectors(const std::filesystem::path& path) {
  VectorFileReader reader(path);
  std::vector<VectorRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

std::string encode_vector_record(const VectorRecord& rec) {
  std::string line = "{\"id\":\"" + json_escape(rec.id) + "\",\"vector\":{";
  bool first = true;
  for (const auto& e : rec.vector.entries()) {
    if (!first) line += ',';
    first = false;
    line += '"';
    line += std::to_string(e.term);
    line += "\":";
    line += format_double(e.weight);
  }
  line += "}}";
  return line;
}

void write_vectors(const std::vector<VectorRecord>& records,
                   const std::filesystem::path& path) {
  std::string content;
  for (const auto& rec : records) {
    content += encode_vector_record(rec);
    content += '\n';
  }
  write_file_atomic(path, content);
}

// --- runs ---------------------------------------------------------------------

bool run_entry_before(const RunEntry& a, const RunEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc < b.doc;
}

void RankedRun::set_query(const std::string& qid, std::vector<RunEntry> entries) {
  std::sort(entries.begin(), entries.end(), run_entry_before);
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i - 1].doc == entries[i].doc) {
      throw std::invalid_argument("duplicate doc \"" + entries[i].doc +
                                  "\" in query " + qid);
    }
  }
  queries_[qid] = std::move(entries);
}

void RankedRun::set_query_sorted(const std::string& qid,
                                 std::vector<RunEntry> entries) {
  queries_[qid] = std::move(entries);
}

const std::vector<RunEntry>* RankedRun::find_query(const std::string& qid) const {
  auto it = queries_.find(qid);
  return it == queries_.end() ? nullptr : &it->second;
}

std::string encode_run(const RankedRun& run) {
  std::string out;
  for (const auto& [qid, entries] : run.queries()) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      out += qid;
      out += " Q0 ";
      out += entries[i].doc;
      out += ' ';
      out += std::to_string(i + 1);
      out += ' ';
      out += format_double(entries[i].score);
      out += ' ';
      out += run.tag();
      out += '\n';
    }
  }
  return out;
}

void write_run(const RankedRun& run, const std::filesystem::path& path) {
  write_file_atomic(path, encode_run(run));
}

RankedRun parse_run_text(std::string_view text, const std::string& path) {
  struct RawEntry {
    RunEntry entry;
    std::uint64_t rank;
  };
  std::map<std::string, std::vector<RawEntry>> raw;
  std::map<std::string, std::unordered_set<std::string>> seen;
  std::string tag;
  bool tag_warned = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      throw ParseError(path, line_no,
                       "expected 6 fields, got " + std::to_string(fields.size()));
    }
    std::string qid(fields[0]);
    std::string doc(fields[2]);
    if (!valid_doc_id(doc)) throw ParseError(path, line_no, "invalid docid");
    std::uint64_t rank = 0;
    if (!parse_u64(fields[3], rank)) {
      throw ParseError(path, line_no, "bad rank field \"" + std::string(fields[3]) + "\"");
    }
    double score = 0.0;
    if (!parse_double(fields[4], score)) {
      throw ParseError(path, line_no, "bad score field \"" + std::string(fields[4]) + "\"");
    }
    if (tag.empty()) {
      tag = std::string(fields[5]);
    } else if (tag != fields[5] && !tag_warned) {
      log_warn(path + ": mixed run tags (\"" + tag + "\" vs \"" +
               std::string(fields[5]) + "\"); keeping the first");
      tag_warned = true;
    }
    if (!seen[qid].insert(doc).second) {
      throw ParseError(path, line_no,
                       "duplicate (" + qid + ", " + doc + ") entry");
    }
    raw[qid].push_back({{std::move(doc), score}, rank});
  }

  RankedRun run(tag);
  bool normalized = false;
  for (auto& [qid, entries] : raw) {
    bool ok = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != i + 1) ok = false;
      if (i > 0 && !run_entry_before(entries[i - 1].entry, entries[i].entry)) ok = false;
    }
    if (!ok) normalized = true;
    std::vector<RunEntry> cooked;
    cooked.reserve(entries.size());
    for (auto& e : entries) cooked.push_back(std::move(e.entry));
    std::sort(cooked.begin(), cooked.end(), run_entry_before);
    run.set_query_sorted(qid, std::move(cooked));
  }
  if (normalized) {
    log_warn(path + ": run not in canonical (score desc, docid asc) order; normalized");
  }
  return run;
}

RankedRun read_run(const std::filesystem::path& path) {
  return parse_run_text(read_file(path), path.string());
}

// --- qrels ---------------------------------------------------------------------

void Qrels::set(const std::string& qid, const DocId& doc, int grade) {
  if (grade < 0) throw std::invalid_argument("negative relevance grade");
  queries_[qid][doc] = grade;
}

int Qrels::grade(const std::string& qid, const DocId& doc) const {
  auto it = queries_.find(qid);
  if (it == queries_.end()) return 0;
  auto jt = it->second.find(doc);
  return jt == it->second.end() ? 0 : jt->second;
}

const std::map<DocId, int>* Qrels::find_query(const std::string& qid) const {
  auto it = queries_.find(qid);
  return it == queries_.end() ? nullptr : &it->second;
}

Qrels parse_qrels_text(std::string_view text, const std::string& path) {
  Qrels qrels;
  std::map<std::string, std::unordered_set<std::string>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw ParseError(path, line_no,
                       "expected 4 fields, got " + std::to_string(fields.size()));
    }
    std::string qid(fields[0]);
    std::string doc(fields[2]);
    if (!valid_doc_id(doc)) throw ParseError(path, line_no, "invalid docid");
    std::uint64_t grade = 0;
    if (!parse_u64(fields[3], grade) || grade > std::numeric_limits<int>::max()) {
      throw ParseError(path, line_no,
                       "bad relevance field \"" + std::string(fields[3]) + "\"");
    }
    if (!seen[qid].insert(doc).second) {
      throw ParseError(path, line_no, "duplicate (" + qid + ", " + doc + ") judgment");
    }
    qrels.set(qid, doc, static_cast<int>(grade));
  }
  return qrels;
}

Qrels read_qrels(const std::filesystem::path& path) {
  return parse_qrels_text(read_file(path), path.string());
}

std::string encode_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [qid, docs] : qrels.queries()) {
    for (const auto& [doc, grade] : docs) {
      out += qid;
      out += " 0 ";
      out += doc;
      out += ' ';
      out += std::to_string(grade);
      out += '\n';
    }
  }
  return out;
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  write_file_atomic(path, encode_qrels(qrels));
}

}  // namespace lsrkit
