#include "covr/formats.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "covr/error.hpp"

namespace covr {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(std::move(f));
  return fields;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

double parse_double(const std::string& s, std::size_t line, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s, std::size_t line, const char* what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("non-integer ") + what + " '" + s + "'");
  }
  return v;
}

json parse_json_line(const std::string& line, std::size_t lineno) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) throw ParseError(lineno, "record is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
  }
}

std::string required_string(const json& j, const char* key, std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw ParseError(lineno, std::string("missing field '") + key + "'");
  }
  if (!it->is_string()) throw ParseError(lineno, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

std::string optional_string(const json& j, const char* key, std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(lineno, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

bool has_whitespace(const std::string& s) {
  return s.find_first_of(" \t\r\n\v\f") != std::string::npos;
}

void check_id(const std::string& id, const char* what, std::size_t lineno) {
  if (id.empty()) throw ParseError(lineno, std::string("empty ") + what);
  if (has_whitespace(id)) throw ParseError(lineno, std::string(what) + " '" + id + "' contains whitespace");
}

template <typename Fn>
void for_each_line(std::istream& in, Fn fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    fn(line, lineno);
  }
}

}  // namespace

std::vector<RankedList> parse_trec_run(std::istream& in) {
  std::vector<RankedList> lists;
  std::map<std::string, std::size_t> slot;
  std::vector<std::set<std::string>> seen;
  for_each_line(in, [&](const std::string& line, std::size_t lineno) {
    auto f = split_ws(line);
    if (f.size() != 6) {
      throw ParseError(lineno, "expected 6 fields 'qid Q0 docid rank score tag', got " +
                                   std::to_string(f.size()));
    }
    parse_int(f[3], lineno, "rank");
    double score = parse_double(f[4], lineno, "score");
    auto [it, inserted] = slot.emplace(f[0], lists.size());
    if (inserted) {
      lists.push_back(RankedList{f[0], {}, f[5]});
      seen.emplace_back();
    }
    auto idx = it->second;
    if (!seen[idx].insert(f[2]).second) {
      throw ParseError(lineno, "duplicate doc_id '" + f[2] + "' for query '" + f[0] + "'");
    }
    lists[idx].items.push_back({f[2], score});
  });
  for (auto& l : lists) l.normalize();
  return lists;
}

void serialize_trec_run(const std::vector<RankedList>& lists, std::ostream& out) {
  for (const auto& list : lists) {
    const std::string& tag = list.tag.empty() ? std::string("covr") : list.tag;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      out << fmt::format("{} Q0 {} {} {:.6f} {}\n", list.query_id, list.items[i].doc_id, i + 1,
                         list.items[i].score, tag);
    }
  }
}

std::vector<Qrels> parse_qrels(std::istream& in) {
  std::vector<Qrels> out;
  std::map<std::string, std::size_t> slot;
  for_each_line(in, [&](const std::string& line, std::size_t lineno) {
    auto f = split_ws(line);
    if (f.size() != 4) {
      throw ParseError(lineno, "expected 4 fields 'qid 0 docid grade', got " + std::to_string(f.size()));
    }
    auto grade = parse_int(f[3], lineno, "grade");
    if (grade < 0) throw ParseError(lineno, "negative grade " + f[3]);
    auto [it, inserted] = slot.emplace(f[0], out.size());
    if (inserted) out.push_back(Qrels{f[0], {}});
    if (!out[it->second].entries.emplace(f[2], static_cast<int>(grade)).second) {
      throw ParseError(lineno, "duplicate qrels entry for doc '" + f[2] + "'");
    }
  });
  return out;
}

void serialize_qrels(const std::vector<Qrels>& qrels, std::ostream& out) {
  for (const auto& q : qrels) {
    for (const auto& [doc, grade] : q.entries) {
      out << q.query_id << " 0 " << doc << ' ' << grade << '\n';
    }
  }
}

std::vector<Topic> parse_topics(std::istream& in) {
  std::vector<Topic> topics;
  std::unordered_set<std::string> ids;
  for_each_line(in, [&](const std::string& line, std::size_t lineno) {
    auto j = parse_json_line(line, lineno);
    Topic t;
    t.query_id = required_string(j, "query_id", lineno);
    check_id(t.query_id, "query_id", lineno);
    t.query_text = required_string(j, "query", lineno);
    if (t.query_text.empty()) throw ParseError(lineno, "empty query text");
    if (auto it = j.find("sub_questions"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError(lineno, "'sub_questions' is not an array");
      std::unordered_set<std::string> sq_ids;
      for (const auto& sq : *it) {
        if (!sq.is_object()) throw ParseError(lineno, "sub-question is not an object");
        SubQuestion s{required_string(sq, "sq_id", lineno), required_string(sq, "text", lineno)};
        check_id(s.sq_id, "sq_id", lineno);
        if (!sq_ids.insert(s.sq_id).second) {
          throw ParseError(lineno, "duplicate sq_id '" + s.sq_id + "'");
        }
        t.sub_questions.push_back(std::move(s));
      }
    }
    if (!ids.insert(t.query_id).second) {
      throw ParseError(lineno, "duplicate query_id '" + t.query_id + "'");
    }
    topics.push_back(std::move(t));
  });
  return topics;
}

void serialize_topics(const std::vector<Topic>& topics, std::ostream& out) {
  for (const auto& t : topics) {
    ordered_json j;
    j["query_id"] = t.query_id;
    j["query"] = t.query_text;
    j["sub_questions"] = ordered_json::array();
    for (const auto& sq : t.sub_questions) {
      j["sub_questions"].push_back(ordered_json{{"sq_id", sq.sq_id}, {"text", sq.text}});
    }
    out << j.dump() << '\n';
  }
}

std::vector<NuggetJudgmentSet> parse_nugget_judgments(std::istream& in) {
  std::vector<NuggetJudgmentSet> sets;
  std::map<std::string, std::size_t> slot;
  for_each_line(in, [&](const std::string& line, std::size_t lineno) {
    auto j = parse_json_line(line, lineno);
    auto qid = required_string(j, "query_id", lineno);
    auto doc = required_string(j, "doc_id", lineno);
    auto sq = required_string(j, "sq_id", lineno);
    check_id(qid, "query_id", lineno);
    check_id(doc, "doc_id", lineno);
    check_id(sq, "sq_id", lineno);
    auto g = j.find("grade");
    if (g == j.end()) throw ParseError(lineno, "missing field 'grade'");
    if (!g->is_number_integer()) throw ParseError(lineno, "grade is not an integer: " + g->dump());
    auto grade = g->get<long long>();
    if (grade < 0 || grade > 5) {
      throw ParseError(lineno, "grade " + std::to_string(grade) + " outside [0, 5]");
    }
    auto [it, inserted] = slot.emplace(qid, sets.size());
    if (inserted) sets.push_back(NuggetJudgmentSet{qid, {}});
    if (!sets[it->second].entries.emplace(std::pair{doc, sq}, static_cast<int>(grade)).second) {
      throw ParseError(lineno, "duplicate judgment for (" + doc + ", " + sq + ")");
    }
  });
  return sets;
}

void serialize_nugget_judgments(const std::vector<NuggetJudgmentSet>& sets, std::ostream& out) {
  for (const auto& s : sets) {
    for (const auto& [key, grade] : s.entries) {
      ordered_json j;
      j["query_id"] = s.query_id;
      j["doc_id"] = key.first;
      j["sq_id"] = key.second;
      j["grade"] = grade;
      out << j.dump() << '\n';
    }
  }
}

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  for_each_line(in, [&](const std::string& line, std::size_t lineno) {
    auto j = parse_json_line(line, lineno);
    Document d{required_string(j, "doc_id", lineno), optional_string(j, "title", lineno),
               required_string(j, "text", lineno)};
    check_id(d.doc_id, "doc_id", lineno);
    if (!ids.insert(d.doc_id).second) throw ParseError(lineno, "duplicate doc_id '" + d.doc_id + "'");
    docs.push_back(std::move(d));
  });
  return docs;
}

void serialize_corpus(const std::vector<Document>& docs, std::ostream& out) {
  for (const auto& d : docs) {
    ordered_json j;
    j["doc_id"] = d.doc_id;
    j["title"] = d.title;
    j["text"] = d.text;
    out << j.dump() << '\n';
  }
}

std::vector<TrainingPairRecord> parse_training_pairs(std::istream& in) {
  std::vector<TrainingPairRecord> out;
  for_each_line(in, [&](const std::string& line, std::size_t lineno) {
    auto j = parse_json_line(line, lineno);
    TrainingPairRecord r;
    r.query_id = required_string(j, "query_id", lineno);
    r.query = required_string(j, "query", lineno);
    r.positive_doc_id = required_string(j, "positive_doc_id", lineno);
    if (auto it = j.find("sub_questions"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError(lineno, "'sub_questions' is not an array");
      for (const auto& sq : *it) {
        if (sq.is_string()) {
          r.sub_questions.push_back(sq.get<std::string>());
        } else if (sq.is_object()) {
          r.sub_questions.push_back(required_string(sq, "text", lineno));
        } else {
          throw ParseError(lineno, "sub-question must be a string or an object with 'text'");
        }
      }
    }
    auto negs = j.find("negative_doc_ids");
    if (negs == j.end() || !negs->is_array()) {
      throw ParseError(lineno, "missing array field 'negative_doc_ids'");
    }
    for (const auto& n : *negs) {
      if (!n.is_string()) throw ParseError(lineno, "negative doc id is not a string");
      r.negative_doc_ids.push_back(n.get<std::string>());
    }
    out.push_back(std::move(r));
  });
  return out;
}

void serialize_training_pairs(const std::vector<TrainingPairRecord>& pairs, std::ostream& out) {
  for (const auto& r : pairs) {
    ordered_json j;
    j["query_id"] = r.query_id;
    j["query"] = r.query;
    j["sub_questions"] = r.sub_questions;
    j["positive_doc_id"] = r.positive_doc_id;
    j["negative_doc_ids"] = r.negative_doc_ids;
    out << j.dump() << '\n';
  }
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace covr
