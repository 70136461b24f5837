#pragma once

// Text exchange formats. Every parser rejects malformed input with a
// ParseError that carries the line number; nothing is repaired silently.
//
//   TREC run    qid Q0 docid rank score tag
//   qrels       qid 0 docid grade
//   topics      {"query_id", "query", "sub_questions": [{"sq_id", "text"}, ...]}
//   judgments   {"query_id", "doc_id", "sq_id", "grade"}
//   corpus      {"doc_id", "title", "text"}
//   pairs       {"query_id", "query", "sub_questions": [...], "positive_doc_id",
//                "negative_doc_ids": [...]}

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "covr/types.hpp"

namespace covr {

std::vector<RankedList> parse_trec_run(std::istream& in);
void serialize_trec_run(const std::vector<RankedList>& lists, std::ostream& out);

std::vector<Qrels> parse_qrels(std::istream& in);
void serialize_qrels(const std::vector<Qrels>& qrels, std::ostream& out);

std::vector<Topic> parse_topics(std::istream& in);
void serialize_topics(const std::vector<Topic>& topics, std::ostream& out);

std::vector<NuggetJudgmentSet> parse_nugget_judgments(std::istream& in);
void serialize_nugget_judgments(const std::vector<NuggetJudgmentSet>& sets, std::ostream& out);

std::vector<Document> parse_corpus(std::istream& in);
void serialize_corpus(const std::vector<Document>& docs, std::ostream& out);

/// One coverage-sampled training example, with document ids still unresolved.
struct TrainingPairRecord {
  std::string query_id;
  std::string query;
  std::vector<std::string> sub_questions;
  std::string positive_doc_id;
  std::vector<std::string> negative_doc_ids;
};

std::vector<TrainingPairRecord> parse_training_pairs(std::istream& in);
void serialize_training_pairs(const std::vector<TrainingPairRecord>& pairs, std::ostream& out);

// File helpers. Failing to open throws DataError naming the path.
std::ifstream open_input(const std::filesystem::path& path,
                         std::ios::openmode mode = std::ios::in);
std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out);

template <typename Parser>
auto parse_file(const std::filesystem::path& path, Parser parser) {
  auto in = open_input(path);
  return parser(in);
}

}  // namespace covr
