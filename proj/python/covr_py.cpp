#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "covr/cli.hpp"
#include "covr/coverage.hpp"
#include "covr/error.hpp"
#include "covr/metrics.hpp"
#include "covr/objectives.hpp"
#include "covr/rankers.hpp"

namespace py = pybind11;
using namespace covr;

namespace {

using Ranking = std::vector<std::pair<std::string, double>>;
// doc_id -> {sq_id: grade}
using Grades = std::map<std::string, std::map<std::string, int>>;

RankedList to_list(const Ranking& r) {
  RankedList l{"q", {}, ""};
  for (const auto& [id, s] : r) l.items.push_back({id, s});
  l.normalize();
  return l;
}

Ranking from_list(const RankedList& l) {
  Ranking out;
  for (const auto& i : l.items) out.emplace_back(i.doc_id, i.score);
  return out;
}

Topic topic_of(const std::vector<std::string>& sq_ids) {
  Topic t{"q", "", {}};
  for (const auto& s : sq_ids) t.sub_questions.push_back({s, ""});
  return t;
}

NuggetJudgmentSet judgments_of(const Grades& g) {
  NuggetJudgmentSet j{"q", {}};
  for (const auto& [doc, row] : g) {
    for (const auto& [sq, grade] : row) j.set(doc, sq, grade);
  }
  return j;
}

// Ranked doc ids (already in rank order) scored by position.
RankedList ordered(const std::vector<std::string>& ids) {
  RankedList l{"q", {}, ""};
  for (std::size_t i = 0; i < ids.size(); ++i) l.items.push_back({ids[i], static_cast<double>(ids.size() - i)});
  return l;
}

EvalConfig eval_config(std::size_t k, double alpha, int threshold, bool exhaustive) {
  EvalConfig cfg;
  cfg.k = k;
  cfg.alpha = alpha;
  cfg.answerability_threshold = threshold;
  cfg.ideal_mode = exhaustive ? IdealMode::Exhaustive : IdealMode::Greedy;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_covr, m) {
  m.doc() = "Coverage-aware retrieval toolkit";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def(
      "covcon_loss",
      [](const std::vector<double>& scores, std::size_t positive, double t) {
        auto r = covcon_loss(scores, positive, t);
        return py::make_tuple(r.loss, r.grad);
      },
      py::arg("scores"), py::arg("positive"), py::arg("temperature"),
      "Contrastive loss over candidate scores; returns (loss, gradient).");
  m.def(
      "covdistil_loss",
      [](const std::vector<double>& s, const std::vector<double>& t, double lambda) {
        return covdistil_loss(s, t, lambda);
      },
      py::arg("student"), py::arg("teacher"), py::arg("weight") = 1.0);
  m.def("teacher_distribution", &teacher_distribution, py::arg("sub_questions"), py::arg("docs"),
        py::arg("temperature"));
  m.def(
      "softmax", [](const std::vector<double>& z) { return softmax(z); }, py::arg("logits"));

  m.def(
      "coverage_score",
      [](const Grades& grades, const std::vector<std::string>& sq_ids, const std::string& doc, int eta) {
        return coverage_score(judgments_of(grades), topic_of(sq_ids), doc, eta);
      },
      py::arg("grades"), py::arg("sub_questions"), py::arg("doc_id"), py::arg("eta") = 4);
  m.def(
      "coverage_curve",
      [](const Grades& grades, const std::vector<std::string>& sq_ids, const std::vector<std::string>& ranking,
         int tau, std::size_t k_max) {
        return accumulated_coverage_curve(judgments_of(grades), topic_of(sq_ids), ranking, tau, k_max);
      },
      py::arg("grades"), py::arg("sub_questions"), py::arg("ranking"), py::arg("tau"), py::arg("k_max"));

  m.def(
      "cov_at_k",
      [](const std::vector<std::string>& ranking, const Grades& grades, const std::vector<std::string>& sq_ids,
         std::size_t k, int threshold) {
        auto cfg = eval_config(k, 0.5, threshold, false);
        return cov_at_k(ordered(ranking), make_nugget_matrix(judgments_of(grades), topic_of(sq_ids), threshold), cfg);
      },
      py::arg("ranking"), py::arg("grades"), py::arg("sub_questions"), py::arg("k") = 10, py::arg("threshold") = 4);
  m.def(
      "alpha_ndcg_at_k",
      [](const std::vector<std::string>& ranking, const Grades& grades, const std::vector<std::string>& sq_ids,
         std::size_t k, double alpha, int threshold, bool exhaustive) {
        auto cfg = eval_config(k, alpha, threshold, exhaustive);
        return alpha_ndcg_at_k(ordered(ranking), make_nugget_matrix(judgments_of(grades), topic_of(sq_ids), threshold),
                               cfg);
      },
      py::arg("ranking"), py::arg("grades"), py::arg("sub_questions"), py::arg("k") = 10, py::arg("alpha") = 0.5,
      py::arg("threshold") = 4, py::arg("exhaustive") = false);
  m.def(
      "ndcg_at_k",
      [](const std::vector<std::string>& ranking, const std::map<std::string, int>& qrels, std::size_t k) {
        return ndcg_at_k(ordered(ranking), Qrels{"q", qrels}, eval_config(k, 0.5, 4, false));
      },
      py::arg("ranking"), py::arg("qrels"), py::arg("k") = 10);

  m.def(
      "fuse",
      [](const std::vector<Ranking>& lists, const std::string& method, std::size_t k, double rrf_k) {
        std::vector<RankedList> in;
        for (const auto& l : lists) in.push_back(to_list(l));
        FusionConfig cfg;
        cfg.method = parse_fusion_method(method);
        cfg.rrf_k = rrf_k;
        return from_list(fuse(in, cfg, k));
      },
      py::arg("lists"), py::arg("method") = "rrf", py::arg("k") = 10, py::arg("rrf_k") = 60.0,
      "Fuses (doc_id, score) lists; returns the fused (doc_id, score) list.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
