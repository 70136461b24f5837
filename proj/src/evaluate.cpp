#include "covr/evaluate.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <map>
#include <ostream>
#include <set>

#include "covr/parallel.hpp"

namespace covr {

EvalTable evaluate_run(const std::vector<RankedList>& run, const std::vector<Qrels>& qrels,
                       const std::vector<NuggetJudgmentSet>& judgments, const std::vector<Topic>& topics,
                       const EvalConfig& cfg, std::size_t workers) {
  cfg.validate();
  auto run_of = index_by_query(run);
  auto qrels_of = index_by_query(qrels);
  auto judgments_of = index_by_query(judgments);

  std::vector<const Topic*> judged;
  std::set<std::string> judged_ids;
  for (const auto& t : topics) {
    if (qrels_of.count(t.query_id) || judgments_of.count(t.query_id)) {
      judged.push_back(&t);
      judged_ids.insert(t.query_id);
    }
  }

  EvalTable table;
  for (const auto& list : run) {
    if (!judged_ids.count(list.query_id)) {
      table.warnings.push_back("query '" + list.query_id + "' has no judgments; excluded");
      spdlog::warn("{}", table.warnings.back());
    }
  }

  const RankedList empty_run;
  const Qrels empty_qrels;
  const NuggetJudgmentSet empty_judgments;
  table.per_query.resize(judged.size());
  parallel_for(judged.size(), workers, [&](std::size_t i) {
    const Topic& topic = *judged[i];
    auto r = run_of.find(topic.query_id);
    const RankedList& list = r == run_of.end() ? empty_run : *r->second;
    auto q = qrels_of.find(topic.query_id);
    const Qrels& qr = q == qrels_of.end() ? empty_qrels : *q->second;
    auto j = judgments_of.find(topic.query_id);
    const NuggetJudgmentSet& js = j == judgments_of.end() ? empty_judgments : *j->second;

    QueryMetrics m;
    m.query_id = topic.query_id;
    m.precision = precision_at_k(list, qr, cfg);
    m.ndcg = ndcg_at_k(list, qr, cfg);
    if (!topic.sub_questions.empty()) {
      auto matrix = make_nugget_matrix(js, topic, cfg.answerability_threshold);
      m.alpha_ndcg = alpha_ndcg_at_k(list, matrix, cfg);
      m.coverage = cov_at_k(list, matrix, cfg);
    }
    table.per_query[i] = std::move(m);
  });

  if (!table.per_query.empty()) {
    for (const auto& m : table.per_query) {
      table.mean.precision += m.precision;
      table.mean.ndcg += m.ndcg;
      table.mean.alpha_ndcg += m.alpha_ndcg;
      table.mean.coverage += m.coverage;
    }
    const double n = static_cast<double>(table.per_query.size());
    table.mean.precision /= n;
    table.mean.ndcg /= n;
    table.mean.alpha_ndcg /= n;
    table.mean.coverage /= n;
  }
  return table;
}

std::vector<MetricComparison> compare_runs(const EvalTable& a, const EvalTable& b) {
  std::map<std::string, const QueryMetrics*> b_of;
  for (const auto& m : b.per_query) b_of.emplace(m.query_id, &m);
  struct Field {
    const char* name;
    double QueryMetrics::*member;
  };
  const Field fields[] = {{"P", &QueryMetrics::precision},
                          {"nDCG", &QueryMetrics::ndcg},
                          {"alpha-nDCG", &QueryMetrics::alpha_ndcg},
                          {"Cov", &QueryMetrics::coverage}};
  std::vector<MetricComparison> out;
  for (const auto& f : fields) {
    std::vector<double> xs, ys;
    for (const auto& m : a.per_query) {
      auto it = b_of.find(m.query_id);
      if (it == b_of.end()) continue;
      xs.push_back(m.*f.member);
      ys.push_back(it->second->*f.member);
    }
    MetricComparison c;
    c.metric = f.name;
    for (double x : xs) c.mean_a += x;
    for (double y : ys) c.mean_b += y;
    if (!xs.empty()) {
      c.mean_a /= static_cast<double>(xs.size());
      c.mean_b /= static_cast<double>(ys.size());
    }
    if (xs.size() >= 2) c.test = paired_t_test(xs, ys);
    out.push_back(c);
  }
  return out;
}

void write_eval_table(const EvalTable& table, std::size_t k, std::ostream& out,
                      const std::vector<MetricComparison>& comparisons) {
  out << fmt::format("{:<16} {:>9} {:>9} {:>14} {:>9}\n", "query", fmt::format("P@{}", k),
                     fmt::format("nDCG@{}", k), fmt::format("alpha-nDCG@{}", k), fmt::format("Cov@{}", k));
  auto row = [&](const QueryMetrics& m) {
    out << fmt::format("{:<16} {:>9.4f} {:>9.4f} {:>14.4f} {:>9.4f}\n", m.query_id, m.precision, m.ndcg,
                       m.alpha_ndcg, m.coverage);
  };
  for (const auto& m : table.per_query) row(m);
  row(table.mean);
  if (!comparisons.empty()) {
    out << "\npaired t-test (run vs baseline)\n";
    out << fmt::format("{:<12} {:>9} {:>9} {:>10} {:>10}\n", "metric", "run", "baseline", "t", "p");
    for (const auto& c : comparisons) {
      out << fmt::format("{:<12} {:>9.4f} {:>9.4f} {:>10.4f} {:>10.4g}{}\n", c.metric, c.mean_a, c.mean_b,
                         c.test.t, c.test.p, c.test.significant() ? " *" : "");
    }
  }
}

void write_eval_tsv(const EvalTable& table, std::size_t k, std::ostream& out) {
  out << fmt::format("query_id\tP@{0}\tnDCG@{0}\talpha-nDCG@{0}\tCov@{0}\n", k);
  auto row = [&](const QueryMetrics& m) {
    out << fmt::format("{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\n", m.query_id, m.precision, m.ndcg, m.alpha_ndcg,
                       m.coverage);
  };
  for (const auto& m : table.per_query) row(m);
  row(table.mean);
}

}  // namespace covr
