#include "cdgad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace cdgad {

namespace {

struct ClassCounts {
  long positives = 0;
  long negatives = 0;
};

ClassCounts check_inputs(const Vector& scores, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(scores.size()) != labels.size()) {
    throw MetricError("metrics: score/label length mismatch");
  }
  if (scores.size() == 0) throw MetricError("metrics: empty input");
  ClassCounts c;
  for (int y : labels) {
    if (y == 1) {
      ++c.positives;
    } else if (y == 0) {
      ++c.negatives;
    } else {
      throw MetricError("metrics: labels must be 0 or 1");
    }
  }
  if (c.positives == 0 || c.negatives == 0) {
    throw MetricError("metrics: both classes must be present");
  }
  return c;
}

// indices sorted by descending score; ties grouped by equal score
std::vector<int> descending_order(const Vector& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  return order;
}

}  // namespace

double auc_roc(const Vector& scores, const std::vector<int>& labels) {
  const ClassCounts counts = check_inputs(scores, labels);
  std::vector<int> order = descending_order(scores);
  // sweep tie groups from the highest score down; every positive in a group
  // beats all negatives strictly below and half-ties the group's negatives
  double wins = 0.0;
  long negatives_seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    long group_pos = 0, group_neg = 0;
    while (j < order.size() && scores(order[j]) == scores(order[i])) {
      if (labels[order[j]] == 1) {
        ++group_pos;
      } else {
        ++group_neg;
      }
      ++j;
    }
    const long negatives_below = counts.negatives - negatives_seen - group_neg;
    wins += static_cast<double>(group_pos) * static_cast<double>(negatives_below);
    wins += 0.5 * static_cast<double>(group_pos) * static_cast<double>(group_neg);
    negatives_seen += group_neg;
    i = j;
  }
  return wins / (static_cast<double>(counts.positives) * static_cast<double>(counts.negatives));
}

double auc_pr(const Vector& scores, const std::vector<int>& labels) {
  const ClassCounts counts = check_inputs(scores, labels);
  std::vector<int> order = descending_order(scores);
  double area = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    long group_pos = 0, group_neg = 0;
    while (j < order.size() && scores(order[j]) == scores(order[i])) {
      if (labels[order[j]] == 1) {
        ++group_pos;
      } else {
        ++group_neg;
      }
      ++j;
    }
    const long prev_tp = tp;
    tp += group_pos;
    fp += group_neg;
    if (group_pos > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double recall_step =
          static_cast<double>(tp - prev_tp) / static_cast<double>(counts.positives);
      area += recall_step * precision;
    }
    i = j;
  }
  return area;
}

MetricsReport compute_metrics(const Vector& scores, const std::vector<int>& labels) {
  const ClassCounts counts = check_inputs(scores, labels);
  MetricsReport r;
  r.auc_roc = auc_roc(scores, labels);
  r.auc_pr = auc_pr(scores, labels);
  r.prevalence = static_cast<double>(counts.positives) /
                 static_cast<double>(counts.positives + counts.negatives);
  return r;
}

AggregateReport summarize_runs(const std::vector<MetricsReport>& runs) {
  if (runs.empty()) throw MetricError("summarize_runs: no runs");
  AggregateReport agg;
  agg.runs = runs;
  const double n = static_cast<double>(runs.size());
  for (const MetricsReport& r : runs) {
    agg.auc_roc_mean += r.auc_roc;
    agg.auc_pr_mean += r.auc_pr;
  }
  agg.auc_roc_mean /= n;
  agg.auc_pr_mean /= n;
  for (const MetricsReport& r : runs) {
    agg.auc_roc_std += (r.auc_roc - agg.auc_roc_mean) * (r.auc_roc - agg.auc_roc_mean);
    agg.auc_pr_std += (r.auc_pr - agg.auc_pr_mean) * (r.auc_pr - agg.auc_pr_mean);
  }
  agg.auc_roc_std = std::sqrt(agg.auc_roc_std / n);
  agg.auc_pr_std = std::sqrt(agg.auc_pr_std / n);
  return agg;
}

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f±%.3f", mean, std);
  return buf;
}

std::string format_report_text(const AggregateReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-8s %12s %12s\n", "run", "auc_roc", "auc_pr");
  out += line;
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-8zu %12.3f %12.3f\n", i, report.runs[i].auc_roc,
                  report.runs[i].auc_pr);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-8s %12s %12s\n", "mean",
                format_mean_std(report.auc_roc_mean, report.auc_roc_std).c_str(),
                format_mean_std(report.auc_pr_mean, report.auc_pr_std).c_str());
  out += line;
  return out;
}

}  // namespace cdgad
