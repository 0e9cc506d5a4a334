#pragma once

#include <string>
#include <vector>

#include "cdgad/types.hpp"

namespace cdgad {

// Ranking quality of anomaly scores against binary labels (1 = anomaly).
// Both metrics require both classes to be present.

// Mann-Whitney statistic: P(score_anomaly > score_normal) + 1/2 P(equal)
// over all anomaly-normal pairs.
double auc_roc(const Vector& scores, const std::vector<int>& labels);

// Area under the precision-recall step curve by descending-score sweep with
// average-precision summation; tied scores enter as one group.
double auc_pr(const Vector& scores, const std::vector<int>& labels);

struct MetricsReport {
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  double prevalence = 0.0;
};

MetricsReport compute_metrics(const Vector& scores, const std::vector<int>& labels);

struct AggregateReport {
  std::vector<MetricsReport> runs;
  double auc_roc_mean = 0.0;
  double auc_roc_std = 0.0;  // population std
  double auc_pr_mean = 0.0;
  double auc_pr_std = 0.0;
};

AggregateReport summarize_runs(const std::vector<MetricsReport>& runs);

// "0.868±0.009"-style cell with 3 decimals.
std::string format_mean_std(double mean, double std);
// Aligned-column text block for humans.
std::string format_report_text(const AggregateReport& report);

}  // namespace cdgad
