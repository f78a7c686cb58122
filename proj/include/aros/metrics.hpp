#pragma once

#include <vector>

namespace aros::eval {

// Detection metrics over two score samples. Convention throughout: the
// anomalous sample is the positive class and higher scores mean more
// anomalous, so perfect detectors score 1.0 AUROC / 1.0 AUPR / 0.0 FPR95.

// Probability a random anomalous score exceeds a random nominal one, ties
// counting half: the Mann-Whitney statistic computed through average ranks.
double auroc(const std::vector<double>& nominal, const std::vector<double>& anomalous);

// Area under the precision-recall curve (positive = anomalous, predicted
// positive when score >= threshold), trapezoidal over every distinct
// threshold, anchored at (recall 0, precision 1).
double aupr(const std::vector<double>& nominal, const std::vector<double>& anomalous);

// False-positive rate at the most favorable threshold that still catches at
// least 95% of the anomalous sample.
double fpr95(const std::vector<double>& nominal, const std::vector<double>& anomalous);

}  // namespace aros::eval
