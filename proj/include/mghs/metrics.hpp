#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mghs::metrics {

using Eigen::MatrixXd;
using Eigen::MatrixXi;

struct ConfusionCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

struct ConfusionMetrics {
    double accuracy = 0.0;
    double mcc = 0.0;  // 0 by convention when any factor vanishes
    double tpr = 0.0;
    double fpr = 0.0;
    ConfusionCounts counts;
};

// Upper-triangle confusion, pooled across groups.
ConfusionCounts count_edges(const std::vector<MatrixXi>& est,
                            const std::vector<MatrixXi>& truth);
ConfusionMetrics confusion_metrics(const std::vector<MatrixXi>& est,
                                   const std::vector<MatrixXi>& truth);

// Mann-Whitney AUC with midranks for ties; throws when the truth has no
// positives or no negatives.
double auc(const std::vector<double>& scores, const std::vector<int>& truth);

// AUC of per-edge scores (upper triangle, pooled across groups).
double auc_edges(const std::vector<MatrixXd>& scores,
                 const std::vector<MatrixXi>& truth);

// (1/K) sum_k ||est_k - true_k||_F
double frobenius_loss(const std::vector<MatrixXd>& est,
                      const std::vector<MatrixXd>& truth);

// Average absolute forecast error of the best linear predictor of the
// columns in `predict` from the rest, using Sigma = omega^{-1}.
double aafe(const MatrixXd& test_data, const MatrixXd& omega,
            const std::vector<int>& predict);

}  // namespace mghs::metrics
