#include "mghs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mghs::metrics {

ConfusionCounts count_edges(const std::vector<MatrixXi>& est,
                            const std::vector<MatrixXi>& truth) {
    if (est.size() != truth.size())
        throw std::invalid_argument("count_edges: group count mismatch");
    ConfusionCounts c;
    for (std::size_t k = 0; k < est.size(); ++k) {
        if (est[k].rows() != truth[k].rows() || est[k].cols() != truth[k].cols())
            throw std::invalid_argument("count_edges: shape mismatch");
        const int p = static_cast<int>(est[k].rows());
        for (int j = 1; j < p; ++j) {
            for (int i = 0; i < j; ++i) {
                bool e = est[k](i, j) != 0, t = truth[k](i, j) != 0;
                if (e && t) ++c.tp;
                else if (!e && !t) ++c.tn;
                else if (e && !t) ++c.fp;
                else ++c.fn;
            }
        }
    }
    return c;
}

ConfusionMetrics confusion_metrics(const std::vector<MatrixXi>& est,
                                   const std::vector<MatrixXi>& truth) {
    ConfusionMetrics m;
    m.counts = count_edges(est, truth);
    const auto& c = m.counts;
    double total = static_cast<double>(c.total());
    m.accuracy = total > 0 ? (c.tp + c.tn) / total : 0.0;
    m.tpr = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    m.fpr = (c.fp + c.tn) > 0 ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
    double f1 = static_cast<double>(c.tp + c.fp), f2 = static_cast<double>(c.tp + c.fn);
    double f3 = static_cast<double>(c.tn + c.fp), f4 = static_cast<double>(c.tn + c.fn);
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) {
        m.mcc = 0.0;
    } else {
        m.mcc = (static_cast<double>(c.tp) * c.tn - static_cast<double>(c.fp) * c.fn) /
                std::sqrt(f1 * f2 * f3 * f4);
    }
    return m;
}

double auc(const std::vector<double>& scores, const std::vector<int>& truth) {
    if (scores.size() != truth.size())
        throw std::invalid_argument("auc: size mismatch");
    const std::size_t n = scores.size();
    long n_pos = 0;
    for (int t : truth) n_pos += (t != 0);
    long n_neg = static_cast<long>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: truth must contain both classes");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("auc: nonfinite score");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tie groups
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t a = i; a <= j; ++a)
            if (truth[order[a]] != 0) rank_sum_pos += midrank;
        i = j + 1;
    }
    double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1.0);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_edges(const std::vector<MatrixXd>& scores,
                 const std::vector<MatrixXi>& truth) {
    if (scores.size() != truth.size())
        throw std::invalid_argument("auc_edges: group count mismatch");
    std::vector<double> s;
    std::vector<int> t;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const int p = static_cast<int>(scores[k].rows());
        for (int j = 1; j < p; ++j) {
            for (int i = 0; i < j; ++i) {
                s.push_back(scores[k](i, j));
                t.push_back(truth[k](i, j));
            }
        }
    }
    return auc(s, t);
}

double frobenius_loss(const std::vector<MatrixXd>& est,
                      const std::vector<MatrixXd>& truth) {
    if (est.size() != truth.size() || est.empty())
        throw std::invalid_argument("frobenius_loss: group count mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        if (est[k].rows() != truth[k].rows() || est[k].cols() != truth[k].cols())
            throw std::invalid_argument("frobenius_loss: shape mismatch");
        sum += (est[k] - truth[k]).norm();
    }
    return sum / static_cast<double>(est.size());
}

double aafe(const MatrixXd& test_data, const MatrixXd& omega,
            const std::vector<int>& predict) {
    const int p = static_cast<int>(omega.rows());
    if (test_data.cols() != p) throw std::invalid_argument("aafe: column mismatch");
    if (predict.empty() || static_cast<int>(predict.size()) >= p)
        throw std::invalid_argument("aafe: predicted block must be a proper subset");
    std::vector<bool> in_predict(p, false);
    for (int c : predict) {
        if (c < 0 || c >= p) throw std::invalid_argument("aafe: bad column index");
        in_predict[c] = true;
    }
    std::vector<int> given;
    for (int c = 0; c < p; ++c)
        if (!in_predict[c]) given.push_back(c);

    MatrixXd sigma = omega.llt().solve(MatrixXd::Identity(p, p));
    MatrixXd s11 = sigma(given, given);
    MatrixXd s21 = sigma(predict, given);
    Eigen::LLT<MatrixXd> llt(s11);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("aafe: singular conditioning block");
    // y2_hat = S21 S11^{-1} y1
    MatrixXd coef = llt.solve(s21.transpose());  // (given x predict)
    MatrixXd y1 = test_data(Eigen::all, given);
    MatrixXd y2 = test_data(Eigen::all, predict);
    MatrixXd pred = y1 * coef;
    return (y2 - pred).array().abs().mean();
}

}  // namespace mghs::metrics
