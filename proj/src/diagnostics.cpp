#include "mghs/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace mghs::diagnostics {

namespace {

double psrf_from_stats(double W, double B_over_T, double T) {
    if (W <= 0.0) return 1.0;
    double V = (T - 1.0) / T * W + B_over_T;
    return std::sqrt(V / W);
}

}  // namespace

double psrf(const std::vector<std::vector<double>>& chains) {
    const std::size_t M = chains.size();
    if (M < 2) throw std::invalid_argument("psrf: need at least 2 chains");
    const std::size_t T = chains.front().size();
    if (T < 10) throw std::invalid_argument("psrf: need at least 10 draws");
    for (const auto& c : chains)
        if (c.size() != T) throw std::invalid_argument("psrf: unequal chain lengths");

    std::vector<double> means(M);
    double grand = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        double s = 0.0;
        for (double v : chains[m]) s += v;
        means[m] = s / T;
        grand += means[m];
    }
    grand /= M;

    double W = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        double s2 = 0.0;
        for (double v : chains[m]) s2 += (v - means[m]) * (v - means[m]);
        W += s2 / (T - 1.0);
    }
    W /= M;

    double B = 0.0;  // B/T = var of chain means
    for (std::size_t m = 0; m < M; ++m) B += (means[m] - grand) * (means[m] - grand);
    double B_over_T = B / (M - 1.0);

    return psrf_from_stats(W, B_over_T, static_cast<double>(T));
}

Eigen::VectorXd psrf_columns(const std::vector<Eigen::MatrixXd>& chains) {
    const std::size_t M = chains.size();
    if (M < 2) throw std::invalid_argument("psrf_columns: need at least 2 chains");
    const Eigen::Index T = chains.front().rows();
    const Eigen::Index E = chains.front().cols();
    if (T < 10) throw std::invalid_argument("psrf_columns: need at least 10 draws");
    for (const auto& c : chains)
        if (c.rows() != T || c.cols() != E)
            throw std::invalid_argument("psrf_columns: shape mismatch");

    Eigen::VectorXd out(E);
    for (Eigen::Index e = 0; e < E; ++e) {
        double grand = 0.0, W = 0.0, B = 0.0;
        std::vector<double> means(M);
        for (std::size_t m = 0; m < M; ++m) {
            means[m] = chains[m].col(e).mean();
            grand += means[m];
        }
        grand /= static_cast<double>(M);
        for (std::size_t m = 0; m < M; ++m) {
            W += (chains[m].col(e).array() - means[m]).square().sum() / (T - 1.0);
            B += (means[m] - grand) * (means[m] - grand);
        }
        W /= static_cast<double>(M);
        out[e] = psrf_from_stats(W, B / (M - 1.0), static_cast<double>(T));
    }
    return out;
}

}  // namespace mghs::diagnostics
