#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mghs::diagnostics {

// Gelman-Rubin potential scale reduction factor for one scalar traced by
// M >= 2 chains of equal length T >= 10. Returns 1 when the within-chain
// variance is zero.
double psrf(const std::vector<std::vector<double>>& chains);

// Column-wise PSRF: each chain contributes a T x E matrix of draws; the
// result has one entry per scalar (column).
Eigen::VectorXd psrf_columns(const std::vector<Eigen::MatrixXd>& chains);

}  // namespace mghs::diagnostics
