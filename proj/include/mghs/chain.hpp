#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "mghs/g3p.hpp"
#include "mghs/rng.hpp"

namespace mghs::chain {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Observations reduced to the sufficient statistics of the Gaussian
// likelihood: scatter matrices S_k = Y_k' Y_k and group sizes.
struct GroupData {
    std::vector<MatrixXd> scatter;  // K matrices, p x p
    std::vector<int> n;             // group sizes
    int K = 0;
    int p = 0;

    static GroupData from_observations(const std::vector<MatrixXd>& groups);
    void validate() const;
};

// Full MCMC state. lambda2/eta/alpha_lambda/beta_lambda are symmetric with
// unused diagonals; sigma is kept equal to omega^{-1} through rank-one
// bookkeeping and never recomputed by a full inverse.
struct ChainState {
    int K = 0;
    int p = 0;
    std::vector<MatrixXd> omega;    // precision per group
    std::vector<MatrixXd> sigma;    // its inverse, maintained incrementally
    std::vector<MatrixXd> lambda2;  // local variances
    std::vector<MatrixXd> eta;      // half-Cauchy auxiliaries
    VectorXd tau2;                  // global variances
    VectorXd zeta;                  // their auxiliaries
    MatrixXd R;                     // across-group correlation
    VectorXd mu;                    // mu_k = 1 - r_k' R_{-k}^{-1} r_k

    // latest full-conditional coefficients of the lambda update; the
    // cut-model selection reads these, the chain itself does not
    std::vector<MatrixXd> alpha_lambda;
    std::vector<MatrixXd> beta_lambda;
};

ChainState init_state(int K, int p);

struct ChainConfig {
    int burnin = 5000;
    int iterations = 10000;
    int thin = 5;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;  // distinct stream per chain
    bool freeze_r_identity = false;             // GHS mode
    const g3p::SamplerTables* g3p_tables = nullptr;
    bool track_kappa = false;  // store thinned upper-triangle kappa draws
    bool track_omega = false;  // store thinned upper-triangle omega draws

    void validate() const;
};

struct ChainTrace {
    int K = 0, p = 0;
    int n_draws = 0;  // thinned draws recorded
    int thin = 1;

    // running means over every post-burnin sweep
    std::vector<MatrixXd> omega_mean, sigma_mean, kappa_mean;
    MatrixXd r_mean;

    // thinned draws
    std::vector<VectorXd> tau2_draws;
    std::vector<MatrixXd> r_draws;
    std::vector<double> logpost_draws;
    // [draw][group] -> upper triangle (i<j) flattened row-major
    std::vector<std::vector<VectorXd>> kappa_draws;
    std::vector<std::vector<VectorXd>> omega_draws;

    std::uint64_t r_proposals = 0;
    std::uint64_t r_accepts = 0;
    g3p::DrawStats g3p_stats;
    double seconds = 0.0;

    double r_acceptance_rate() const {
        return r_proposals ? static_cast<double>(r_accepts) / r_proposals : 0.0;
    }
};

// One column of the precision/covariance pair for group k (Gibbs step 1).
void update_omega_column(ChainState& state, const GroupData& data, int k, int j,
                         Rng& rng);

// Local shrinkage for column j of group k (Gibbs step 2, local part).
void update_shrinkage_column(ChainState& state, int k, int j, Rng& rng,
                             const g3p::SamplerTables* tables = nullptr,
                             g3p::DrawStats* stats = nullptr);

// Global shrinkage tau^2_k and zeta_k for all groups.
void update_global_shrinkage(ChainState& state, Rng& rng,
                             const g3p::SamplerTables* tables = nullptr,
                             g3p::DrawStats* stats = nullptr);

// Parameter-expanded Metropolis-Hastings step for R. Returns whether the
// proposal was accepted. No-op (returns false) for K < 2.
bool update_R(ChainState& state, Rng& rng);

// One full iteration in Algorithm order: columns (omega then shrinkage) for
// each group, then global shrinkage, then R.
void sweep(ChainState& state, const GroupData& data, Rng& rng,
           const ChainConfig& config, ChainTrace* trace = nullptr);

// Unnormalized log joint posterior; -inf when any omega is not positive
// definite.
double log_joint_posterior(const ChainState& state, const GroupData& data);

// Called at every thinned post-burnin draw, e.g. by the cut-model selection.
using ThinnedHook = std::function<void(const ChainState&, int draw_index)>;

ChainTrace run_chain(const GroupData& data, const ChainConfig& config,
                     const ThinnedHook& hook = {});

// Upper-triangle (i<j) flattening used by the trace vectors.
VectorXd upper_triangle(const MatrixXd& m);
int upper_triangle_size(int p);

}  // namespace mghs::chain
