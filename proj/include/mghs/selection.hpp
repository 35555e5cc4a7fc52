#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mghs/chain.hpp"
#include "mghs/rng.hpp"

namespace mghs::selection {

using Eigen::MatrixXd;

enum class Mode { MPM, Cut };

struct SelectionConfig {
    double a = 30.0;  // Beta prior on the threshold
    double b = 25.0;
    bool hastings_correction = false;  // acceptance as written in the model
                                       // (prior ratio kept) when false;
                                       // independence-proposal correction
                                       // (likelihood ratio only) when true
    std::uint64_t seed = 1;
};

// Accumulated cut-model state across thinned draws. z_sum counts inclusion
// events per edge per group; one shared threshold across groups.
struct SelectionState {
    int K = 0, p = 0;
    std::vector<MatrixXd> z_sum;
    double t_alpha = 0.5;
    std::vector<double> t_alpha_draws;
    std::uint64_t mh_proposals = 0;
    std::uint64_t mh_accepts = 0;
    int steps = 0;
};

SelectionState init_selection(int K, int p, const SelectionConfig& config, Rng& rng);

struct SelectionResult {
    std::vector<MatrixXd> z_frequency;  // per-edge inclusion frequency
    std::vector<double> t_alpha_draws;
    double mh_acceptance = 0.0;
};

// P(kappa >= t) under the kappa full conditional with coefficients
// (alpha_lambda, beta_lambda); closed form through the gamma = 1 CDF.
double kappa_tail_prob(double alpha_lambda, double beta_lambda, double t);

// One Metropolis-within-Gibbs step over (z, t_alpha), consuming the chain's
// current full-conditional coefficients. Selection never feeds back: it only
// reads the coefficients and uses its own random stream.
void cut_step(const std::vector<MatrixXd>& alpha_lambda,
              const std::vector<MatrixXd>& beta_lambda, SelectionState& state,
              const SelectionConfig& config, Rng& rng);

SelectionResult finalize(const SelectionState& state);

// MPM rule: edge included iff posterior mean kappa >= 1/2.
std::vector<Eigen::MatrixXi> select_mpm(const std::vector<MatrixXd>& kappa_mean);

// Cut rule: edge included iff its z frequency >= 1/2.
std::vector<Eigen::MatrixXi> select_cut(const SelectionResult& result);

// Convenience owner that plugs into chain::run_chain as a thinned hook.
class Runner {
public:
    Runner(int K, int p, const SelectionConfig& config);
    void step(const chain::ChainState& state);
    SelectionResult result() const { return finalize(state_); }
    const SelectionState& state() const { return state_; }

private:
    SelectionConfig config_;
    Rng rng_;
    SelectionState state_;
};

}  // namespace mghs::selection
