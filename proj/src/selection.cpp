#include "mghs/selection.hpp"

#include <cmath>
#include <stdexcept>

#include "mghs/g3p.hpp"

namespace mghs::selection {

namespace {

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

// sum over edges of z log q + (1-z) log(1-q) at threshold t
double loglik_at(const std::vector<MatrixXd>& alpha_lambda,
                 const std::vector<MatrixXd>& beta_lambda,
                 const std::vector<Eigen::MatrixXi>& z, double t) {
    double ll = 0.0;
    const int K = static_cast<int>(alpha_lambda.size());
    const int p = static_cast<int>(alpha_lambda.front().rows());
    for (int k = 0; k < K; ++k) {
        for (int j = 1; j < p; ++j) {
            for (int i = 0; i < j; ++i) {
                double q = kappa_tail_prob(alpha_lambda[k](i, j), beta_lambda[k](i, j), t);
                ll += z[k](i, j) ? safe_log(q) : safe_log(1.0 - q);
            }
        }
    }
    return ll;
}

}  // namespace

double kappa_tail_prob(double alpha_lambda, double beta_lambda, double t) {
    if (t < 0.0 || t > 1.0)
        throw std::domain_error("kappa_tail_prob: t must be in [0, 1]");
    if (t == 0.0) return 1.0;
    if (t == 1.0) return 0.0;
    // u = sqrt((1 - kappa)/kappa) maps the kappa density to
    // G3p(1, sqrt(alpha_lambda), beta_lambda); kappa >= t iff u <= sqrt((1-t)/t)
    double x = std::sqrt((1.0 - t) / t);
    return g3p::cdf_gamma1(std::sqrt(alpha_lambda), beta_lambda, x);
}

SelectionState init_selection(int K, int p, const SelectionConfig& config, Rng& rng) {
    SelectionState s;
    s.K = K;
    s.p = p;
    s.z_sum.assign(K, MatrixXd::Zero(p, p));
    s.t_alpha = rng.beta(config.a, config.b);
    return s;
}

void cut_step(const std::vector<MatrixXd>& alpha_lambda,
              const std::vector<MatrixXd>& beta_lambda, SelectionState& state,
              const SelectionConfig& config, Rng& rng) {
    const int K = state.K, p = state.p;
    // Gibbs draw of the inclusion indicators
    std::vector<Eigen::MatrixXi> z(K, Eigen::MatrixXi::Zero(p, p));
    for (int k = 0; k < K; ++k) {
        for (int j = 1; j < p; ++j) {
            for (int i = 0; i < j; ++i) {
                double q = kappa_tail_prob(alpha_lambda[k](i, j), beta_lambda[k](i, j),
                                           state.t_alpha);
                if (rng.bernoulli(q)) {
                    z[k](i, j) = 1;
                    state.z_sum[k](i, j) += 1.0;
                    state.z_sum[k](j, i) += 1.0;
                }
            }
        }
    }
    // MH update of the threshold, proposing from the prior
    double t_prop = rng.beta(config.a, config.b);
    double log_acc = loglik_at(alpha_lambda, beta_lambda, z, t_prop) -
                     loglik_at(alpha_lambda, beta_lambda, z, state.t_alpha);
    if (!config.hastings_correction) {
        // acceptance written with the full joint, prior ratio included
        log_acc += (config.a - 1.0) * (safe_log(t_prop) - safe_log(state.t_alpha)) +
                   (config.b - 1.0) * (safe_log(1.0 - t_prop) - safe_log(1.0 - state.t_alpha));
    }
    ++state.mh_proposals;
    if (std::log(rng.uniform()) < log_acc) {
        state.t_alpha = t_prop;
        ++state.mh_accepts;
    }
    state.t_alpha_draws.push_back(state.t_alpha);
    ++state.steps;
}

SelectionResult finalize(const SelectionState& state) {
    SelectionResult r;
    r.t_alpha_draws = state.t_alpha_draws;
    r.mh_acceptance = state.mh_proposals
                          ? static_cast<double>(state.mh_accepts) / state.mh_proposals
                          : 0.0;
    for (const MatrixXd& zs : state.z_sum)
        r.z_frequency.push_back(state.steps ? MatrixXd(zs / state.steps)
                                            : MatrixXd::Zero(state.p, state.p));
    return r;
}

std::vector<Eigen::MatrixXi> select_mpm(const std::vector<MatrixXd>& kappa_mean) {
    std::vector<Eigen::MatrixXi> out;
    for (const MatrixXd& km : kappa_mean) {
        const int p = static_cast<int>(km.rows());
        Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
        for (int j = 1; j < p; ++j)
            for (int i = 0; i < j; ++i)
                if (km(i, j) >= 0.5) adj(i, j) = adj(j, i) = 1;
        out.push_back(adj);
    }
    return out;
}

std::vector<Eigen::MatrixXi> select_cut(const SelectionResult& result) {
    std::vector<Eigen::MatrixXi> out;
    for (const MatrixXd& zf : result.z_frequency) {
        const int p = static_cast<int>(zf.rows());
        Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
        for (int j = 1; j < p; ++j)
            for (int i = 0; i < j; ++i)
                if (zf(i, j) >= 0.5) adj(i, j) = adj(j, i) = 1;
        out.push_back(adj);
    }
    return out;
}

Runner::Runner(int K, int p, const SelectionConfig& config)
    : config_(config), rng_(config.seed, 0x5e1ec7ULL) {
    state_ = init_selection(K, p, config_, rng_);
}

void Runner::step(const chain::ChainState& state) {
    cut_step(state.alpha_lambda, state.beta_lambda, state_, config_, rng_);
}

}  // namespace mghs::selection
