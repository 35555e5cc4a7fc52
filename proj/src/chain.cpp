#include "mghs/chain.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mghs::chain {

namespace {

constexpr double jitter_eps = 1e-10;

std::vector<int> indices_without(int n, int skip) {
    std::vector<int> idx;
    idx.reserve(n - 1);
    for (int i = 0; i < n; ++i)
        if (i != skip) idx.push_back(i);
    return idx;
}

[[noreturn]] void abort_update(const std::string& where, int k, int j) {
    std::ostringstream os;
    os << where << ": non-positive-definite system after jitter retry (group "
       << k << ", column " << j << ")";
    throw std::runtime_error(os.str());
}

// r_k' R_{-k}^{-1} as a compressed (K-1)-vector, and mu_k.
struct GroupCoupling {
    std::vector<int> others;
    VectorXd w;      // R_{-k}^{-1} r_k
    double mu = 1.0;
};

GroupCoupling coupling(const ChainState& state, int k) {
    GroupCoupling c;
    c.others = indices_without(state.K, k);
    if (state.K == 1) {
        c.mu = 1.0;
        return c;
    }
    MatrixXd R_mk = state.R(c.others, c.others);
    VectorXd r_k = state.R(c.others, std::vector<int>{k});
    c.w = R_mk.llt().solve(r_k);
    c.mu = 1.0 - r_k.dot(c.w);
    return c;
}

// t_i = r_k' R_{-k}^{-1} Delta_{ij,-k}^{-1} omega_{ij}^{-k} for one edge.
double edge_coupling_term(const ChainState& state, const GroupCoupling& c, int k,
                          int i, int j) {
    (void)k;
    if (state.K == 1) return 0.0;
    double t = 0.0;
    for (std::size_t a = 0; a < c.others.size(); ++a) {
        int kp = c.others[a];
        double delta = std::sqrt(state.tau2[kp] * state.lambda2[kp](i, j));
        t += c.w[a] * state.omega[kp](i, j) / delta;
    }
    return t;
}

double draw_g3p(const g3p::Params& p, const g3p::SamplerTables* tables, Rng& rng,
                g3p::DrawStats* stats) {
    if (tables) return g3p::sample_with_tables(p, *tables, rng, stats);
    g3p::DrawStats scratch;
    g3p::Sampler s(p);
    return s.draw(rng, stats ? *stats : scratch);
}

// Wishart(df, scale) via Bartlett; needs df > dim - 1.
MatrixXd draw_wishart(double df, const MatrixXd& scale, Rng& rng) {
    const int d = static_cast<int>(scale.rows());
    if (!(df > d - 1))
        throw std::invalid_argument("draw_wishart: df must exceed dim - 1");
    Eigen::LLT<MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("draw_wishart: scale not positive definite");
    MatrixXd L = llt.matrixL();
    MatrixXd A = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        A(i, i) = std::sqrt(rng.chi_squared(df - i));
        for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
    }
    MatrixXd LA = L * A;
    return LA * LA.transpose();
}

double log_det_spd(const MatrixXd& m, bool& ok) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        ok = false;
        return -std::numeric_limits<double>::infinity();
    }
    ok = true;
    return 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

GroupData GroupData::from_observations(const std::vector<MatrixXd>& groups) {
    if (groups.empty()) throw std::invalid_argument("GroupData: no groups");
    GroupData d;
    d.K = static_cast<int>(groups.size());
    d.p = static_cast<int>(groups.front().cols());
    for (const MatrixXd& y : groups) {
        if (y.cols() != d.p)
            throw std::invalid_argument("GroupData: inconsistent column counts");
        if (y.rows() < 1) throw std::invalid_argument("GroupData: empty group");
        d.scatter.push_back(y.transpose() * y);
        d.n.push_back(static_cast<int>(y.rows()));
    }
    return d;
}

void GroupData::validate() const {
    if (K < 1 || p < 2) throw std::invalid_argument("GroupData: need K >= 1, p >= 2");
    if (static_cast<int>(scatter.size()) != K || static_cast<int>(n.size()) != K)
        throw std::invalid_argument("GroupData: size mismatch");
    for (const MatrixXd& s : scatter) {
        if (s.rows() != p || s.cols() != p)
            throw std::invalid_argument("GroupData: scatter shape mismatch");
        if (!s.isApprox(s.transpose(), 1e-10))
            throw std::invalid_argument("GroupData: scatter not symmetric");
    }
}

void ChainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("ChainConfig: iterations >= 1");
    if (thin < 1) throw std::invalid_argument("ChainConfig: thin >= 1");
    if (burnin < 0) throw std::invalid_argument("ChainConfig: burnin >= 0");
}

ChainState init_state(int K, int p) {
    if (K < 1 || p < 2) throw std::invalid_argument("init_state: need K >= 1, p >= 2");
    ChainState s;
    s.K = K;
    s.p = p;
    s.omega.assign(K, MatrixXd::Identity(p, p));
    s.sigma.assign(K, MatrixXd::Identity(p, p));
    s.lambda2.assign(K, MatrixXd::Ones(p, p));
    s.eta.assign(K, MatrixXd::Ones(p, p));
    s.tau2 = VectorXd::Ones(K);
    s.zeta = VectorXd::Ones(K);
    s.R = MatrixXd::Identity(K, K);
    s.mu = VectorXd::Ones(K);
    s.alpha_lambda.assign(K, MatrixXd::Ones(p, p));
    s.beta_lambda.assign(K, MatrixXd::Zero(p, p));
    return s;
}

void update_omega_column(ChainState& state, const GroupData& data, int k, int j,
                         Rng& rng) {
    const int p = state.p;
    const auto idx = indices_without(p, j);
    const GroupCoupling c = coupling(state, k);

    const MatrixXd& S = data.scatter[k];
    const double s_jj = S(j, j);
    VectorXd s_col = S(idx, std::vector<int>{j});

    // D, m from the K-variate edge prior conditioned on the other groups
    VectorXd d_diag(p - 1), m_vec(p - 1);
    for (int a = 0; a < p - 1; ++a) {
        int i = idx[a];
        double lam2 = state.lambda2[k](i, j);
        double delta = std::sqrt(state.tau2[k] * lam2);
        double t = edge_coupling_term(state, c, k, i, j);
        d_diag[a] = state.tau2[k] * lam2 * c.mu;
        m_vec[a] = delta * t;
    }

    // O = (Omega_{-j})^{-1} by the rank-one identity on Sigma
    const MatrixXd& Sig = state.sigma[k];
    VectorXd sig_col = Sig(idx, std::vector<int>{j});
    MatrixXd O = Sig(idx, idx) - (sig_col * sig_col.transpose()) / Sig(j, j);

    MatrixXd W = (s_jj * O).eval();
    W.diagonal() += d_diag.cwiseInverse();
    VectorXd b = m_vec.cwiseQuotient(d_diag) - s_col;

    Eigen::LLT<MatrixXd> llt(W);
    if (llt.info() != Eigen::Success) {
        W = 0.5 * (W + W.transpose()).eval();
        W.diagonal().array() += jitter_eps;
        llt.compute(W);
        if (llt.info() != Eigen::Success) abort_update("update_omega_column", k, j);
    }

    const double gamma_jj = rng.gamma(0.5 * data.n[k] + 1.0, 0.5 * s_jj);
    VectorXd mean = llt.solve(b);
    VectorXd z(p - 1);
    for (int a = 0; a < p - 1; ++a) z[a] = rng.normal();
    VectorXd v = mean + llt.matrixU().solve(z);

    // write back omega and rebuild sigma with rank-one formulas
    MatrixXd& Om = state.omega[k];
    for (int a = 0; a < p - 1; ++a) {
        Om(idx[a], j) = v[a];
        Om(j, idx[a]) = v[a];
    }
    VectorXd Ov = O * v;
    Om(j, j) = gamma_jj + v.dot(Ov);

    MatrixXd& Sg = state.sigma[k];
    MatrixXd new_block = O + (Ov * Ov.transpose()) / gamma_jj;
    for (int a = 0; a < p - 1; ++a) {
        for (int bcol = 0; bcol < p - 1; ++bcol) Sg(idx[a], idx[bcol]) = new_block(a, bcol);
        Sg(idx[a], j) = -Ov[a] / gamma_jj;
        Sg(j, idx[a]) = Sg(idx[a], j);
    }
    Sg(j, j) = 1.0 / gamma_jj;
}

void update_shrinkage_column(ChainState& state, int k, int j, Rng& rng,
                             const g3p::SamplerTables* tables,
                             g3p::DrawStats* stats) {
    const GroupCoupling c = coupling(state, k);
    const double tau2 = state.tau2[k];
    const double tau = std::sqrt(tau2);
    const double mu = c.mu;
    for (int i = 0; i < state.p; ++i) {
        if (i == j) continue;
        double w_ij = state.omega[k](i, j);
        double a_l = 1.0 / state.eta[k](i, j) + w_ij * w_ij / (2.0 * tau2 * mu);
        double t = edge_coupling_term(state, c, k, i, j);
        double b_l = w_ij / (tau * mu) * t;
        double u = draw_g3p({1, std::sqrt(a_l), b_l}, tables, rng, stats);
        double lam2 = 1.0 / (u * u);
        state.lambda2[k](i, j) = lam2;
        state.lambda2[k](j, i) = lam2;
        double e = rng.inverse_gamma(1.0, 1.0 + 1.0 / lam2);
        state.eta[k](i, j) = e;
        state.eta[k](j, i) = e;
        state.alpha_lambda[k](i, j) = a_l;
        state.alpha_lambda[k](j, i) = a_l;
        state.beta_lambda[k](i, j) = b_l;
        state.beta_lambda[k](j, i) = b_l;
    }
}

void update_global_shrinkage(ChainState& state, Rng& rng,
                             const g3p::SamplerTables* tables,
                             g3p::DrawStats* stats) {
    const int p = state.p;
    for (int k = 0; k < state.K; ++k) {
        const GroupCoupling c = coupling(state, k);
        double a_t = 1.0 / state.zeta[k];
        double b_t = 0.0;
        for (int j = 1; j < p; ++j) {
            for (int i = 0; i < j; ++i) {
                double w_ij = state.omega[k](i, j);
                double lam2 = state.lambda2[k](i, j);
                a_t += 0.5 * w_ij * w_ij / (lam2 * c.mu);
                double t = edge_coupling_term(state, c, k, i, j);
                b_t += w_ij / (std::sqrt(lam2) * c.mu) * t;
            }
        }
        int order = p * (p - 1) / 2;
        double u = draw_g3p({order, std::sqrt(a_t), b_t}, tables, rng, stats);
        state.tau2[k] = 1.0 / (u * u);
        state.zeta[k] = rng.inverse_gamma(1.0, 1.0 + 1.0 / state.tau2[k]);
    }
}

bool update_R(ChainState& state, Rng& rng) {
    const int K = state.K, p = state.p;
    if (K < 2) return false;
    const double df = 0.5 * p * (p - 1);
    if (!(df > K - 1))
        throw std::invalid_argument("update_R: needs p(p-1)/2 > K - 1");

    // V maps omega_ij to epsilon_ij with sum_{i<j} eps^2 = 1 per group
    VectorXd v_scale(K);
    for (int k = 0; k < K; ++k) {
        double ss = 0.0;
        for (int j = 1; j < p; ++j)
            for (int i = 0; i < j; ++i) ss += state.omega[k](i, j) * state.omega[k](i, j);
        v_scale[k] = std::sqrt(ss);
    }

    MatrixXd H = MatrixXd::Zero(K, K);
    VectorXd e(K);
    for (int j = 1; j < p; ++j) {
        for (int i = 0; i < j; ++i) {
            for (int k = 0; k < K; ++k) {
                double delta = std::sqrt(state.tau2[k] * state.lambda2[k](i, j));
                e[k] = state.omega[k](i, j) / (v_scale[k] * delta);
            }
            H.noalias() += e * e.transpose();
        }
    }

    Eigen::LLT<MatrixXd> hllt(H);
    if (hllt.info() != Eigen::Success) {
        H.diagonal().array() += jitter_eps;
        hllt.compute(H);
        if (hllt.info() != Eigen::Success) abort_update("update_R", -1, -1);
    }

    // Psi ~ IW(df, H): invert a Wishart draw with the inverse scale
    MatrixXd Hinv = hllt.solve(MatrixXd::Identity(K, K));
    MatrixXd wish = draw_wishart(df, 0.5 * (Hinv + Hinv.transpose()), rng);
    MatrixXd psi = wish.llt().solve(MatrixXd::Identity(K, K));
    VectorXd inv_sd = psi.diagonal().array().sqrt().inverse();
    MatrixXd r_star = inv_sd.asDiagonal() * psi * inv_sd.asDiagonal();
    r_star = 0.5 * (r_star + r_star.transpose()).eval();
    r_star.diagonal().setOnes();

    bool ok_new = false, ok_old = false;
    double ld_new = log_det_spd(r_star, ok_new);
    double ld_old = log_det_spd(state.R, ok_old);
    if (!ok_new) return false;
    if (!ok_old) abort_update("update_R (current R not PD)", -1, -1);

    double log_acc = 0.5 * (K + 1) * (ld_new - ld_old);
    if (std::log(rng.uniform()) < log_acc) {
        state.R = r_star;
        for (int k = 0; k < K; ++k) state.mu[k] = coupling(state, k).mu;
        return true;
    }
    return false;
}

void sweep(ChainState& state, const GroupData& data, Rng& rng,
           const ChainConfig& config, ChainTrace* trace) {
    g3p::DrawStats* stats = trace ? &trace->g3p_stats : nullptr;
    for (int k = 0; k < state.K; ++k) {
        for (int j = 0; j < state.p; ++j) {
            update_omega_column(state, data, k, j, rng);
            update_shrinkage_column(state, k, j, rng, config.g3p_tables, stats);
        }
    }
    update_global_shrinkage(state, rng, config.g3p_tables, stats);
    if (!config.freeze_r_identity && state.K >= 2) {
        bool accepted = update_R(state, rng);
        if (trace) {
            ++trace->r_proposals;
            if (accepted) ++trace->r_accepts;
        }
    }
}

double log_joint_posterior(const ChainState& state, const GroupData& data) {
    const int K = state.K, p = state.p;
    double lp = 0.0;
    // Gaussian likelihood through the scatter matrices
    for (int k = 0; k < K; ++k) {
        bool ok = false;
        double ld = log_det_spd(state.omega[k], ok);
        if (!ok) return -std::numeric_limits<double>::infinity();
        lp += 0.5 * data.n[k] * ld -
              0.5 * (data.scatter[k].cwiseProduct(state.omega[k])).sum();
    }
    // K-variate normal prior on each edge vector, Psi_ij = Delta R Delta
    bool okr = false;
    double ld_r = log_det_spd(state.R, okr);
    if (!okr) return -std::numeric_limits<double>::infinity();
    Eigen::LLT<MatrixXd> rllt(state.R);
    const double log2pi = std::log(2.0 * M_PI);
    VectorXd u(K);
    for (int j = 1; j < p; ++j) {
        for (int i = 0; i < j; ++i) {
            double log_det_delta2 = 0.0;
            for (int k = 0; k < K; ++k) {
                double delta2 = state.tau2[k] * state.lambda2[k](i, j);
                log_det_delta2 += std::log(delta2);
                u[k] = state.omega[k](i, j) / std::sqrt(delta2);
            }
            double quad = u.dot(rllt.solve(u));
            lp += -0.5 * K * log2pi - 0.5 * (ld_r + log_det_delta2) - 0.5 * quad;
        }
    }
    // half-Cauchy auxiliaries: x | y ~ IG(1/2, 1/y), y ~ IG(1/2, 1)
    const double lgamma_half = std::lgamma(0.5);
    auto ig_half = [&](double x, double inv_scale_y) {
        return -0.5 * std::log(inv_scale_y) - lgamma_half - 1.5 * std::log(x) -
               1.0 / (inv_scale_y * x);
    };
    for (int k = 0; k < K; ++k) {
        for (int j = 1; j < p; ++j) {
            for (int i = 0; i < j; ++i) {
                double l2 = state.lambda2[k](i, j), e = state.eta[k](i, j);
                lp += ig_half(l2, e);
                lp += -lgamma_half - 1.5 * std::log(e) - 1.0 / e;
            }
        }
        lp += ig_half(state.tau2[k], state.zeta[k]);
        lp += -lgamma_half - 1.5 * std::log(state.zeta[k]) - 1.0 / state.zeta[k];
    }
    return lp;
}

VectorXd upper_triangle(const MatrixXd& m) {
    const int p = static_cast<int>(m.rows());
    VectorXd out(upper_triangle_size(p));
    int a = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) out[a++] = m(i, j);
    return out;
}

int upper_triangle_size(int p) { return p * (p - 1) / 2; }

ChainTrace run_chain(const GroupData& data, const ChainConfig& config,
                     const ThinnedHook& hook) {
    data.validate();
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    ChainState state = init_state(data.K, data.p);
    Rng rng(config.seed, config.stream);

    ChainTrace trace;
    trace.K = data.K;
    trace.p = data.p;
    trace.thin = config.thin;
    trace.omega_mean.assign(data.K, MatrixXd::Zero(data.p, data.p));
    trace.sigma_mean.assign(data.K, MatrixXd::Zero(data.p, data.p));
    trace.kappa_mean.assign(data.K, MatrixXd::Zero(data.p, data.p));
    trace.r_mean = MatrixXd::Zero(data.K, data.K);

    for (int it = 0; it < config.burnin; ++it) sweep(state, data, rng, config, &trace);
    // burnin R proposals do not count toward the reported acceptance rate
    trace.r_proposals = 0;
    trace.r_accepts = 0;

    long kept = 0;
    for (int it = 0; it < config.iterations; ++it) {
        sweep(state, data, rng, config, &trace);
        ++kept;
        for (int k = 0; k < data.K; ++k) {
            trace.omega_mean[k] += (state.omega[k] - trace.omega_mean[k]) / kept;
            trace.sigma_mean[k] += (state.sigma[k] - trace.sigma_mean[k]) / kept;
            MatrixXd kappa =
                state.lambda2[k].array() / (1.0 + state.lambda2[k].array());
            trace.kappa_mean[k] += (kappa - trace.kappa_mean[k]) / kept;
        }
        trace.r_mean += (state.R - trace.r_mean) / kept;

        if ((it + 1) % config.thin == 0) {
            trace.tau2_draws.push_back(state.tau2);
            trace.r_draws.push_back(state.R);
            trace.logpost_draws.push_back(log_joint_posterior(state, data));
            if (config.track_kappa) {
                std::vector<VectorXd> row;
                for (int k = 0; k < data.K; ++k) {
                    MatrixXd kappa =
                        state.lambda2[k].array() / (1.0 + state.lambda2[k].array());
                    row.push_back(upper_triangle(kappa));
                }
                trace.kappa_draws.push_back(std::move(row));
            }
            if (config.track_omega) {
                std::vector<VectorXd> row;
                for (int k = 0; k < data.K; ++k)
                    row.push_back(upper_triangle(state.omega[k]));
                trace.omega_draws.push_back(std::move(row));
            }
            if (hook) hook(state, trace.n_draws);
            ++trace.n_draws;
        }
    }
    trace.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return trace;
}

}  // namespace mghs::chain
