#include "mghs/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mghs::simulate {

namespace {

struct BlockPair {
    int i, j;  // absolute indices, i < j
};

std::vector<BlockPair> within_block_pairs(int p, int block_size) {
    std::vector<BlockPair> pairs;
    for (int b0 = 0; b0 < p; b0 += block_size) {
        int b1 = std::min(b0 + block_size, p);
        for (int i = b0; i < b1; ++i)
            for (int j = i + 1; j < b1; ++j) pairs.push_back({i, j});
    }
    return pairs;
}

double edge_magnitude(Rng& rng) {
    double mag = rng.uniform(0.4, 0.6);
    return rng.bernoulli(0.5) ? mag : -mag;
}

// Rescale off-diagonals per block until every row is strictly dominated by
// the unit diagonal, then verify positive definiteness.
bool stabilize(MatrixXd& omega, int p, int block_size) {
    for (int b0 = 0; b0 < p; b0 += block_size) {
        int b1 = std::min(b0 + block_size, p);
        double worst = 0.0;
        for (int i = b0; i < b1; ++i) {
            double row = 0.0;
            for (int j = b0; j < b1; ++j)
                if (j != i) row += std::abs(omega(i, j));
            worst = std::max(worst, row);
        }
        if (worst > 0.9) {
            double scale = 0.9 / worst;
            for (int i = b0; i < b1; ++i)
                for (int j = b0; j < b1; ++j)
                    if (j != i) omega(i, j) *= scale;
        }
    }
    omega.diagonal().setOnes();
    return Eigen::LLT<MatrixXd>(omega).info() == Eigen::Success;
}

MatrixXd base_precision(const ScenarioSpec& spec, Rng& rng, int& regenerated) {
    const int p = spec.p;
    for (int attempt = 0; attempt < 100; ++attempt) {
        MatrixXd omega = MatrixXd::Zero(p, p);
        for (const BlockPair& pr : within_block_pairs(p, spec.block_size)) {
            if (rng.bernoulli(spec.edge_prob)) {
                double v = edge_magnitude(rng);
                omega(pr.i, pr.j) = v;
                omega(pr.j, pr.i) = v;
            }
        }
        if (stabilize(omega, p, spec.block_size)) return omega;
        ++regenerated;
    }
    throw std::runtime_error("base_precision: could not stabilize after 100 tries");
}

Eigen::MatrixXi adjacency_of(const MatrixXd& omega) {
    const int p = static_cast<int>(omega.rows());
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (int j = 1; j < p; ++j)
        for (int i = 0; i < j; ++i)
            if (omega(i, j) != 0.0) adj(i, j) = adj(j, i) = 1;
    return adj;
}

// Toggle `count` distinct within-block pairs: existing edges are deleted,
// missing ones added with a fresh magnitude.
void toggle_edges(MatrixXd& omega, const std::vector<BlockPair>& pairs, int count,
                  Rng& rng) {
    std::vector<int> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    // partial Fisher-Yates for the first `count` positions
    for (int i = 0; i < count && i + 1 < static_cast<int>(order.size()); ++i) {
        int j = i + static_cast<int>(rng.uniform_index(order.size() - i));
        std::swap(order[i], order[j]);
    }
    for (int t = 0; t < count && t < static_cast<int>(order.size()); ++t) {
        const BlockPair& pr = pairs[order[t]];
        if (omega(pr.i, pr.j) != 0.0) {
            omega(pr.i, pr.j) = omega(pr.j, pr.i) = 0.0;
        } else {
            double v = edge_magnitude(rng);
            omega(pr.i, pr.j) = omega(pr.j, pr.i) = v;
        }
    }
}

}  // namespace

void ScenarioSpec::validate() const {
    if (K < 1) throw std::invalid_argument("ScenarioSpec: K >= 1");
    if (p < 2) throw std::invalid_argument("ScenarioSpec: p >= 2");
    if (n < 1) throw std::invalid_argument("ScenarioSpec: n >= 1");
    if (block_size != 5 && block_size != 10)
        throw std::invalid_argument("ScenarioSpec: block_size must be 5 or 10");
    if (p % block_size != 0)
        throw std::invalid_argument("ScenarioSpec: p must divide into blocks");
    if (scenario == Scenario::Coupled && K % 2 != 0)
        throw std::invalid_argument("ScenarioSpec: Coupled needs even K");
    if (edge_prob <= 0.0 || edge_prob >= 1.0)
        throw std::invalid_argument("ScenarioSpec: edge_prob in (0, 1)");
    if (perturb_frac < 0.0 || perturb_frac > 1.0)
        throw std::invalid_argument("ScenarioSpec: perturb_frac in [0, 1]");
}

PrecisionSet generate_precision_set(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    PrecisionSet out;
    switch (spec.scenario) {
        case Scenario::Independent:
            for (int k = 0; k < spec.K; ++k)
                out.omega.push_back(base_precision(spec, rng, out.regenerated_blocks));
            break;
        case Scenario::Coupled:
            for (int pair = 0; pair < spec.K / 2; ++pair) {
                MatrixXd om = base_precision(spec, rng, out.regenerated_blocks);
                out.omega.push_back(om);
                out.omega.push_back(om);
            }
            break;
        case Scenario::FullDependence: {
            MatrixXd om = base_precision(spec, rng, out.regenerated_blocks);
            out.omega.assign(spec.K, om);
            break;
        }
        case Scenario::P2020: {
            MatrixXd base = base_precision(spec, rng, out.regenerated_blocks);
            auto pairs = within_block_pairs(spec.p, spec.block_size);
            int base_edges = adjacency_of(base).sum() / 2;
            // half the fraction per group so two groups differ by about
            // perturb_frac of the base edge count
            int toggles = static_cast<int>(std::lround(0.5 * spec.perturb_frac * base_edges));
            for (int k = 0; k < spec.K; ++k) {
                for (int attempt = 0;; ++attempt) {
                    MatrixXd om = base;
                    toggle_edges(om, pairs, toggles, rng);
                    if (stabilize(om, spec.p, spec.block_size)) {
                        out.omega.push_back(om);
                        break;
                    }
                    ++out.regenerated_blocks;
                    if (attempt >= 100)
                        throw std::runtime_error("P2020: could not stabilize group");
                }
            }
            break;
        }
    }
    for (const MatrixXd& om : out.omega) out.adjacency.push_back(adjacency_of(om));
    return out;
}

MatrixXd sample_mvn(const MatrixXd& sigma, int n, Rng& rng) {
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("sample_mvn: sigma not positive definite");
    const int p = static_cast<int>(sigma.rows());
    MatrixXd L = llt.matrixL();
    MatrixXd out(n, p);
    Eigen::VectorXd z(p);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < p; ++c) z[c] = rng.normal();
        out.row(r) = (L * z).transpose();
    }
    return out;
}

ScenarioData generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed, 0);
    ScenarioData data;
    data.truth = generate_precision_set(spec, rng);
    for (int k = 0; k < spec.K; ++k) {
        MatrixXd sigma = data.truth.omega[k].llt().solve(
            MatrixXd::Identity(spec.p, spec.p));
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
        data.observations.push_back(sample_mvn(sigma, spec.n, rng));
    }
    return data;
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Independent: return "independent";
        case Scenario::Coupled: return "coupled";
        case Scenario::P2020: return "p2020";
        case Scenario::FullDependence: return "full-dependence";
    }
    return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "independent") return Scenario::Independent;
    if (name == "coupled") return Scenario::Coupled;
    if (name == "p2020") return Scenario::P2020;
    if (name == "full-dependence" || name == "full") return Scenario::FullDependence;
    throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace mghs::simulate
