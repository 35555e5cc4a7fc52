#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mghs/rng.hpp"

namespace mghs::simulate {

using Eigen::MatrixXd;

enum class Scenario { Independent, Coupled, P2020, FullDependence };

struct ScenarioSpec {
    Scenario scenario = Scenario::Independent;
    int K = 4;
    int p = 50;
    int n = 50;            // observations per group
    int block_size = 5;    // 5 or 10
    double edge_prob = 0.825;   // within-block edge probability; the default
                                // puts the mean true-edge count at p=50,
                                // block 5 on 82.5
    double perturb_frac = 0.25; // fraction of base edges toggled per group
                                // (split between the two groups compared)
    std::uint64_t seed = 1;

    void validate() const;
};

struct PrecisionSet {
    std::vector<MatrixXd> omega;           // true precisions, unit diagonal
    std::vector<Eigen::MatrixXi> adjacency;  // exact nonzero pattern
    int regenerated_blocks = 0;            // PD failures that forced a redraw
};

PrecisionSet generate_precision_set(const ScenarioSpec& spec, Rng& rng);

// n i.i.d. rows from N(0, Sigma) via Cholesky.
MatrixXd sample_mvn(const MatrixXd& sigma, int n, Rng& rng);

struct ScenarioData {
    std::vector<MatrixXd> observations;  // K matrices, n x p
    PrecisionSet truth;
};

ScenarioData generate_scenario(const ScenarioSpec& spec);

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

}  // namespace mghs::simulate
