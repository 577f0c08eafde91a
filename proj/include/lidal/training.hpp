#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lidal/mlp.hpp"

namespace lidal {

/// Labeled samples; rows of `inputs` and `labels` correspond.
struct Dataset {
    Eigen::MatrixXd inputs;  // n x n_in
    Eigen::MatrixXd labels;  // n x n_out, entries in {0, 1}

    long long size() const { return inputs.rows(); }
};

struct TrainerConfig {
    int epochs = 500;
    double mu_r = 0.05;                 // initial damping
    double validation_fraction = 0.20;  // 0 validates on the training split
    std::vector<double> beta_range;     // pruning factors to sweep
    double output_threshold = 0.5;
    std::uint64_t seed = 1;
    double target_train_mse = 0.0;      // > 0 stops a candidate early
    double mu_min = 1e-12;
    double mu_max = 1e10;
    bool verbose = false;
};

struct EpochRecord {
    double beta = 0.0;
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double mu = 0.0;
};

struct TrainingReport {
    std::vector<EpochRecord> epochs;
    double best_beta = 0.0;
    int best_hidden = 0;
    double best_val_mse = 0.0;
    double best_train_mse = 0.0;
};

/// Levenberg-Marquardt training with the pruning sweep: for each beta the
/// hidden layer is sized by prune_hidden, weights start uniform in
/// [-0.5, 0.5], and up to `epochs` damped steps are taken. A step is accepted
/// only when it lowers the training MSE (mu then shrinks tenfold); otherwise
/// mu grows tenfold and the solve is retried on the same normal equations.
/// The (beta, weights) pair with the lowest validation MSE wins.
std::pair<Mlp, TrainingReport> train_ann(const Dataset& dataset, const TrainerConfig& config);

/// Deterministic shuffled 80/20-style split; returns (train, validation)
/// row-index lists. A zero fraction yields validation == train.
std::pair<std::vector<int>, std::vector<int>> split_dataset(long long n, double validation_fraction,
                                                            std::uint64_t seed);

}  // namespace lidal
