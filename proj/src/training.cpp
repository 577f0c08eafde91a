#include "lidal/training.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lidal/linalg.hpp"

namespace lidal {

std::pair<std::vector<int>, std::vector<int>> split_dataset(long long n, double validation_fraction,
                                                            std::uint64_t seed) {
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("split_dataset: validation fraction must lie in [0, 1)");
    }
    std::vector<int> indices(static_cast<std::size_t>(n));
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(Rng::mix(seed, 0x5117ULL));
    for (std::size_t i = indices.size(); i > 1; --i) {
        std::swap(indices[i - 1], indices[rng.uniform_index(i)]);
    }
    const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * n));
    std::vector<int> train(indices.begin(), indices.end() - n_val);
    std::vector<int> val(indices.end() - n_val, indices.end());
    if (val.empty()) val = train;
    return {std::move(train), std::move(val)};
}

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& src, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = src.row(rows[r]);
    return out;
}

}  // namespace

std::pair<Mlp, TrainingReport> train_ann(const Dataset& dataset, const TrainerConfig& config) {
    if (dataset.size() < 2) throw std::invalid_argument("train_ann: dataset too small");
    if (config.epochs <= 0) throw std::invalid_argument("train_ann: epochs must be positive");
    if (!(config.mu_r > 0.0)) throw std::invalid_argument("train_ann: mu_r must be positive");
    if (config.beta_range.empty()) throw std::invalid_argument("train_ann: beta_range is empty");

    const int n_in = static_cast<int>(dataset.inputs.cols());
    const int n_out = static_cast<int>(dataset.labels.cols());

    const auto [train_rows, val_rows] =
        split_dataset(dataset.size(), config.validation_fraction, config.seed);
    const Eigen::MatrixXd train_x = gather_rows(dataset.inputs, train_rows);
    const Eigen::MatrixXd train_y = gather_rows(dataset.labels, train_rows);
    const Eigen::MatrixXd val_x = gather_rows(dataset.inputs, val_rows);
    const Eigen::MatrixXd val_y = gather_rows(dataset.labels, val_rows);

    TrainingReport report;
    report.best_val_mse = std::numeric_limits<double>::infinity();
    Mlp best;

    Rng init_rng(Rng::mix(config.seed, 0x1417ULL));
    for (std::size_t bi = 0; bi < config.beta_range.size(); ++bi) {
        const double beta = config.beta_range[bi];
        const int n_hidden = prune_hidden(n_in, n_out, beta);
        Rng candidate_rng = init_rng.stream(bi);
        Mlp mlp = random_mlp(n_in, n_hidden, n_out, candidate_rng);

        double mu = config.mu_r;
        bool aborted = false;
        for (int epoch = 1; epoch <= config.epochs && !aborted; ++epoch) {
            const NormalEquations ne = build_normal_equations(mlp, train_x, train_y);
            if (!std::isfinite(ne.train_mse)) {
                aborted = true;
                break;
            }

            bool accepted = false;
            Eigen::VectorXd delta;
            while (mu <= config.mu_max) {
                if (spd_solve(ne.gram, mu, ne.gradient, delta)) {
                    const Mlp candidate = apply_update(mlp, delta);
                    const double candidate_mse = mlp_mse(candidate, train_x, train_y);
                    if (std::isfinite(candidate_mse) && candidate_mse < ne.train_mse) {
                        mlp = candidate;
                        mu = std::max(mu / 10.0, config.mu_min);
                        accepted = true;

                        EpochRecord record;
                        record.beta = beta;
                        record.epoch = epoch;
                        record.train_mse = candidate_mse;
                        record.val_mse = mlp_mse(mlp, val_x, val_y);
                        record.mu = mu;
                        report.epochs.push_back(record);
                        if (config.verbose) {
                            std::fprintf(stderr,
                                         "train_ann beta=%.4g epoch=%d train=%.6e val=%.6e mu=%.1e\n",
                                         beta, epoch, record.train_mse, record.val_mse, record.mu);
                        }
                        break;
                    }
                }
                mu *= 10.0;
            }
            if (!accepted) break;  // damping exhausted: converged or stuck
            if (config.target_train_mse > 0.0 &&
                report.epochs.back().train_mse <= config.target_train_mse) {
                break;
            }
        }
        if (aborted) continue;

        const double val_mse = mlp_mse(mlp, val_x, val_y);
        if (std::isfinite(val_mse) && val_mse < report.best_val_mse) {
            report.best_val_mse = val_mse;
            report.best_train_mse = mlp_mse(mlp, train_x, train_y);
            report.best_beta = beta;
            report.best_hidden = n_hidden;
            best = mlp;
        }
    }

    if (best.n_in == 0) throw std::runtime_error("train_ann: every beta candidate diverged");
    return {best, report};
}

}  // namespace lidal
