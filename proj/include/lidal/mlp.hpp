#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "lidal/rng.hpp"

namespace lidal {

/// Single-hidden-layer perceptron: sigmoid hidden units, linear outputs.
///   hidden_j = S(sum_i w_in(i,j) x_i + bias_hidden_j),  S(t) = 1/(1+exp(-t))
///   y_k      = sum_j hidden_j w_out(j,k) + bias_out_k
struct Mlp {
    int n_in = 0;
    int n_hidden = 0;
    int n_out = 0;
    Eigen::MatrixXd w_in;         // n_in x n_hidden
    Eigen::VectorXd bias_hidden;  // n_hidden
    Eigen::MatrixXd w_out;        // n_hidden x n_out
    Eigen::VectorXd bias_out;     // n_out

    int parameter_count() const {
        return n_in * n_hidden + n_hidden + n_hidden * n_out + n_out;
    }
};

Mlp make_mlp(int n_in, int n_hidden, int n_out);

/// Initial weights and biases uniform in [-0.5, 0.5].
Mlp random_mlp(int n_in, int n_hidden, int n_out, Rng& rng);

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Eigen::VectorXd ann_forward(const Mlp& mlp, const Eigen::VectorXd& input);

/// Batch forward pass; rows of X are samples, rows of the result are outputs.
Eigen::MatrixXd ann_forward_batch(const Mlp& mlp, const Eigen::MatrixXd& X);

struct AnnError {
    double scalar = 0.0;           // sum of signed residuals
    Eigen::VectorXd residuals;     // labels - outputs
};

AnnError ann_error(const Eigen::VectorXd& outputs, const Eigen::VectorXd& labels);

/// Hidden-layer sizing by pruning factor: round((n_in + y) / beta), at least 1.
/// beta must lie in [1, 2 * n_in].
int prune_hidden(int n_in, int y, double beta);

/// Mean squared residual over all samples and outputs.
double mlp_mse(const Mlp& mlp, const Eigen::MatrixXd& X, const Eigen::MatrixXd& labels);

/// Jacobian of the residuals (labels - outputs) with respect to every weight
/// and bias. Row order: sample-major, output-minor (row = s * n_out + k).
/// Column order: w_in column-major (all inputs of hidden 0 first), then
/// bias_hidden, then w_out column-major (all hidden of output 0 first), then
/// bias_out. Entries are d(residual)/d(theta) = -d(y)/d(theta).
Eigen::MatrixXd compute_jacobian(const Mlp& mlp, const Eigen::MatrixXd& X);

/// Gauss-Newton normal equations of the residual system, built without
/// materializing the Jacobian: gram = D^T D and gradient = D^T r where
/// D = d(y)/d(theta) and r = labels - outputs. Exploits the two-layer
/// structure, so the cost is dominated by dense GEMMs instead of an
/// O(rows x params^2) accumulation.
struct NormalEquations {
    Eigen::MatrixXd gram;      // parameter_count x parameter_count
    Eigen::VectorXd gradient;  // parameter_count
    double train_mse = 0.0;
    long long rows = 0;
};

NormalEquations build_normal_equations(const Mlp& mlp, const Eigen::MatrixXd& X,
                                       const Eigen::MatrixXd& labels);

/// Applies a packed parameter update in the documented column order.
Mlp apply_update(const Mlp& mlp, const Eigen::VectorXd& delta);

/// Damped Gauss-Newton update on an explicit residual Jacobian:
/// delta = -(J^T J + mu I)^{-1} J^T e.
Eigen::VectorXd lm_update(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                          double mu);

struct LmStepResult {
    Mlp mlp;
    double mse = 0.0;      // training MSE at the updated weights
    double mu_used = 0.0;  // damping that produced the accepted solve
};

/// One Levenberg-Marquardt step: solves (J^T J + mu I) delta = -J^T e and
/// applies it jointly to all weights and biases. If the factorization fails
/// despite damping, mu is raised tenfold and the solve retried a bounded
/// number of times before throwing.
LmStepResult lm_step(const Mlp& mlp, const Eigen::MatrixXd& X, const Eigen::MatrixXd& labels,
                     double mu);

}  // namespace lidal
