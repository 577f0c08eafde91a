#include "lidal/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "lidal/linalg.hpp"

namespace lidal {

Mlp make_mlp(int n_in, int n_hidden, int n_out) {
    if (n_in <= 0 || n_hidden <= 0 || n_out <= 0) {
        throw std::invalid_argument("mlp: layer sizes must be positive");
    }
    Mlp mlp;
    mlp.n_in = n_in;
    mlp.n_hidden = n_hidden;
    mlp.n_out = n_out;
    mlp.w_in = Eigen::MatrixXd::Zero(n_in, n_hidden);
    mlp.bias_hidden = Eigen::VectorXd::Zero(n_hidden);
    mlp.w_out = Eigen::MatrixXd::Zero(n_hidden, n_out);
    mlp.bias_out = Eigen::VectorXd::Zero(n_out);
    return mlp;
}

Mlp random_mlp(int n_in, int n_hidden, int n_out, Rng& rng) {
    Mlp mlp = make_mlp(n_in, n_hidden, n_out);
    auto fill = [&rng](auto& block) {
        for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = rng.uniform(-0.5, 0.5);
    };
    fill(mlp.w_in);
    fill(mlp.bias_hidden);
    fill(mlp.w_out);
    fill(mlp.bias_out);
    return mlp;
}

Eigen::VectorXd ann_forward(const Mlp& mlp, const Eigen::VectorXd& input) {
    if (input.size() != mlp.n_in) throw std::invalid_argument("ann_forward: input size mismatch");
    Eigen::VectorXd hidden = (mlp.w_in.transpose() * input + mlp.bias_hidden).unaryExpr(
        [](double t) { return sigmoid(t); });
    return mlp.w_out.transpose() * hidden + mlp.bias_out;
}

Eigen::MatrixXd ann_forward_batch(const Mlp& mlp, const Eigen::MatrixXd& X) {
    if (X.cols() != mlp.n_in) throw std::invalid_argument("ann_forward_batch: input size mismatch");
    Eigen::MatrixXd hidden = ((X * mlp.w_in).rowwise() + mlp.bias_hidden.transpose())
                                 .unaryExpr([](double t) { return sigmoid(t); });
    return (hidden * mlp.w_out).rowwise() + mlp.bias_out.transpose();
}

AnnError ann_error(const Eigen::VectorXd& outputs, const Eigen::VectorXd& labels) {
    if (outputs.size() != labels.size()) throw std::invalid_argument("ann_error: size mismatch");
    AnnError err;
    err.residuals = labels - outputs;
    err.scalar = err.residuals.sum();
    return err;
}

int prune_hidden(int n_in, int y, double beta) {
    if (!(beta >= 1.0 && beta <= 2.0 * n_in)) {
        throw std::invalid_argument("prune_hidden: beta must lie in [1, 2*n_in]");
    }
    const int n_m = static_cast<int>(std::llround((n_in + y) / beta));
    return std::max(1, n_m);
}

double mlp_mse(const Mlp& mlp, const Eigen::MatrixXd& X, const Eigen::MatrixXd& labels) {
    const Eigen::MatrixXd outputs = ann_forward_batch(mlp, X);
    return (labels - outputs).squaredNorm() / static_cast<double>(labels.size());
}

Eigen::MatrixXd compute_jacobian(const Mlp& mlp, const Eigen::MatrixXd& X) {
    if (X.cols() != mlp.n_in) throw std::invalid_argument("compute_jacobian: input size mismatch");
    const int n = static_cast<int>(X.rows());
    const int m = mlp.n_hidden;
    const int n_out = mlp.n_out;
    const int n_in = mlp.n_in;
    const int p = mlp.parameter_count();
    const int off_bias_hidden = n_in * m;
    const int off_w_out = off_bias_hidden + m;
    const int off_bias_out = off_w_out + m * n_out;

    Eigen::MatrixXd J(static_cast<Eigen::Index>(n) * n_out, p);
    J.setZero();

    for (int s = 0; s < n; ++s) {
        const Eigen::VectorXd x = X.row(s).transpose();
        const Eigen::VectorXd pre = mlp.w_in.transpose() * x + mlp.bias_hidden;
        Eigen::VectorXd h(m), dh(m);
        for (int j = 0; j < m; ++j) {
            h(j) = sigmoid(pre(j));
            dh(j) = h(j) * (1.0 - h(j));
        }
        for (int k = 0; k < n_out; ++k) {
            const Eigen::Index row = static_cast<Eigen::Index>(s) * n_out + k;
            for (int j = 0; j < m; ++j) {
                const double chain = mlp.w_out(j, k) * dh(j);
                for (int i = 0; i < n_in; ++i) {
                    J(row, j * n_in + i) = -chain * x(i);
                }
                J(row, off_bias_hidden + j) = -chain;
                J(row, off_w_out + k * m + j) = -h(j);
            }
            J(row, off_bias_out + k) = -1.0;
        }
    }
    return J;
}

NormalEquations build_normal_equations(const Mlp& mlp, const Eigen::MatrixXd& X,
                                       const Eigen::MatrixXd& labels) {
    if (X.cols() != mlp.n_in || labels.cols() != mlp.n_out || X.rows() != labels.rows()) {
        throw std::invalid_argument("build_normal_equations: shape mismatch");
    }
    const int n = static_cast<int>(X.rows());
    const int n_in = mlp.n_in;
    const int m = mlp.n_hidden;
    const int n_out = mlp.n_out;
    const int p = mlp.parameter_count();
    const int off_bias_hidden = n_in * m;
    const int off_w_out = off_bias_hidden + m;
    const int off_bias_out = off_w_out + m * n_out;

    const Eigen::MatrixXd Xt = X.transpose();  // n_in x n
    Eigen::MatrixXd H = ((mlp.w_in.transpose() * Xt).colwise() + mlp.bias_hidden)
                            .unaryExpr([](double t) { return sigmoid(t); });  // m x n
    Eigen::MatrixXd Dm = H.array() * (1.0 - H.array());                        // m x n
    Eigen::MatrixXd R =
        labels.transpose() - ((mlp.w_out.transpose() * H).colwise() + mlp.bias_out);  // n_out x n
    const Eigen::MatrixXd Q = mlp.w_out * mlp.w_out.transpose();                       // m x m
    const Eigen::MatrixXd HH = H * H.transpose();                                      // m x m
    const Eigen::VectorXd h_sum = H.rowwise().sum();

    NormalEquations ne;
    ne.rows = static_cast<long long>(n) * n_out;
    ne.train_mse = R.squaredNorm() / static_cast<double>(ne.rows);
    ne.gram = Eigen::MatrixXd::Zero(p, p);
    ne.gradient = Eigen::VectorXd::Zero(p);

    Eigen::MatrixXd scratch(n_in, n);
    Eigen::VectorXd weights(n);

    // w_in x w_in and w_in x bias_hidden blocks, one hidden pair at a time:
    // gram[(i,j),(i',j')] = Q(j,j') * sum_s d_j d_j' x_i x_i'.
    for (int j = 0; j < m; ++j) {
        for (int j2 = 0; j2 <= j; ++j2) {
            weights = (Dm.row(j).array() * Dm.row(j2).array()).matrix().transpose() * Q(j, j2);
            scratch.noalias() = Xt * weights.asDiagonal();
            Eigen::MatrixXd block = scratch * Xt.transpose();
            ne.gram.block(j * n_in, j2 * n_in, n_in, n_in) = block;
            if (j2 != j) ne.gram.block(j2 * n_in, j * n_in, n_in, n_in) = block.transpose();

            const Eigen::VectorXd v = Xt * weights;  // = Q(j,j2) * Xt (d_j . d_j2)
            ne.gram.block(j * n_in, off_bias_hidden + j2, n_in, 1) = v;
            ne.gram.block(off_bias_hidden + j2, j * n_in, 1, n_in) = v.transpose();
            if (j2 != j) {
                ne.gram.block(j2 * n_in, off_bias_hidden + j, n_in, 1) = v;
                ne.gram.block(off_bias_hidden + j, j2 * n_in, 1, n_in) = v.transpose();
            }
            ne.gram(off_bias_hidden + j, off_bias_hidden + j2) =
                Q(j, j2) * Dm.row(j).dot(Dm.row(j2));
            if (j2 != j) {
                ne.gram(off_bias_hidden + j2, off_bias_hidden + j) =
                    ne.gram(off_bias_hidden + j, off_bias_hidden + j2);
            }
        }
    }

    // Cross terms against the output layer.
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd u = Xt * Dm.row(j).transpose();  // sum_s d_j x
        const double d_sum = Dm.row(j).sum();
        for (int j2 = 0; j2 < m; ++j2) {
            const Eigen::VectorXd v =
                Xt * (Dm.row(j).array() * H.row(j2).array()).matrix().transpose();
            const double dh_dot = Dm.row(j).dot(H.row(j2));
            for (int k = 0; k < n_out; ++k) {
                const double w = mlp.w_out(j, k);
                if (w == 0.0) continue;
                const int col = off_w_out + k * m + j2;
                ne.gram.block(j * n_in, col, n_in, 1) = w * v;
                ne.gram.block(col, j * n_in, 1, n_in) = (w * v).transpose();
                ne.gram(off_bias_hidden + j, col) = w * dh_dot;
                ne.gram(col, off_bias_hidden + j) = w * dh_dot;
            }
        }
        for (int k = 0; k < n_out; ++k) {
            const double w = mlp.w_out(j, k);
            const int col = off_bias_out + k;
            ne.gram.block(j * n_in, col, n_in, 1) = w * u;
            ne.gram.block(col, j * n_in, 1, n_in) = (w * u).transpose();
            ne.gram(off_bias_hidden + j, col) = w * d_sum;
            ne.gram(col, off_bias_hidden + j) = w * d_sum;
        }
    }

    // Output-layer blocks are block-diagonal across outputs.
    for (int k = 0; k < n_out; ++k) {
        ne.gram.block(off_w_out + k * m, off_w_out + k * m, m, m) = HH;
        ne.gram.block(off_w_out + k * m, off_bias_out + k, m, 1) = h_sum;
        ne.gram.block(off_bias_out + k, off_w_out + k * m, 1, m) = h_sum.transpose();
        ne.gram(off_bias_out + k, off_bias_out + k) = static_cast<double>(n);
    }

    // Gradient D^T r.
    Eigen::MatrixXd P = Dm.array() * (mlp.w_out * R).array();  // m x n
    Eigen::MatrixXd g_w_in = Xt * P.transpose();               // n_in x m
    Eigen::MatrixXd g_w_out = H * R.transpose();               // m x n_out
    for (int j = 0; j < m; ++j) {
        ne.gradient.segment(j * n_in, n_in) = g_w_in.col(j);
        ne.gradient(off_bias_hidden + j) = P.row(j).sum();
    }
    for (int k = 0; k < n_out; ++k) {
        ne.gradient.segment(off_w_out + k * m, m) = g_w_out.col(k);
        ne.gradient(off_bias_out + k) = R.row(k).sum();
    }
    return ne;
}

Mlp apply_update(const Mlp& mlp, const Eigen::VectorXd& delta) {
    if (delta.size() != mlp.parameter_count()) {
        throw std::invalid_argument("apply_update: parameter count mismatch");
    }
    Mlp out = mlp;
    const int n_in = mlp.n_in;
    const int m = mlp.n_hidden;
    const int n_out = mlp.n_out;
    const int off_bias_hidden = n_in * m;
    const int off_w_out = off_bias_hidden + m;
    const int off_bias_out = off_w_out + m * n_out;
    for (int j = 0; j < m; ++j) {
        out.w_in.col(j) += delta.segment(j * n_in, n_in);
        out.bias_hidden(j) += delta(off_bias_hidden + j);
    }
    for (int k = 0; k < n_out; ++k) {
        out.w_out.col(k) += delta.segment(off_w_out + k * m, m);
        out.bias_out(k) += delta(off_bias_out + k);
    }
    return out;
}

Eigen::VectorXd lm_update(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                          double mu) {
    const Eigen::MatrixXd gram = jacobian.transpose() * jacobian;
    const Eigen::VectorXd rhs = jacobian.transpose() * residuals;
    Eigen::VectorXd delta;
    if (!spd_solve(gram, mu, rhs, delta)) {
        throw std::runtime_error("lm_update: normal matrix is singular");
    }
    return -delta;
}

LmStepResult lm_step(const Mlp& mlp, const Eigen::MatrixXd& X, const Eigen::MatrixXd& labels,
                     double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("lm_step: mu must be positive");
    const NormalEquations ne = build_normal_equations(mlp, X, labels);
    double mu_try = mu;
    Eigen::VectorXd delta;
    for (int attempt = 0; attempt < 30; ++attempt) {
        if (spd_solve(ne.gram, mu_try, ne.gradient, delta)) {
            LmStepResult result;
            result.mlp = apply_update(mlp, delta);
            result.mse = mlp_mse(result.mlp, X, labels);
            result.mu_used = mu_try;
            return result;
        }
        mu_try *= 10.0;
    }
    throw std::runtime_error("lm_step: normal matrix is singular despite damping");
}

}  // namespace lidal
