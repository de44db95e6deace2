#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace saea {

/// Single-response PLS fitted by NIPALS.
///
/// `weights` holds the per-deflation directions w(l) (unit norm, first nonzero entry
/// positive). `rotation` is W (P^T W)^-1, which maps undeflated inputs onto the
/// scores: scores = X * rotation.
struct PlsRotation {
    Eigen::MatrixXd weights;       // d x h
    Eigen::MatrixXd loadings;      // d x h, p(l)
    Eigen::MatrixXd rotation;      // d x h, W*
    Eigen::MatrixXd scores;        // m x h, t(l)
    Eigen::VectorXd y_loadings;    // h, t(l)^T y(l-1) / t(l)^T t(l)

    std::size_t components() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(weights.rows()); }
    /// Regression coefficients on the undeflated inputs: rotation * y_loadings.
    Eigen::VectorXd coefficients() const { return rotation * y_loadings; }
};

/// X (m x d) and y must already be centred. Requires m >= 2 and 1 <= h <= min(d, m - 1).
/// Throws DegenerateComponentError when X(l-1)^T y(l-1) vanishes.
PlsRotation fit_pls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t h);

}  // namespace saea
