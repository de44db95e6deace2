#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "saea/kriging.hpp"
#include "saea/pls.hpp"

namespace saea {

/// exp(-sum_l theta_l sum_i W*_il^2 (x_i - x'_i)^2).
double kpls_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime, const Eigen::MatrixXd& rotation,
                   const Eigen::VectorXd& theta);

/// KPLS fit: PLS on the normalised data, then the Kriging likelihood search over h thetas only.
/// Throws DegenerateComponentError from the PLS step and FitTimeout as fit_kriging does.
KrigingModel fit_kpls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t h, const FitSpec& spec = {});

/// Same as fit_kpls but with a caller-supplied rotation (d x h) in place of the PLS one.
KrigingModel fit_kpls_with_rotation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& rotation,
                                    const FitSpec& spec = {});

}  // namespace saea
