#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace saea {

struct NelderMeadOptions {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::size_t max_evaluations = 1000;
    /// Initial simplex edge as a fraction of each coordinate's range.
    double initial_step = 0.1;
    /// Stop when the simplex's function spread and coordinate extent both fall below these.
    double f_tolerance = 1e-10;
    double x_tolerance = 1e-7;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Box-constrained Nelder-Mead minimisation; trial points are projected onto the box.
/// The objective may return +inf for infeasible points. Exceptions thrown by the
/// objective propagate unchanged.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective, Eigen::VectorXd start,
                             const NelderMeadOptions& options);

}  // namespace saea
