#include "saea/kpls.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

#include "saea/error.hpp"

namespace saea {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_training_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() < 2) throw std::invalid_argument("fit_kpls: need at least 2 samples");
    if (x.rows() != y.size()) throw DimensionError("fit_kpls: X rows and y length differ");
    if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("fit_kpls: non-finite input");
}

KrigingModel fit_projected(Eigen::MatrixXd xn, Eigen::VectorXd yn, Standardizer norm, PlsRotation projector,
                           const FitSpec& spec, Clock::time_point t0) {
    const auto geometry = CorrelationGeometry::weighted(xn, projector.rotation.array().square().matrix());
    return detail::fit_on_geometry(std::move(xn), std::move(yn), geometry, std::move(norm), std::move(projector), spec,
                                   seconds_since(t0));
}

}  // namespace

double kpls_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime, const Eigen::MatrixXd& rotation,
                   const Eigen::VectorXd& theta) {
    if (x.size() != x_prime.size() || rotation.rows() != x.size())
        throw DimensionError("kpls_kernel: input length must equal rotation rows");
    if (rotation.cols() != theta.size()) throw DimensionError("kpls_kernel: theta length must equal rotation columns");
    const Eigen::VectorXd diff2 = (x - x_prime).array().square().matrix();
    const Eigen::VectorXd per_component = rotation.array().square().matrix().transpose() * diff2;
    return std::exp(-theta.dot(per_component));
}

KrigingModel fit_kpls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t h, const FitSpec& spec) {
    const auto t0 = Clock::now();
    check_training_data(x, y);
    spec.validate();
    auto norm = detail::standardize(x, y);
    Eigen::MatrixXd xn = detail::apply_x(norm, x);
    Eigen::VectorXd yn = detail::apply_y(norm, y);
    auto projector = fit_pls(xn, yn, h);
    projector.scores.resize(0, 0);
    return fit_projected(std::move(xn), std::move(yn), std::move(norm), std::move(projector), spec, t0);
}

KrigingModel fit_kpls_with_rotation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& rotation,
                                    const FitSpec& spec) {
    const auto t0 = Clock::now();
    check_training_data(x, y);
    if (rotation.rows() != x.cols() || rotation.cols() < 1)
        throw DimensionError("fit_kpls_with_rotation: rotation must be d x h with h >= 1");
    spec.validate();
    auto norm = detail::standardize(x, y);
    Eigen::MatrixXd xn = detail::apply_x(norm, x);
    Eigen::VectorXd yn = detail::apply_y(norm, y);
    PlsRotation projector;
    projector.weights = rotation;
    projector.loadings = rotation;
    projector.rotation = rotation;
    projector.y_loadings = Eigen::VectorXd::Zero(rotation.cols());
    return fit_projected(std::move(xn), std::move(yn), std::move(norm), std::move(projector), spec, t0);
}

}  // namespace saea
