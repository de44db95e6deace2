#include "saea/pls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "saea/error.hpp"

namespace saea {

PlsRotation fit_pls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t h) {
    const auto m = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    if (static_cast<std::size_t>(y.size()) != m) throw DimensionError("fit_pls: X rows and y length differ");
    if (m < 2) throw std::invalid_argument("fit_pls: need at least 2 samples");
    if (h < 1 || h > std::min(d, m - 1))
        throw std::invalid_argument("fit_pls: h=" + std::to_string(h) + " outside [1, min(d, m-1)]");
    if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("fit_pls: non-finite input");

    const auto hh = static_cast<Eigen::Index>(h);
    PlsRotation out;
    out.weights.resize(x.cols(), hh);
    out.loadings.resize(x.cols(), hh);
    out.scores.resize(x.rows(), hh);
    out.y_loadings.resize(hh);

    // Relative floor for "X^T y vanished": round-off level of the first cross product.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x.norm() * y.norm());

    Eigen::MatrixXd xr = x;
    Eigen::VectorXd yr = y;
    for (Eigen::Index l = 0; l < hh; ++l) {
        Eigen::VectorXd w = xr.transpose() * yr;
        const double norm = w.norm();
        if (!(norm > floor)) throw DegenerateComponentError(static_cast<std::size_t>(l + 1));
        w /= norm;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            if (w(i) != 0.0) {
                if (w(i) < 0.0) w = -w;
                break;
            }
        }
        const Eigen::VectorXd t = xr * w;
        const double tt = t.squaredNorm();
        if (!(tt > 0.0)) throw DegenerateComponentError(static_cast<std::size_t>(l + 1));
        const Eigen::VectorXd p = xr.transpose() * t / tt;
        const double c = t.dot(yr) / tt;
        xr.noalias() -= t * p.transpose();
        yr -= c * t;
        out.weights.col(l) = w;
        out.loadings.col(l) = p;
        out.scores.col(l) = t;
        out.y_loadings(l) = c;
    }
    // W* = W (P^T W)^-1, i.e. solve (P^T W)^T W*^T = W^T.
    const Eigen::MatrixXd ptw = out.loadings.transpose() * out.weights;
    out.rotation = ptw.transpose().partialPivLu().solve(out.weights.transpose()).transpose();
    if (!out.rotation.allFinite()) throw DegenerateComponentError(h);
    return out;
}

}  // namespace saea
