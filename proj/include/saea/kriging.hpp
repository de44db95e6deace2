#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saea/pls.hpp"

namespace saea {

/// Anisotropic Gaussian kernel parameters. `theta` has one entry per kernel
/// component: one per input dimension for plain Kriging, one per PLS component for KPLS.
struct KernelSpec {
    Eigen::VectorXd theta;
    double nugget = 1e-10;
};

/// Per-component squared distances between every pair of training inputs.
///
/// Component k of the distance between rows a and b is sum_i S_ik (z_ai - z_bi)^2,
/// with S the identity for plain Kriging and the element-wise square of the PLS
/// rotation for KPLS. Caching these makes each correlation matrix a single
/// (pairs x q) matrix-vector product.
class CorrelationGeometry {
public:
    static CorrelationGeometry anisotropic(const Eigen::MatrixXd& z);
    static CorrelationGeometry weighted(const Eigen::MatrixXd& z, const Eigen::MatrixXd& squared_weights);

    std::size_t samples() const { return static_cast<std::size_t>(z_.rows()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(z_.cols()); }
    std::size_t components() const { return static_cast<std::size_t>(pair_distances_.cols()); }
    bool is_weighted() const { return squared_weights_.has_value(); }

    /// m x m correlation matrix (unit diagonal, no nugget).
    Eigen::MatrixXd correlation(const Eigen::VectorXd& theta) const;
    /// Same, with the strictly upper triangle left at zero.
    Eigen::MatrixXd correlation_lower(const Eigen::VectorXd& theta) const;
    /// Writes the lower triangle and diagonal into `out`, reusing its storage.
    void correlation_lower(const Eigen::VectorXd& theta, Eigen::MatrixXd& out) const;
    /// m x q component distances between a query point and every training input.
    Eigen::MatrixXd cross_distances(const Eigen::VectorXd& x) const;
    /// Mean component distance over all pairs, used to seed the optimiser.
    Eigen::VectorXd mean_pair_distance() const;

private:
    Eigen::MatrixXd z_;
    std::optional<Eigen::MatrixXd> squared_weights_;
    Eigen::MatrixXd pair_distances_;  // pairs x q, pair (a, b) with a < b in row-major order
};

/// R_ab = prod_k exp(-theta_k (z_ak - z_bk)^2).
Eigen::MatrixXd build_correlation(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta);

struct LikelihoodTerms {
    double value = 0.0;   // -(m/2) ln sigma2 - sum ln C_ii
    double beta = 0.0;
    double sigma2 = 0.0;
    double nugget = 0.0;  // nugget actually used after escalation
};

/// Concentrated log-likelihood of the constant-trend model. The nugget starts at
/// `nugget` and is raised by x10 up to `max_nugget` while the Cholesky factorisation
/// fails; IndefiniteMatrixError is thrown if it still fails.
LikelihoodTerms concentrated_log_likelihood(const CorrelationGeometry& geometry, const Eigen::VectorXd& theta,
                                            const Eigen::VectorXd& y, double nugget = 1e-10, double max_nugget = 1e-6);

struct FitSpec {
    double log10_theta_min = -6.0;
    double log10_theta_max = 2.0;
    std::size_t starts = 5;
    /// Per-start likelihood evaluation cap is evaluations_per_dim * q.
    std::size_t evaluations_per_dim = 200;
    std::optional<double> budget_seconds;
    double nugget = 1e-10;
    double max_nugget = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitDiagnostics {
    std::size_t optimizer_dimension = 0;
    std::size_t evaluations = 0;
    std::vector<std::size_t> evaluations_per_start;
    std::vector<double> best_per_start;
    std::size_t best_start = 0;
    double log_likelihood = 0.0;
    double seconds = 0.0;
};

struct Standardizer {
    Eigen::VectorXd x_mean;
    Eigen::VectorXd x_scale;  // 1 for constant columns
    double y_mean = 0.0;
    double y_scale = 1.0;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Fitted ordinary Kriging model; KPLS models carry a PLS projector.
/// Immutable after fitting and safe for concurrent predict calls.
struct KrigingModel {
    Eigen::MatrixXd x;  // normalised training inputs, m x d
    Eigen::VectorXd y;  // normalised targets
    KernelSpec kernel;
    double beta_hat = 0.0;    // normalised units
    double sigma2_hat = 0.0;  // normalised units
    Eigen::MatrixXd chol_lower;
    Eigen::VectorXd alpha;      // (R + nI)^-1 (y - 1 beta)
    Eigen::VectorXd chol_one;   // C^-1 1
    double one_rinv_one = 0.0;  // 1^T (R + nI)^-1 1
    /// Long double copies of chol_lower and chol_one for the predictive variance. Empty if the
    /// extended factorisation failed; predict then falls back to the double ones.
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> chol_lower_ext;
    Eigen::Matrix<long double, Eigen::Dynamic, 1> chol_one_ext;
    Standardizer norm;
    std::optional<PlsRotation> projector;
    FitDiagnostics diagnostics;

    std::size_t sample_size() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(x.cols()); }
    std::size_t hyperparameter_count() const { return static_cast<std::size_t>(kernel.theta.size()); }
    bool is_kpls() const { return projector.has_value(); }

    /// Mean and variance on the original target scale.
    Prediction predict(const Eigen::VectorXd& x_raw) const;
    /// One prediction per row of x_raw.
    std::vector<Prediction> predict_rows(const Eigen::MatrixXd& x_raw) const;
    /// Trend and process variance on the original target scale.
    double beta() const { return norm.y_mean + norm.y_scale * beta_hat; }
    double sigma2() const { return norm.y_scale * norm.y_scale * sigma2_hat; }

    CorrelationGeometry geometry() const;
};

/// Maximum-likelihood ordinary Kriging with one theta per input dimension.
/// Throws FitTimeout when spec.budget_seconds is exhausted.
KrigingModel fit_kriging(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitSpec& spec = {});

/// Condition a model on fixed hyperparameters without optimisation.
KrigingModel condition_kriging(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                               double nugget = 1e-10, double max_nugget = 1e-6);

namespace detail {

Standardizer standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::MatrixXd apply_x(const Standardizer& s, const Eigen::MatrixXd& x);
Eigen::VectorXd apply_y(const Standardizer& s, const Eigen::VectorXd& y);

/// Multistart likelihood maximisation over log10 theta on a prepared geometry, then conditioning.
KrigingModel fit_on_geometry(Eigen::MatrixXd xn, Eigen::VectorXd yn, const CorrelationGeometry& geometry,
                             Standardizer norm, std::optional<PlsRotation> projector, const FitSpec& spec,
                             double seconds_already_used);

KrigingModel condition_on_geometry(Eigen::MatrixXd xn, Eigen::VectorXd yn, const CorrelationGeometry& geometry,
                                   Standardizer norm, std::optional<PlsRotation> projector,
                                   const Eigen::VectorXd& theta, double nugget, double max_nugget);

}  // namespace detail

/// Version-tagged JSON container. KPLS models include their projector.
void save_model(const KrigingModel& model, const std::filesystem::path& path);
std::string model_to_json(const KrigingModel& model);
KrigingModel load_model(const std::filesystem::path& path);
KrigingModel model_from_json(const std::string& text);

}  // namespace saea
