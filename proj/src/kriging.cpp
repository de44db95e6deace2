#include "saea/kriging.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "saea/error.hpp"
#include "saea/nelder_mead.hpp"

namespace saea {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Cholesky of R + nugget*I, escalating the nugget x10 until it succeeds or passes max_nugget.
// The factor overwrites the lower triangle of the correlation buffer.
struct Factor {
    Eigen::MatrixXd lower;
    double nugget = 0.0;
    auto matrixL() const { return lower.triangularView<Eigen::Lower>(); }
};

void factorize_into(Factor& f, const CorrelationGeometry& geometry, const Eigen::VectorXd& theta, double nugget,
                    double max_nugget) {
    const double limit = max_nugget * (1.0 + 1e-9);
    for (double n = nugget; n <= limit; n *= 10.0) {
        geometry.correlation_lower(theta, f.lower);
        f.lower.diagonal().array() += n;
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(f.lower);
        if (llt.info() == Eigen::Success) {
            f.nugget = n;
            return;
        }
    }
    throw IndefiniteMatrixError("correlation matrix not positive definite with nugget up to " + std::to_string(max_nugget));
}

Factor factorize(const CorrelationGeometry& geometry, const Eigen::VectorXd& theta, double nugget, double max_nugget) {
    Factor f;
    factorize_into(f, geometry, theta, nugget, max_nugget);
    return f;
}

struct TrendTerms {
    Eigen::VectorXd chol_one;  // C^-1 1
    Eigen::VectorXd residual;  // C^-1 (y - 1 beta)
    double beta = 0.0;
    double sigma2 = 0.0;
    double log_det_half = 0.0;  // sum ln C_ii
};

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Correlations between normalised point xn and every training input, in long double.
LongVector long_correlations(const KrigingModel& model, const Eigen::VectorXd& xn) {
    const Eigen::Index m = model.x.rows(), d = model.x.cols(), q = model.kernel.theta.size();
    LongMatrix weights;
    if (model.projector) weights = model.projector->rotation.cast<long double>().array().square().matrix();
    LongVector r(m);
    LongVector diff2(d);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const long double delta = static_cast<long double>(model.x(i, j)) - static_cast<long double>(xn(j));
            diff2(j) = delta * delta;
        }
        long double s = 0.0L;
        if (model.projector) {
            const LongVector components = weights.transpose() * diff2;
            for (Eigen::Index k = 0; k < q; ++k) s += static_cast<long double>(model.kernel.theta(k)) * components(k);
        } else {
            for (Eigen::Index k = 0; k < q; ++k) s += static_cast<long double>(model.kernel.theta(k)) * diff2(k);
        }
        r(i) = std::exp(-s);
    }
    return r;
}

void extend_factor(KrigingModel& model) {
    const Eigen::Index m = model.x.rows();
    LongMatrix r(m, m);
    for (Eigen::Index i = 0; i < m; ++i) r.col(i) = long_correlations(model, model.x.row(i).transpose());
    r = (0.5L * (r + r.transpose())).eval();
    r.diagonal().setConstant(1.0L + static_cast<long double>(model.kernel.nugget));
    Eigen::LLT<LongMatrix> llt(r);
    if (llt.info() != Eigen::Success) return;
    model.chol_lower_ext = llt.matrixL();
    model.chol_one_ext = llt.matrixL().solve(LongVector::Ones(m));
}

TrendTerms trend_terms(const Factor& f, const Eigen::VectorXd& y) {
    const auto m = y.size();
    const auto lower = f.matrixL();
    TrendTerms t;
    t.chol_one = lower.solve(Eigen::VectorXd::Ones(m));
    const Eigen::VectorXd chol_y = lower.solve(y);
    t.beta = t.chol_one.dot(chol_y) / t.chol_one.squaredNorm();
    t.residual = chol_y - t.beta * t.chol_one;
    // A constant response leaves sigma2 at zero; the nugget bounds it away from ln(0).
    t.sigma2 = std::max(t.residual.squaredNorm() / static_cast<double>(m), f.nugget);
    t.log_det_half = f.lower.diagonal().array().log().sum();
    return t;
}

struct Timeout {};

}  // namespace

CorrelationGeometry CorrelationGeometry::anisotropic(const Eigen::MatrixXd& z) {
    if (!z.allFinite()) throw std::invalid_argument("correlation: non-finite input");
    CorrelationGeometry g;
    g.z_ = z;
    const Eigen::Index m = z.rows();
    const Eigen::Index pairs = m * (m - 1) / 2;
    g.pair_distances_.resize(pairs, z.cols());
    Eigen::Index p = 0;
    for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index count = m - a - 1;
        if (count == 0) break;
        g.pair_distances_.middleRows(p, count) =
            (z.bottomRows(count).rowwise() - z.row(a)).array().square().matrix();
        p += count;
    }
    return g;
}

CorrelationGeometry CorrelationGeometry::weighted(const Eigen::MatrixXd& z, const Eigen::MatrixXd& squared_weights) {
    if (squared_weights.rows() != z.cols()) throw DimensionError("correlation: weight rows must equal input dimension");
    if (!z.allFinite() || !squared_weights.allFinite()) throw std::invalid_argument("correlation: non-finite input");
    CorrelationGeometry g;
    g.z_ = z;
    g.squared_weights_ = squared_weights;
    const Eigen::Index m = z.rows();
    const Eigen::Index pairs = m * (m - 1) / 2;
    g.pair_distances_.resize(pairs, squared_weights.cols());
    Eigen::Index p = 0;
    for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index count = m - a - 1;
        if (count == 0) break;
        const Eigen::MatrixXd diff2 = (z.bottomRows(count).rowwise() - z.row(a)).array().square().matrix();
        g.pair_distances_.middleRows(p, count).noalias() = diff2 * squared_weights;
        p += count;
    }
    return g;
}

Eigen::MatrixXd CorrelationGeometry::correlation(const Eigen::VectorXd& theta) const {
    if (static_cast<std::size_t>(theta.size()) != components())
        throw DimensionError("correlation: theta has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(components()));
    Eigen::MatrixXd out = correlation_lower(theta);
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
}

Eigen::MatrixXd CorrelationGeometry::correlation_lower(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd out;
    correlation_lower(theta, out);
    return out;
}

void CorrelationGeometry::correlation_lower(const Eigen::VectorXd& theta, Eigen::MatrixXd& out) const {
    if (static_cast<std::size_t>(theta.size()) != components())
        throw DimensionError("correlation: theta has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(components()));
    const Eigen::Index m = z_.rows();
    thread_local Eigen::VectorXd r;
    r.noalias() = pair_distances_ * theta;
    r = (-r.array()).exp();
    out.resize(m, m);
    out.triangularView<Eigen::StrictlyUpper>().setZero();
    // Pair order (a, b), a < b, runs down column a of the lower triangle.
    Eigen::Index p = 0;
    for (Eigen::Index a = 0; a < m; ++a) {
        out(a, a) = 1.0;
        const Eigen::Index count = m - a - 1;
        out.col(a).tail(count) = r.segment(p, count);
        p += count;
    }
}

Eigen::MatrixXd CorrelationGeometry::cross_distances(const Eigen::VectorXd& x) const {
    if (x.size() != z_.cols()) throw DimensionError("correlation: query has wrong dimension");
    const Eigen::MatrixXd diff2 = (z_.rowwise() - x.transpose()).array().square().matrix();
    if (squared_weights_) return diff2 * *squared_weights_;
    return diff2;
}

Eigen::VectorXd CorrelationGeometry::mean_pair_distance() const {
    if (pair_distances_.rows() == 0) return Eigen::VectorXd::Ones(pair_distances_.cols());
    return pair_distances_.colwise().mean().transpose();
}

Eigen::MatrixXd build_correlation(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta) {
    if (theta.size() != z.cols()) throw DimensionError("build_correlation: theta length must equal the input dimension");
    return CorrelationGeometry::anisotropic(z).correlation(theta);
}

LikelihoodTerms concentrated_log_likelihood(const CorrelationGeometry& geometry, const Eigen::VectorXd& theta,
                                            const Eigen::VectorXd& y, double nugget, double max_nugget) {
    if (static_cast<std::size_t>(y.size()) != geometry.samples()) throw DimensionError("likelihood: y length mismatch");
    // The optimiser calls this in a loop; one buffer per thread avoids an m x m allocation each time.
    thread_local Factor f;
    factorize_into(f, geometry, theta, nugget, max_nugget);
    const auto t = trend_terms(f, y);
    const double m = static_cast<double>(y.size());
    return {-0.5 * m * std::log(t.sigma2) - t.log_det_half, t.beta, t.sigma2, f.nugget};
}

void FitSpec::validate() const {
    if (!(log10_theta_min < log10_theta_max)) throw std::invalid_argument("FitSpec: empty theta bounds");
    if (starts < 1) throw std::invalid_argument("FitSpec: need at least one start");
    if (evaluations_per_dim < 1) throw std::invalid_argument("FitSpec: evaluations_per_dim must be positive");
    if (!(nugget > 0.0) || max_nugget < nugget) throw std::invalid_argument("FitSpec: bad nugget range");
    if (budget_seconds && !(*budget_seconds > 0.0)) throw std::invalid_argument("FitSpec: budget must be positive");
}

namespace detail {

Standardizer standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const double denom = static_cast<double>(std::max<Eigen::Index>(x.rows() - 1, 1));
    Standardizer s;
    s.x_mean = x.colwise().mean().transpose();
    s.x_scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double sd = std::sqrt((x.col(j).array() - s.x_mean(j)).square().sum() / denom);
        s.x_scale(j) = sd > 1e-12 * std::max(1.0, std::abs(s.x_mean(j))) ? sd : 1.0;
    }
    s.y_mean = y.mean();
    const double sd = std::sqrt((y.array() - s.y_mean).square().sum() / denom);
    s.y_scale = sd > 1e-12 * std::max(1.0, std::abs(s.y_mean)) ? sd : 1.0;
    return s;
}

Eigen::MatrixXd apply_x(const Standardizer& s, const Eigen::MatrixXd& x) {
    return ((x.rowwise() - s.x_mean.transpose()).array().rowwise() / s.x_scale.transpose().array()).matrix();
}

Eigen::VectorXd apply_y(const Standardizer& s, const Eigen::VectorXd& y) {
    return ((y.array() - s.y_mean) / s.y_scale).matrix();
}

KrigingModel condition_on_geometry(Eigen::MatrixXd xn, Eigen::VectorXd yn, const CorrelationGeometry& geometry,
                                   Standardizer norm, std::optional<PlsRotation> projector,
                                   const Eigen::VectorXd& theta, double nugget, double max_nugget) {
    const auto f = factorize(geometry, theta, nugget, max_nugget);
    const auto t = trend_terms(f, yn);
    KrigingModel model;
    model.x = std::move(xn);
    model.y = std::move(yn);
    model.kernel = {theta, f.nugget};
    model.beta_hat = t.beta;
    model.sigma2_hat = t.sigma2;
    model.chol_lower = f.matrixL();
    model.chol_one = t.chol_one;
    model.one_rinv_one = t.chol_one.squaredNorm();
    model.alpha = f.lower.transpose().triangularView<Eigen::Upper>().solve(t.residual);
    model.norm = std::move(norm);
    model.projector = std::move(projector);
    extend_factor(model);
    return model;
}

KrigingModel fit_on_geometry(Eigen::MatrixXd xn, Eigen::VectorXd yn, const CorrelationGeometry& geometry,
                             Standardizer norm, std::optional<PlsRotation> projector, const FitSpec& spec,
                             double seconds_already_used) {
    spec.validate();
    const auto t0 = Clock::now() - std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds_already_used));
    const auto q = static_cast<Eigen::Index>(geometry.components());
    const Eigen::VectorXd lower = Eigen::VectorXd::Constant(q, spec.log10_theta_min);
    const Eigen::VectorXd upper = Eigen::VectorXd::Constant(q, spec.log10_theta_max);

    FitDiagnostics diag;
    diag.optimizer_dimension = static_cast<std::size_t>(q);
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_log_theta = lower;
    bool any_finite = false;

    auto objective = [&](const Eigen::VectorXd& log_theta) {
        double value = std::numeric_limits<double>::infinity();
        try {
            const Eigen::VectorXd theta = log_theta.unaryExpr([](double v) { return std::pow(10.0, v); });
            value = -concentrated_log_likelihood(geometry, theta, yn, spec.nugget, spec.max_nugget).value;
        } catch (const IndefiniteMatrixError&) {
        }
        ++diag.evaluations;
        if (value < best_value) {
            best_value = value;
            best_log_theta = log_theta;
            any_finite = true;
        }
        if (spec.budget_seconds && seconds_since(t0) > *spec.budget_seconds) throw Timeout{};
        return value;
    };

    // Start 0 scales theta so each component contributes O(1) to the mean pair distance.
    std::vector<Eigen::VectorXd> starts;
    const Eigen::VectorXd mean_dist = geometry.mean_pair_distance();
    Eigen::VectorXd first(q);
    for (Eigen::Index k = 0; k < q; ++k) {
        const double dk = mean_dist(k) > 0.0 ? mean_dist(k) : 1.0;
        first(k) = std::clamp(std::log10(1.0 / (static_cast<double>(q) * dk)), spec.log10_theta_min, spec.log10_theta_max);
    }
    starts.push_back(first);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uniform(spec.log10_theta_min, spec.log10_theta_max);
    for (std::size_t s = 1; s < spec.starts; ++s) {
        Eigen::VectorXd p(q);
        for (Eigen::Index k = 0; k < q; ++k) p(k) = uniform(rng);
        starts.push_back(p);
    }

    NelderMeadOptions options;
    options.lower = lower;
    options.upper = upper;
    options.max_evaluations = spec.evaluations_per_dim * static_cast<std::size_t>(q);
    double overall = std::numeric_limits<double>::infinity();
    Eigen::VectorXd overall_x = first;
    try {
        for (std::size_t s = 0; s < starts.size(); ++s) {
            const std::size_t before = diag.evaluations;
            auto result = nelder_mead(objective, starts[s], options);
            diag.evaluations_per_start.push_back(diag.evaluations - before);
            diag.best_per_start.push_back(-result.value);
            if (result.value < overall) {
                overall = result.value;
                overall_x = result.x;
                diag.best_start = s;
            }
        }
    } catch (const Timeout&) {
        throw FitTimeout(seconds_since(t0), *spec.budget_seconds, any_finite ? -best_value : -std::numeric_limits<double>::infinity(),
                         diag.evaluations, std::vector<double>(best_log_theta.data(), best_log_theta.data() + q));
    }
    if (!std::isfinite(overall))
        throw IndefiniteMatrixError("no hyperparameter in the search box gave a positive definite correlation matrix");

    const Eigen::VectorXd theta = overall_x.unaryExpr([](double v) { return std::pow(10.0, v); });
    auto model = condition_on_geometry(std::move(xn), std::move(yn), geometry, std::move(norm), std::move(projector), theta,
                                       spec.nugget, spec.max_nugget);
    diag.log_likelihood = -overall;
    diag.seconds = seconds_since(t0);
    model.diagnostics = std::move(diag);
    return model;
}

}  // namespace detail

KrigingModel fit_kriging(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitSpec& spec) {
    const auto t0 = Clock::now();
    if (x.rows() < 2) throw std::invalid_argument("fit_kriging: need at least 2 samples");
    if (x.rows() != y.size()) throw DimensionError("fit_kriging: X rows and y length differ");
    if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("fit_kriging: non-finite input");
    spec.validate();
    auto norm = detail::standardize(x, y);
    Eigen::MatrixXd xn = detail::apply_x(norm, x);
    Eigen::VectorXd yn = detail::apply_y(norm, y);
    const auto geometry = CorrelationGeometry::anisotropic(xn);
    return detail::fit_on_geometry(std::move(xn), std::move(yn), geometry, std::move(norm), std::nullopt, spec,
                                   seconds_since(t0));
}

KrigingModel condition_kriging(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                               double nugget, double max_nugget) {
    if (x.rows() < 2) throw std::invalid_argument("condition_kriging: need at least 2 samples");
    if (x.rows() != y.size()) throw DimensionError("condition_kriging: X rows and y length differ");
    auto norm = detail::standardize(x, y);
    Eigen::MatrixXd xn = detail::apply_x(norm, x);
    Eigen::VectorXd yn = detail::apply_y(norm, y);
    const auto geometry = CorrelationGeometry::anisotropic(xn);
    return detail::condition_on_geometry(std::move(xn), std::move(yn), geometry, std::move(norm), std::nullopt, theta,
                                         nugget, max_nugget);
}

CorrelationGeometry KrigingModel::geometry() const {
    if (projector) return CorrelationGeometry::weighted(x, projector->rotation.array().square().matrix());
    return CorrelationGeometry::anisotropic(x);
}

Prediction KrigingModel::predict(const Eigen::VectorXd& x_raw) const {
    if (static_cast<std::size_t>(x_raw.size()) != input_dim())
        throw DimensionError("predict: expected " + std::to_string(input_dim()) + " inputs, got " + std::to_string(x_raw.size()));
    if (!x_raw.allFinite()) throw std::invalid_argument("predict: non-finite input");
    const Eigen::VectorXd xn = ((x_raw - norm.x_mean).array() / norm.x_scale.array()).matrix();

    Eigen::MatrixXd dist = (x.rowwise() - xn.transpose()).array().square().matrix();
    if (projector) dist = dist * projector->rotation.array().square().matrix();
    Eigen::VectorXd r = (-(dist * kernel.theta).array()).exp();
    // The nugget belongs to the kernel at coincident inputs, so a training input sees
    // exactly its row of R + nI and is interpolated.
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (x.row(i).transpose() == xn) r(i) += kernel.nugget;

    const double mean = beta_hat + r.dot(alpha);
    double var = 0.0;
    if (chol_lower_ext.size() > 0) {
        LongVector rl = long_correlations(*this, xn);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (x.row(i).transpose() == xn) rl(i) += static_cast<long double>(kernel.nugget);
        const LongVector v = chol_lower_ext.triangularView<Eigen::Lower>().solve(rl);
        const long double trend = 1.0L - chol_one_ext.dot(v);
        var = static_cast<double>(static_cast<long double>(sigma2_hat) *
                                  (1.0L - v.squaredNorm() + trend * trend / chol_one_ext.squaredNorm()));
    } else {
        const Eigen::VectorXd v = chol_lower.triangularView<Eigen::Lower>().solve(r);
        const double trend = 1.0 - chol_one.dot(v);
        var = sigma2_hat * (1.0 - v.squaredNorm() + trend * trend / one_rinv_one);
    }
    return {norm.y_mean + norm.y_scale * mean, std::max(0.0, var) * norm.y_scale * norm.y_scale};
}

std::vector<Prediction> KrigingModel::predict_rows(const Eigen::MatrixXd& x_raw) const {
    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(x_raw.rows()));
    for (Eigen::Index i = 0; i < x_raw.rows(); ++i) out.push_back(predict(Eigen::VectorXd(x_raw.row(i).transpose())));
    return out;
}

namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    Eigen::MatrixXd m(rows, cols);
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw ParseError("model: matrix row count mismatch");
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = data[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("model: matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

constexpr const char* kFormat = "saea-kriging-model";
constexpr int kVersion = 1;

}  // namespace

std::string model_to_json(const KrigingModel& model) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["kind"] = model.is_kpls() ? "kpls" : "kriging";
    j["x"] = matrix_json(model.x);
    j["y"] = vector_json(model.y);
    j["theta"] = vector_json(model.kernel.theta);
    j["nugget"] = model.kernel.nugget;
    j["beta_hat"] = model.beta_hat;
    j["sigma2_hat"] = model.sigma2_hat;
    j["normalization"] = {{"x_mean", vector_json(model.norm.x_mean)},
                          {"x_scale", vector_json(model.norm.x_scale)},
                          {"y_mean", model.norm.y_mean},
                          {"y_scale", model.norm.y_scale}};
    if (model.projector) {
        const auto& p = *model.projector;
        j["projector"] = {{"weights", matrix_json(p.weights)},
                          {"loadings", matrix_json(p.loadings)},
                          {"rotation", matrix_json(p.rotation)},
                          {"y_loadings", vector_json(p.y_loadings)}};
    }
    j["diagnostics"] = {{"optimizer_dimension", model.diagnostics.optimizer_dimension},
                        {"evaluations", model.diagnostics.evaluations},
                        {"log_likelihood", model.diagnostics.log_likelihood}};
    return j.dump();
}

KrigingModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    if (j.value("format", "") != kFormat) throw ParseError("model: not a saea-kriging-model container");
    if (j.value("version", 0) != kVersion) throw ParseError("model: unsupported version " + std::to_string(j.value("version", 0)));
    try {
        Standardizer norm;
        const auto& n = j.at("normalization");
        norm.x_mean = vector_from(n.at("x_mean"));
        norm.x_scale = vector_from(n.at("x_scale"));
        norm.y_mean = n.at("y_mean").get<double>();
        norm.y_scale = n.at("y_scale").get<double>();
        std::optional<PlsRotation> projector;
        if (j.contains("projector")) {
            const auto& p = j.at("projector");
            PlsRotation rot;
            rot.weights = matrix_from(p.at("weights"));
            rot.loadings = matrix_from(p.at("loadings"));
            rot.rotation = matrix_from(p.at("rotation"));
            rot.y_loadings = vector_from(p.at("y_loadings"));
            projector = std::move(rot);
        }
        Eigen::MatrixXd x = matrix_from(j.at("x"));
        Eigen::VectorXd y = vector_from(j.at("y"));
        const Eigen::VectorXd theta = vector_from(j.at("theta"));
        const double nugget = j.at("nugget").get<double>();
        const auto geometry = projector ? CorrelationGeometry::weighted(x, projector->rotation.array().square().matrix())
                                        : CorrelationGeometry::anisotropic(x);
        auto model = detail::condition_on_geometry(std::move(x), std::move(y), geometry, std::move(norm),
                                                   std::move(projector), theta, nugget, nugget);
        const auto& d = j.at("diagnostics");
        model.diagnostics.optimizer_dimension = d.at("optimizer_dimension").get<std::size_t>();
        model.diagnostics.evaluations = d.at("evaluations").get<std::size_t>();
        model.diagnostics.log_likelihood = d.at("log_likelihood").get<double>();
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

void save_model(const KrigingModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << model_to_json(model) << '\n';
}

KrigingModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace saea
