#include "saea/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace saea {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double sanitize(double f) { return std::isnan(f) ? std::numeric_limits<double>::infinity() : f; }

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective, Eigen::VectorXd start,
                             const NelderMeadOptions& options) {
    const Eigen::Index n = start.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");
    if (options.lower.size() != n || options.upper.size() != n)
        throw std::invalid_argument("nelder_mead: bounds do not match the start point");
    if (options.max_evaluations == 0) throw std::invalid_argument("nelder_mead: zero evaluation budget");

    NelderMeadResult result;
    auto clamp = [&](Eigen::VectorXd x) {
        return Eigen::VectorXd(x.cwiseMax(options.lower).cwiseMin(options.upper));
    };
    auto eval = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        return sanitize(objective(x));
    };
    auto budget_left = [&] { return result.evaluations < options.max_evaluations; };

    std::vector<Eigen::VectorXd> simplex;
    std::vector<double> values;
    simplex.reserve(static_cast<std::size_t>(n + 1));
    simplex.push_back(clamp(std::move(start)));
    values.push_back(eval(simplex[0]));
    for (Eigen::Index i = 0; i < n && budget_left(); ++i) {
        Eigen::VectorXd v = simplex[0];
        const double step = options.initial_step * (options.upper(i) - options.lower(i));
        v(i) = v(i) + step <= options.upper(i) ? v(i) + step : v(i) - step;
        simplex.push_back(clamp(std::move(v)));
        values.push_back(eval(simplex.back()));
    }

    std::vector<std::size_t> order(simplex.size());
    auto sort_simplex = [&] {
        order.resize(simplex.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> s;
        std::vector<double> f;
        s.reserve(order.size());
        f.reserve(order.size());
        for (auto k : order) {
            s.push_back(std::move(simplex[k]));
            f.push_back(values[k]);
        }
        simplex = std::move(s);
        values = std::move(f);
    };

    // Budget ran out while building the initial simplex.
    if (static_cast<Eigen::Index>(simplex.size()) < n + 1) {
        sort_simplex();
        result.x = simplex.front();
        result.value = values.front();
        return result;
    }

    // Running vertex sum keeps the centroid update O(n) per iteration.
    Eigen::VectorXd vertex_sum = Eigen::VectorXd::Zero(n);
    for (const auto& v : simplex) vertex_sum += v;
    const auto last = static_cast<std::size_t>(n);
    auto replace_worst = [&](Eigen::VectorXd v, double f) {
        vertex_sum += v - simplex[last];
        simplex[last] = std::move(v);
        values[last] = f;
    };

    Eigen::VectorXd centroid(n);
    while (true) {
        sort_simplex();
        const double best = values.front();
        const double worst = values.back();
        if (std::isfinite(worst) && worst - best <= options.f_tolerance * (1.0 + std::abs(best))) {
            double extent = 0.0;
            for (std::size_t k = 1; k < simplex.size(); ++k)
                extent = std::max(extent, (simplex[k] - simplex[0]).cwiseAbs().maxCoeff());
            if (extent <= options.x_tolerance) {
                result.converged = true;
                break;
            }
        }
        if (!budget_left()) break;

        centroid = (vertex_sum - simplex[last]) / static_cast<double>(n);
        Eigen::VectorXd reflected = clamp(centroid + kReflect * (centroid - simplex[last]));
        const double f_reflected = eval(reflected);
        if (f_reflected < values[0]) {
            if (!budget_left()) {
                replace_worst(std::move(reflected), f_reflected);
                continue;
            }
            Eigen::VectorXd expanded = clamp(centroid + kExpand * (reflected - centroid));
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                replace_worst(std::move(expanded), f_expanded);
            } else {
                replace_worst(std::move(reflected), f_reflected);
            }
            continue;
        }
        if (f_reflected < values[last - 1]) {
            replace_worst(std::move(reflected), f_reflected);
            continue;
        }
        if (!budget_left()) break;
        const bool outside = f_reflected < values[last];
        Eigen::VectorXd contracted = outside ? clamp(centroid + kContract * (reflected - centroid))
                                             : clamp(centroid + kContract * (simplex[last] - centroid));
        const double f_contracted = eval(contracted);
        if (f_contracted < std::min(f_reflected, values[last])) {
            replace_worst(std::move(contracted), f_contracted);
            continue;
        }
        // Shrink towards the best vertex.
        for (std::size_t k = 1; k < simplex.size() && budget_left(); ++k) {
            simplex[k] = simplex[0] + kShrink * (simplex[k] - simplex[0]);
            values[k] = eval(simplex[k]);
        }
        vertex_sum.setZero();
        for (const auto& v : simplex) vertex_sum += v;
    }
    sort_simplex();
    result.x = simplex.front();
    result.value = values.front();
    return result;
}

}  // namespace saea
