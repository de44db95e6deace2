#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace saea {

/// Malformed input text. `line()` is 1-based, 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value; carries the offending field name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value produced while evaluating a network node.
class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(std::size_t node)
        : std::runtime_error("non-finite value at node " + std::to_string(node)), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// PLS step `component` (1-based) found no covariance left between residual inputs and response.
class DegenerateComponentError : public std::runtime_error {
public:
    explicit DegenerateComponentError(std::size_t component)
        : std::runtime_error("degenerate PLS component " + std::to_string(component)), component_(component) {}
    std::size_t component() const noexcept { return component_; }

private:
    std::size_t component_;
};

class IndefiniteMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a surrogate fit exhausts its wall-clock budget.
class FitTimeout : public std::runtime_error {
public:
    FitTimeout(double elapsed, double budget, double best_likelihood, std::size_t evaluations,
               std::vector<double> best_log10_theta)
        : std::runtime_error("surrogate fit exceeded " + std::to_string(budget) + " s budget after " +
                             std::to_string(elapsed) + " s (" + std::to_string(evaluations) +
                             " likelihood evaluations, best " + std::to_string(best_likelihood) + ")"),
          elapsed_(elapsed), budget_(budget), best_likelihood_(best_likelihood), evaluations_(evaluations),
          best_log10_theta_(std::move(best_log10_theta)) {}

    double elapsed() const noexcept { return elapsed_; }
    double budget() const noexcept { return budget_; }
    double best_likelihood() const noexcept { return best_likelihood_; }
    std::size_t evaluations() const noexcept { return evaluations_; }
    const std::vector<double>& best_log10_theta() const noexcept { return best_log10_theta_; }

private:
    double elapsed_;
    double budget_;
    double best_likelihood_;
    std::size_t evaluations_;
    std::vector<double> best_log10_theta_;
};

}  // namespace saea
