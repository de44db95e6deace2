#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saea/dataset.hpp"

namespace saea {

using Rng = std::mt19937_64;

enum class Activation : int { tanh = 0, sigmoid = 1, relu = 2, identity = 3 };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Cartesian grid of `rows x cols` nodes, each with `arity` weighted inputs.
/// Node addresses: [0, n_inputs) are inputs, node (col, row) is n_inputs + col * rows + row.
struct GridConfig {
    int rows = 10;
    int cols = 5;
    int levels_back = 5;
    int arity = 5;
    std::vector<Activation> functions{Activation::tanh, Activation::sigmoid, Activation::relu, Activation::identity};
    int n_inputs = 1;
    int n_outputs = 2;

    void validate() const;
    std::size_t n_nodes() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    std::size_t n_addresses() const { return static_cast<std::size_t>(n_inputs) + n_nodes(); }
    int column_of(std::size_t address) const;
    /// Addresses a node in column `col` may connect to: every input, plus nodes in the
    /// `levels_back` preceding columns.
    std::pair<std::size_t, std::size_t> node_source_range(int col) const;
    bool is_legal_source(std::size_t node_address, std::size_t source) const;

    bool operator==(const GridConfig&) const = default;
};

struct Genotype {
    GridConfig config;
    std::vector<int> function_genes;                // one per node
    std::vector<std::uint32_t> connection_genes;    // arity per node
    std::vector<double> weight_genes;               // arity per node
    std::vector<double> bias_genes;                 // one per node
    std::vector<std::uint32_t> output_genes;        // n_outputs addresses

    /// Throws std::invalid_argument on any illegal gene.
    void validate() const;
    bool operator==(const Genotype&) const = default;
};

struct ActiveNode {
    std::size_t address;
    std::size_t node;  // index into the genotype's per-node gene arrays
    Activation function;
    std::vector<std::size_t> inputs;
    std::vector<double> weights;
    double bias;
};

/// Nodes reachable from the outputs, in ascending address order (a topological order).
struct ActiveGraph {
    std::size_t n_inputs = 0;
    std::size_t n_addresses = 0;
    std::vector<ActiveNode> nodes;
    std::vector<std::size_t> outputs;
};

Genotype random_genotype(const GridConfig& config, Rng& rng);
ActiveGraph decode(const Genotype& g);

/// Raw output-node values, n x n_outputs.
Eigen::MatrixXd forward_logits(const ActiveGraph& graph, const Eigen::MatrixXd& x);
/// Row-wise softmax of the output logits.
Eigen::MatrixXd forward(const ActiveGraph& graph, const Eigen::MatrixXd& x);

/// Gradient of the mean cross-entropy, laid out like the genotype's weight and bias genes.
struct LossGradient {
    double loss = 0.0;
    std::vector<double> weights;
    std::vector<double> biases;
};
LossGradient loss_and_gradient(const Genotype& g, const Eigen::MatrixXd& x, const std::vector<int>& labels);
double cross_entropy(const Genotype& g, const Eigen::MatrixXd& x, const std::vector<int>& labels);

struct TrainingSpec {
    int epochs = 100;
    double learning_rate = 0.05;
    int batch_size = 32;
};

struct Trained {
    Genotype genotype;
    std::vector<double> loss_trace;  // mean loss per epoch
};

Trained sgd_train(const Genotype& g, const Dataset& train, const TrainingSpec& spec, Rng& rng);

struct MutationRates {
    double connection = 0.1;
    double function = 0.1;
    double weight_reset = 0.05;
};

Genotype mutate(const Genotype& g, const MutationRates& rates, Rng& rng);

/// Fraction of rows whose argmax (ties to the lowest class) differs from the label.
double error_rate(const Genotype& g, const Dataset& d);
double true_fitness(const Genotype& g, const Dataset& train, const TrainingSpec& full, Rng& rng);

std::string serialize(const Genotype& g);
Genotype deserialize_genotype(const std::string& text);

}  // namespace saea
