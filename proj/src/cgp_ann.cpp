#include "saea/cgp_ann.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "saea/error.hpp"

namespace saea {

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::identity: return x;
    }
    return x;
}

// Derivative expressed through the pre-activation and the activation value.
double activate_grad(Activation a, double pre, double value) {
    switch (a) {
        case Activation::tanh: return 1.0 - value * value;
        case Activation::sigmoid: return value * (1.0 - value);
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

bool draw(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

std::uint32_t random_source(const GridConfig& c, int col, Rng& rng) {
    auto [lo, hi] = c.node_source_range(col);
    const std::size_t n_choices = static_cast<std::size_t>(c.n_inputs) + (hi - lo);
    auto k = std::uniform_int_distribution<std::size_t>(0, n_choices - 1)(rng);
    if (k < static_cast<std::size_t>(c.n_inputs)) return static_cast<std::uint32_t>(k);
    return static_cast<std::uint32_t>(lo + (k - static_cast<std::size_t>(c.n_inputs)));
}

std::uint32_t random_output(const GridConfig& c, Rng& rng) {
    return static_cast<std::uint32_t>(
        std::uniform_int_distribution<std::size_t>(static_cast<std::size_t>(c.n_inputs), c.n_addresses() - 1)(rng));
}

struct ForwardState {
    Eigen::MatrixXd values;  // n x n_addresses; only inputs and active columns are filled
    Eigen::MatrixXd pre;     // n x active node count
};

ForwardState run_forward(const ActiveGraph& graph, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != graph.n_inputs)
        throw DimensionError("forward: expected " + std::to_string(graph.n_inputs) + " input columns, got " +
                             std::to_string(x.cols()));
    ForwardState s;
    s.values.resize(x.rows(), static_cast<Eigen::Index>(graph.n_addresses));
    s.values.leftCols(x.cols()) = x;
    s.pre.resize(x.rows(), static_cast<Eigen::Index>(graph.nodes.size()));
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& node = graph.nodes[i];
        auto pre = s.pre.col(static_cast<Eigen::Index>(i));
        pre.setConstant(node.bias);
        for (std::size_t k = 0; k < node.inputs.size(); ++k)
            pre += node.weights[k] * s.values.col(static_cast<Eigen::Index>(node.inputs[k]));
        auto out = s.values.col(static_cast<Eigen::Index>(node.address));
        for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = activate(node.function, pre(r));
        if (!out.allFinite()) throw EvaluationError(node.address);
    }
    return s;
}

Eigen::MatrixXd gather_logits(const ActiveGraph& graph, const ForwardState& s) {
    Eigen::MatrixXd logits(s.values.rows(), static_cast<Eigen::Index>(graph.outputs.size()));
    for (std::size_t j = 0; j < graph.outputs.size(); ++j)
        logits.col(static_cast<Eigen::Index>(j)) = s.values.col(static_cast<Eigen::Index>(graph.outputs[j]));
    return logits;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

// Mean cross-entropy and gradients per active node, in graph order.
struct GraphGradient {
    double loss = 0.0;
    std::vector<std::vector<double>> weights;
    std::vector<double> biases;
};

GraphGradient backprop(const ActiveGraph& graph, const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw DimensionError("backprop: rows and labels differ");
    const auto s = run_forward(graph, x);
    const Eigen::MatrixXd logits = gather_logits(graph, s);
    const Eigen::Index n = x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    Eigen::MatrixXd shifted = logits.colwise() - row_max;
    Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log();

    GraphGradient g;
    Eigen::MatrixXd dlogits = shifted.array().colwise() - log_norm.array();
    for (Eigen::Index r = 0; r < n; ++r) g.loss -= dlogits(r, labels[static_cast<std::size_t>(r)]);
    g.loss *= inv_n;
    dlogits = dlogits.array().exp();  // softmax probabilities
    for (Eigen::Index r = 0; r < n; ++r) dlogits(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
    dlogits *= inv_n;

    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(graph.n_addresses));
    for (std::size_t j = 0; j < graph.outputs.size(); ++j)
        delta.col(static_cast<Eigen::Index>(graph.outputs[j])) += dlogits.col(static_cast<Eigen::Index>(j));

    g.weights.resize(graph.nodes.size());
    g.biases.assign(graph.nodes.size(), 0.0);
    Eigen::VectorXd local(n);
    for (std::size_t i = graph.nodes.size(); i-- > 0;) {
        const auto& node = graph.nodes[i];
        const auto value = s.values.col(static_cast<Eigen::Index>(node.address));
        const auto pre = s.pre.col(static_cast<Eigen::Index>(i));
        for (Eigen::Index r = 0; r < n; ++r)
            local(r) = delta(r, static_cast<Eigen::Index>(node.address)) * activate_grad(node.function, pre(r), value(r));
        g.biases[i] = local.sum();
        g.weights[i].resize(node.inputs.size());
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            const auto src = static_cast<Eigen::Index>(node.inputs[k]);
            g.weights[i][k] = local.dot(s.values.col(src));
            delta.col(src) += node.weights[k] * local;
        }
    }
    return g;
}

void write_back(const ActiveGraph& graph, Genotype& g) {
    const auto arity = static_cast<std::size_t>(g.config.arity);
    for (const auto& node : graph.nodes) {
        for (std::size_t k = 0; k < arity; ++k) g.weight_genes[node.node * arity + k] = node.weights[k];
        g.bias_genes[node.node] = node.bias;
    }
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

void GridConfig::validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid rows and cols must be positive");
    if (levels_back < 1 || levels_back > cols) throw std::invalid_argument("levels_back must lie in [1, cols]");
    if (arity < 1) throw std::invalid_argument("arity must be positive");
    if (functions.empty()) throw std::invalid_argument("function set is empty");
    if (n_inputs < 1 || n_outputs < 1) throw std::invalid_argument("n_inputs and n_outputs must be positive");
}

int GridConfig::column_of(std::size_t address) const {
    if (address < static_cast<std::size_t>(n_inputs)) return -1;
    return static_cast<int>((address - static_cast<std::size_t>(n_inputs)) / static_cast<std::size_t>(rows));
}

std::pair<std::size_t, std::size_t> GridConfig::node_source_range(int col) const {
    const int first = std::max(0, col - levels_back);
    const auto base = static_cast<std::size_t>(n_inputs);
    return {base + static_cast<std::size_t>(first) * static_cast<std::size_t>(rows),
            base + static_cast<std::size_t>(col) * static_cast<std::size_t>(rows)};
}

bool GridConfig::is_legal_source(std::size_t node_address, std::size_t source) const {
    if (source < static_cast<std::size_t>(n_inputs)) return true;
    auto [lo, hi] = node_source_range(column_of(node_address));
    return source >= lo && source < hi;
}

void Genotype::validate() const {
    config.validate();
    const std::size_t n = config.n_nodes();
    const auto arity = static_cast<std::size_t>(config.arity);
    if (function_genes.size() != n || bias_genes.size() != n || connection_genes.size() != n * arity ||
        weight_genes.size() != n * arity || output_genes.size() != static_cast<std::size_t>(config.n_outputs))
        throw std::invalid_argument("genotype gene arrays do not match the grid");
    for (int f : function_genes)
        if (f < 0 || static_cast<std::size_t>(f) >= config.functions.size())
            throw std::invalid_argument("function gene out of range");
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t address = static_cast<std::size_t>(config.n_inputs) + i;
        for (std::size_t k = 0; k < arity; ++k)
            if (!config.is_legal_source(address, connection_genes[i * arity + k]))
                throw std::invalid_argument("connection gene of node " + std::to_string(address) + " is illegal");
    }
    for (auto o : output_genes)
        if (o >= config.n_addresses()) throw std::invalid_argument("output gene out of range");
    for (double w : weight_genes)
        if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight gene");
    for (double b : bias_genes)
        if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias gene");
}

Genotype random_genotype(const GridConfig& config, Rng& rng) {
    config.validate();
    Genotype g;
    g.config = config;
    const std::size_t n = config.n_nodes();
    const auto arity = static_cast<std::size_t>(config.arity);
    std::uniform_int_distribution<int> pick_function(0, static_cast<int>(config.functions.size()) - 1);
    std::uniform_real_distribution<double> pick_weight(-1.0, 1.0);
    g.function_genes.resize(n);
    g.connection_genes.resize(n * arity);
    g.weight_genes.resize(n * arity);
    g.bias_genes.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int col = static_cast<int>(i / static_cast<std::size_t>(config.rows));
        g.function_genes[i] = pick_function(rng);
        for (std::size_t k = 0; k < arity; ++k) {
            g.connection_genes[i * arity + k] = random_source(config, col, rng);
            g.weight_genes[i * arity + k] = pick_weight(rng);
        }
    }
    g.output_genes.resize(static_cast<std::size_t>(config.n_outputs));
    for (auto& o : g.output_genes) o = random_output(config, rng);
    return g;
}

ActiveGraph decode(const Genotype& g) {
    const auto& c = g.config;
    const auto n_in = static_cast<std::size_t>(c.n_inputs);
    const auto arity = static_cast<std::size_t>(c.arity);
    std::vector<char> active(c.n_addresses(), 0);
    for (auto o : g.output_genes) active[o] = 1;
    // Connections only point to lower addresses, so one descending sweep closes the set.
    for (std::size_t a = c.n_addresses(); a-- > n_in;) {
        if (!active[a]) continue;
        const std::size_t node = a - n_in;
        for (std::size_t k = 0; k < arity; ++k) active[g.connection_genes[node * arity + k]] = 1;
    }
    ActiveGraph graph;
    graph.n_inputs = n_in;
    graph.n_addresses = c.n_addresses();
    for (std::size_t a = n_in; a < c.n_addresses(); ++a) {
        if (!active[a]) continue;
        const std::size_t node = a - n_in;
        ActiveNode an;
        an.address = a;
        an.node = node;
        an.function = c.functions[static_cast<std::size_t>(g.function_genes[node])];
        an.inputs.assign(g.connection_genes.begin() + static_cast<std::ptrdiff_t>(node * arity),
                         g.connection_genes.begin() + static_cast<std::ptrdiff_t>((node + 1) * arity));
        an.weights.assign(g.weight_genes.begin() + static_cast<std::ptrdiff_t>(node * arity),
                          g.weight_genes.begin() + static_cast<std::ptrdiff_t>((node + 1) * arity));
        an.bias = g.bias_genes[node];
        graph.nodes.push_back(std::move(an));
    }
    graph.outputs.assign(g.output_genes.begin(), g.output_genes.end());
    return graph;
}

Eigen::MatrixXd forward_logits(const ActiveGraph& graph, const Eigen::MatrixXd& x) {
    return gather_logits(graph, run_forward(graph, x));
}

Eigen::MatrixXd forward(const ActiveGraph& graph, const Eigen::MatrixXd& x) { return softmax_rows(forward_logits(graph, x)); }

LossGradient loss_and_gradient(const Genotype& g, const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    const auto graph = decode(g);
    const auto gg = backprop(graph, x, labels);
    const auto arity = static_cast<std::size_t>(g.config.arity);
    LossGradient out;
    out.loss = gg.loss;
    out.weights.assign(g.weight_genes.size(), 0.0);
    out.biases.assign(g.bias_genes.size(), 0.0);
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto node = graph.nodes[i].node;
        for (std::size_t k = 0; k < arity; ++k) out.weights[node * arity + k] = gg.weights[i][k];
        out.biases[node] = gg.biases[i];
    }
    return out;
}

double cross_entropy(const Genotype& g, const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    const Eigen::MatrixXd logits = forward_logits(decode(g), x);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
        loss += lse - logits(r, labels[static_cast<std::size_t>(r)]);
    }
    return loss / static_cast<double>(logits.rows());
}

Trained sgd_train(const Genotype& g, const Dataset& train, const TrainingSpec& spec, Rng& rng) {
    if (spec.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (spec.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    Trained out{g, {}};
    if (spec.epochs == 0) return out;

    auto graph = decode(g);
    const std::size_t n = train.size();
    const auto b = static_cast<std::size_t>(spec.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Eigen::MatrixXd batch_x;
    std::vector<int> batch_y;
    out.loss_trace.reserve(static_cast<std::size_t>(spec.epochs));
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += b) {
            const std::size_t len = std::min(b, n - start);
            batch_x.resize(static_cast<Eigen::Index>(len), train.features.cols());
            batch_y.resize(len);
            for (std::size_t r = 0; r < len; ++r) {
                batch_x.row(static_cast<Eigen::Index>(r)) = train.features.row(static_cast<Eigen::Index>(order[start + r]));
                batch_y[r] = train.labels[order[start + r]];
            }
            const auto grad = backprop(graph, batch_x, batch_y);
            epoch_loss += grad.loss * static_cast<double>(len);
            for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
                auto& node = graph.nodes[i];
                for (std::size_t k = 0; k < node.weights.size(); ++k) node.weights[k] -= spec.learning_rate * grad.weights[i][k];
                node.bias -= spec.learning_rate * grad.biases[i];
            }
        }
        out.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    }
    write_back(graph, out.genotype);
    return out;
}

Genotype mutate(const Genotype& g, const MutationRates& rates, Rng& rng) {
    for (double p : {rates.connection, rates.function, rates.weight_reset})
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("mutation rates must lie in [0, 1]");
    Genotype child = g;
    const auto& c = g.config;
    const auto arity = static_cast<std::size_t>(c.arity);
    std::uniform_int_distribution<int> pick_function(0, static_cast<int>(c.functions.size()) - 1);
    std::uniform_real_distribution<double> pick_weight(-1.0, 1.0);
    for (std::size_t i = 0; i < c.n_nodes(); ++i) {
        const int col = static_cast<int>(i / static_cast<std::size_t>(c.rows));
        if (draw(rng, rates.function)) child.function_genes[i] = pick_function(rng);
        for (std::size_t k = 0; k < arity; ++k) {
            if (draw(rng, rates.connection)) child.connection_genes[i * arity + k] = random_source(c, col, rng);
            if (draw(rng, rates.weight_reset)) child.weight_genes[i * arity + k] = pick_weight(rng);
        }
        if (draw(rng, rates.weight_reset)) child.bias_genes[i] = 0.0;
    }
    for (auto& o : child.output_genes)
        if (draw(rng, rates.connection)) o = random_output(c, rng);
    return child;
}

double error_rate(const Genotype& g, const Dataset& d) {
    if (d.size() == 0) return 0.0;
    const Eigen::MatrixXd logits = forward_logits(decode(g), d.features);
    std::size_t wrong = 0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < logits.cols(); ++j)
            if (logits(r, j) > logits(r, best)) best = j;
        if (best != d.labels[static_cast<std::size_t>(r)]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(d.size());
}

double true_fitness(const Genotype& g, const Dataset& train, const TrainingSpec& full, Rng& rng) {
    return error_rate(sgd_train(g, train, full, rng).genotype, train);
}

std::string serialize(const Genotype& g) {
    std::ostringstream out;
    const auto& c = g.config;
    out << "cgpann-genotype 1\n";
    out << "grid " << c.rows << ' ' << c.cols << ' ' << c.levels_back << ' ' << c.arity << ' ' << c.n_inputs << ' '
        << c.n_outputs << '\n';
    out << "functions " << c.functions.size();
    for (auto f : c.functions) out << ' ' << to_string(f);
    out << "\nfunction_genes " << g.function_genes.size();
    for (auto v : g.function_genes) out << ' ' << v;
    out << "\nconnection_genes " << g.connection_genes.size();
    for (auto v : g.connection_genes) out << ' ' << v;
    char buf[40];
    out << "\nweight_genes " << g.weight_genes.size();
    for (auto v : g.weight_genes) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
    }
    out << "\nbias_genes " << g.bias_genes.size();
    for (auto v : g.bias_genes) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
    }
    out << "\noutput_genes " << g.output_genes.size();
    for (auto v : g.output_genes) out << ' ' << v;
    out << '\n';
    return out.str();
}

namespace {

template <class T>
std::vector<T> read_array(std::istream& in, const std::string& tag, std::size_t line) {
    std::string word;
    std::size_t count = 0;
    if (!(in >> word) || word != tag || !(in >> count)) throw ParseError("expected '" + tag + "'", line);
    std::vector<T> out(count);
    for (auto& v : out)
        if (!(in >> v)) throw ParseError("truncated '" + tag + "'", line);
    return out;
}

}  // namespace

Genotype deserialize_genotype(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "cgpann-genotype" || version != 1)
        throw ParseError("not a cgpann-genotype v1 record", 1);
    Genotype g;
    auto& c = g.config;
    if (!(in >> word) || word != "grid" ||
        !(in >> c.rows >> c.cols >> c.levels_back >> c.arity >> c.n_inputs >> c.n_outputs))
        throw ParseError("bad grid line", 2);
    auto names = read_array<std::string>(in, "functions", 3);
    c.functions.clear();
    for (const auto& n : names) c.functions.push_back(activation_from_string(n));
    g.function_genes = read_array<int>(in, "function_genes", 4);
    g.connection_genes = read_array<std::uint32_t>(in, "connection_genes", 5);
    g.weight_genes = read_array<double>(in, "weight_genes", 6);
    g.bias_genes = read_array<double>(in, "bias_genes", 7);
    g.output_genes = read_array<std::uint32_t>(in, "output_genes", 8);
    g.validate();
    return g;
}

}  // namespace saea
