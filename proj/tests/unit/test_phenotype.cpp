#include <doctest.h>

#include <filesystem>

#include "saea/bench.hpp"
#include "saea/error.hpp"
#include "saea/phenotype.hpp"
#include "support/oracles.hpp"

using namespace saea;
namespace fs = std::filesystem;

namespace {

const fs::path kIris = fs::path(SAEA_TEST_DATA_DIR) / "iris.data";

GridConfig grid_for(const Dataset& d) {
    GridConfig c;
    c.n_inputs = static_cast<int>(d.n_features());
    c.n_outputs = d.n_classes;
    return c;
}

void check_blocks_sum_to_one(const PhenotypeVector& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.n_instances; ++i)
        worst = std::max(worst, std::abs(p.values.segment(static_cast<Eigen::Index>(i * p.n_classes),
                                                          static_cast<Eigen::Index>(p.n_classes)).sum() - 1.0));
    CHECK(worst < 1e-9);
}

// Swap nodes (col, 0) and (col, 1) and rewire every reference; the network is unchanged.
Genotype swap_rows(Genotype g, int col) {
    const auto& c = g.config;
    const std::size_t a = static_cast<std::size_t>(col * c.rows), b = a + 1;
    const std::size_t addr_a = static_cast<std::size_t>(c.n_inputs) + a, addr_b = addr_a + 1;
    const auto ar = static_cast<std::size_t>(c.arity);
    std::swap(g.function_genes[a], g.function_genes[b]);
    std::swap(g.bias_genes[a], g.bias_genes[b]);
    for (std::size_t k = 0; k < ar; ++k) {
        std::swap(g.connection_genes[a * ar + k], g.connection_genes[b * ar + k]);
        std::swap(g.weight_genes[a * ar + k], g.weight_genes[b * ar + k]);
    }
    auto remap = [&](std::uint32_t& gene) {
        if (gene == addr_a) gene = static_cast<std::uint32_t>(addr_b);
        else if (gene == addr_b) gene = static_cast<std::uint32_t>(addr_a);
    };
    for (auto& gene : g.connection_genes) remap(gene);
    for (auto& gene : g.output_genes) remap(gene);
    return g;
}

}  // namespace

TEST_CASE("iris train split gives a 336-long vector with softmax blocks") {
    const auto dir = oracle::fixture_data_dir(kIris, "phenotype");
    const auto prepared = prepare_named("iris", dir, {});
    Rng rng(4);
    const auto g = random_genotype(grid_for(prepared.train), rng);
    const auto p = extract(g, prepared.train);
    CHECK(p.size() == 336);
    CHECK(p.n_instances == 112);
    CHECK(p.n_classes == 3);
    check_blocks_sum_to_one(p);

    const Eigen::MatrixXd probs = forward(decode(g), prepared.train.features);
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        for (Eigen::Index c = 0; c < probs.cols(); ++c) CHECK(p.values(i * 3 + c) == probs(i, c));
}

TEST_CASE("abalone train split gives 6264 entries") {
    const auto dir = oracle::fixture_data_dir(kIris, "phenotype");
    const auto prepared = prepare_named("abalone", dir, {});
    Rng rng(5);
    const auto p = extract(random_genotype(grid_for(prepared.train), rng), prepared.train);
    CHECK(p.size() == 6264);
    check_blocks_sum_to_one(p);
}

TEST_CASE("zero-weight net gives the constant 1/c vector") {
    const auto raw = load_uci(kIris, builtin_schema("iris"));
    auto c = grid_for(raw);
    c.functions = {Activation::tanh, Activation::identity};
    Rng rng(6);
    auto g = random_genotype(c, rng);
    std::fill(g.weight_genes.begin(), g.weight_genes.end(), 0.0);
    std::fill(g.bias_genes.begin(), g.bias_genes.end(), 0.0);
    const auto p = extract(g, raw);
    CHECK((p.values.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("arity mismatch is rejected") {
    const auto raw = load_uci(kIris, builtin_schema("iris"));
    GridConfig c;
    c.n_inputs = 3;
    c.n_outputs = 3;
    Rng rng(1);
    CHECK_THROWS_AS(extract(random_genotype(c, rng), raw), DimensionError);
}

TEST_CASE("inactive genes do not change the vector") {
    const auto raw = load_uci(kIris, builtin_schema("iris"));
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const auto g = random_genotype(grid_for(raw), rng);
        const auto active = oracle::reachable_nodes(g);
        auto other = g;
        const auto ar = static_cast<std::size_t>(g.config.arity);
        for (std::size_t node = 0; node < g.config.n_nodes(); ++node) {
            if (active.count(node + static_cast<std::size_t>(g.config.n_inputs))) continue;
            other.bias_genes[node] += 1.0;
            other.function_genes[node] = (other.function_genes[node] + 1) % 4;
            for (std::size_t k = 0; k < ar; ++k) other.weight_genes[node * ar + k] = -other.weight_genes[node * ar + k];
        }
        CHECK(extract(other, raw).values == extract(g, raw).values);
    }
}

TEST_CASE("relabelling nodes within a column preserves the vector") {
    const auto raw = load_uci(kIris, builtin_schema("iris"));
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        const auto g = random_genotype(grid_for(raw), rng);
        const auto h = swap_rows(g, t % g.config.cols);
        h.validate();
        CHECK_FALSE(h == g);
        const auto a = extract(g, raw).values, b = extract(h, raw).values;
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("stack and text round-trip") {
    const auto raw = load_uci(kIris, builtin_schema("iris"));
    Rng rng(10);
    const auto p1 = extract(random_genotype(grid_for(raw), rng), raw);
    const auto p2 = extract(random_genotype(grid_for(raw), rng), raw);
    const auto x = stack_phenotypes({&p1, &p2});
    CHECK(x.rows() == 2);
    CHECK(x.cols() == 450);
    CHECK(x.row(1).transpose() == p2.values);

    const auto text = format_phenotype(p1);
    const auto back = parse_phenotype(text, 3);
    CHECK(back.values == p1.values);
    CHECK(back.n_instances == 150);
    CHECK_THROWS_AS(parse_phenotype("4 0.5 0.5", 2), ParseError);
    CHECK_THROWS_AS(parse_phenotype("3 0.1 0.2 0.7", 2), ParseError);

    PhenotypeVector shorter = p1;
    shorter.values.conservativeResize(3);
    CHECK_THROWS_AS(stack_phenotypes({&p1, &shorter}), DimensionError);
}
