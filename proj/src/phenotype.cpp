#include "saea/phenotype.hpp"

#include <cstdio>
#include <sstream>

#include "saea/error.hpp"

namespace saea {

PhenotypeVector extract(const Genotype& g, const Dataset& train) {
    if (g.config.n_inputs != static_cast<int>(train.n_features()) || g.config.n_outputs != train.n_classes)
        throw DimensionError("phenotype: genotype arity does not match the dataset");
    const Eigen::MatrixXd probs = forward(decode(g), train.features);
    // Row-major flattening of the n x c probability matrix.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = probs;
    PhenotypeVector p;
    p.n_instances = static_cast<std::size_t>(probs.rows());
    p.n_classes = static_cast<std::size_t>(probs.cols());
    p.values = Eigen::Map<const Eigen::VectorXd>(row_major.data(), row_major.size());
    return p;
}

Eigen::MatrixXd stack_phenotypes(const std::vector<const PhenotypeVector*>& vectors) {
    if (vectors.empty()) return {};
    const auto d = static_cast<Eigen::Index>(vectors.front()->size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(vectors.size()), d);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (static_cast<Eigen::Index>(vectors[i]->size()) != d) throw DimensionError("phenotype lengths differ");
        x.row(static_cast<Eigen::Index>(i)) = vectors[i]->values.transpose();
    }
    return x;
}

std::string format_phenotype(const PhenotypeVector& p) {
    std::string out = std::to_string(p.size());
    char buf[40];
    for (Eigen::Index i = 0; i < p.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, " %.17g", p.values(i));
        out += buf;
    }
    return out;
}

PhenotypeVector parse_phenotype(const std::string& line, std::size_t n_classes) {
    std::istringstream in(line);
    std::size_t len = 0;
    if (!(in >> len)) throw ParseError("phenotype: missing length prefix");
    if (n_classes == 0 || len % n_classes != 0) throw ParseError("phenotype: length not a multiple of n_classes");
    PhenotypeVector p;
    p.values.resize(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i)
        if (!(in >> p.values(static_cast<Eigen::Index>(i)))) throw ParseError("phenotype: truncated vector");
    p.n_classes = n_classes;
    p.n_instances = len / n_classes;
    return p;
}

}  // namespace saea
