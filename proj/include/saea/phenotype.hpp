#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "saea/cgp_ann.hpp"
#include "saea/dataset.hpp"

namespace saea {

/// Network behaviour over a training split: softmax outputs flattened instance-major,
/// so entry i * n_classes + c is instance i's probability for class c.
struct PhenotypeVector {
    Eigen::VectorXd values;
    std::size_t n_instances = 0;
    std::size_t n_classes = 0;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

PhenotypeVector extract(const Genotype& g, const Dataset& train);

/// Stack vectors as rows of an m x d matrix; all must share one length.
Eigen::MatrixXd stack_phenotypes(const std::vector<const PhenotypeVector*>& vectors);

/// "<length> v0 v1 ..." with 17 significant digits.
std::string format_phenotype(const PhenotypeVector& p);
PhenotypeVector parse_phenotype(const std::string& line, std::size_t n_classes);

}  // namespace saea
