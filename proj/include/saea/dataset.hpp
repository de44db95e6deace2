#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace saea {

/// Labelled classification data. Labels index into `class_names`.
struct Dataset {
    std::string name;
    Eigen::MatrixXd features;  // n_instances x n_features
    std::vector<int> labels;
    int n_classes = 0;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
    std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }

    /// Throws SchemaError when labels, shape, or values violate the dataset invariants.
    void validate() const;
    Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Keep exactly two named classes and relabel them 0 and 1 in list order.
struct KeepClasses {
    std::vector<std::string> classes;
};

/// Label 0 when the value is <= threshold, else 1. `column` is a raw feature column name or the label column.
struct Threshold {
    std::string column;
    double threshold = 0.0;
};

using BinarizeRule = std::variant<std::monostate, KeepClasses, Threshold>;

enum class Delimiter { comma, whitespace };

/// Column layout of a raw UCI file plus the dataset's curation rules.
struct Schema {
    std::string name;
    std::string file;  // expected raw file name, e.g. "iris.data"
    Delimiter delimiter = Delimiter::comma;
    std::vector<std::string> columns;
    std::string label;
    std::vector<std::string> drop;
    std::vector<std::string> categorical;
    /// Declared class values in label order; empty means discover and sort.
    std::vector<std::string> classes;
    BinarizeRule binarize;

    static Schema read(const std::filesystem::path& path);
    static Schema parse(const std::string& text);
};

struct SplitSpec {
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    bool stratified = false;
};

/// Per-feature z-score statistics estimated on a training split.
struct NormalizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  // sample standard deviation; 0 marks a constant column
};

Dataset load_uci(const std::filesystem::path& path, const Schema& schema);
Dataset load_uci_text(const std::string& text, const Schema& schema);

Dataset binarize(const Dataset& d, const BinarizeRule& rule);

/// Split first floor(train_fraction * n) shuffled rows into train, the rest into test.
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

struct Normalized {
    Dataset train;
    Dataset test;
    NormalizationStats stats;
};
Normalized normalize(const Dataset& train, const Dataset& test);
Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& x, const NormalizationStats& stats);

/// Canonical text format: "n p c" header, then "label f1 ... fp" per row with 17 significant digits.
void save_canonical(const Dataset& d, const std::filesystem::path& path);
std::string to_canonical(const Dataset& d);
Dataset load_canonical(const std::filesystem::path& path);
Dataset parse_canonical(const std::string& text, std::string name = {});

struct PreparedSplit {
    Dataset train;
    Dataset test;
    NormalizationStats stats;
    std::size_t phenotype_length() const { return train.size() * static_cast<std::size_t>(train.n_classes); }
};

/// load -> binarize -> split -> normalize, as used by the `prepare` command.
PreparedSplit prepare_dataset(const std::filesystem::path& raw_file, const Schema& schema, const SplitSpec& spec);

}  // namespace saea
