#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saea/cgp_ann.hpp"
#include "saea/dataset.hpp"
#include "saea/evolution.hpp"

namespace saea {

/// Names of the curated datasets, in table order.
const std::vector<std::string>& curated_datasets();
/// Schema text compiled into the library; throws SchemaError for an unknown name.
const std::string& builtin_schema_text(const std::string& name);
Schema builtin_schema(const std::string& name);

/// $SAEA_DATA_DIR if set, else `fallback`.
std::filesystem::path resolve_data_dir(const std::string& fallback);

/// Schema for `name`: <data_dir>/<name>.schema when present, else the built-in one.
Schema find_schema(const std::string& name, const std::filesystem::path& data_dir);

/// Loads <data_dir>/<schema.file> and prepares it. A missing raw file raises an error naming
/// the expected UCI file.
PreparedSplit prepare_named(const std::string& name, const std::filesystem::path& data_dir, const SplitSpec& spec);

struct PreparedPaths {
    std::filesystem::path train;
    std::filesystem::path test;
};
PreparedPaths prepared_paths(const std::filesystem::path& dir, const std::string& name);

/// CPU model and logical core count, with commas replaced.
std::string host_descriptor();

inline constexpr const char* kReportHeader = "dataset,d,m,surrogate,h,fit_seconds,timeout,train_seconds,seed,host";

struct BenchRow {
    std::string dataset;
    std::size_t d = 0;
    std::size_t m = 0;
    SurrogateKind surrogate = SurrogateKind::kpls;
    std::optional<std::size_t> h;        // KPLS only
    double fit_seconds = 0.0;            // elapsed fit time; the budget-limited time for TIMEOUT rows
    std::optional<double> timeout;       // budget in seconds when the fit timed out
    double train_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string host;

    std::string to_csv_line(bool include_timings = true) const;
    static BenchRow parse_csv_line(const std::string& line);
};

struct FitBenchOptions {
    std::string dataset;
    SurrogateKind surrogate = SurrogateKind::kpls;
    std::size_t samples = 100;
    std::size_t h = 2;
    double budget_seconds = 7200.0;
    std::uint64_t seed = 0;
    int epochs = 100;
    double learning_rate = 0.05;
    int batch_size = 32;
    GridConfig grid;
    std::size_t threads = 0;
};

struct FitBenchData {
    Eigen::MatrixXd phenotypes;  // m x d
    Eigen::VectorXd fitness;
    double train_seconds = 0.0;
};

/// m random networks fully trained on `train`; phenotypes after training, fitness = error rate.
FitBenchData build_bench_data(const Dataset& train, const FitBenchOptions& options);

/// Times only the surrogate fit. A FitTimeout becomes a TIMEOUT row.
BenchRow time_surrogate_fit(const std::string& dataset, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            SurrogateKind kind, std::size_t h, double budget_seconds, std::uint64_t seed);

BenchRow fit_bench(const Dataset& train, const FitBenchOptions& options);

/// Appends, writing the header first for a new or empty file. Throws on a foreign header.
void append_report_row(const std::filesystem::path& path, const BenchRow& row);
/// Throws SchemaError naming the file when the header or a row does not match.
std::vector<BenchRow> read_report(const std::filesystem::path& path);

struct ReportTable {
    struct Line {
        std::string dataset;
        std::size_t d = 0;
        std::optional<double> kpls_seconds;
        std::optional<double> kriging_seconds;
    };
    std::vector<Line> lines;

    std::string render() const;
    std::string to_csv() const;
};

/// One line per dataset (curated ones first, in table order); the last row of each kind wins.
/// Missing or timed-out fits are left empty and shown as '-'.
ReportTable build_report(const std::vector<BenchRow>& rows);

/// HH:MM:SS, rounding to the nearest second.
std::string format_hms(double seconds);

}  // namespace saea
