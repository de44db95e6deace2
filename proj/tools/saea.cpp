#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saea/bench.hpp"
#include "saea/dataset.hpp"
#include "saea/error.hpp"
#include "saea/evolution.hpp"

namespace fs = std::filesystem;
using namespace saea;

namespace {

fs::path data_dir_from(const std::string& flag, const std::string& config_value = {}) {
    if (!flag.empty()) return flag;
    return resolve_data_dir(config_value.empty() ? "data" : config_value);
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct PrepareArgs {
    std::string dataset;
    std::string data_dir;
    std::string out;
    std::uint64_t seed = 0;
    double train_fraction = 0.75;
    bool stratified = false;
};

int cmd_prepare(const PrepareArgs& a) {
    const fs::path data_dir = data_dir_from(a.data_dir);
    SplitSpec spec{a.train_fraction, a.seed, a.stratified};
    const auto prepared = prepare_named(a.dataset, data_dir, spec);
    const fs::path out_dir = a.out.empty() ? data_dir / "prepared" : fs::path(a.out);
    fs::create_directories(out_dir);
    const auto paths = prepared_paths(out_dir, a.dataset);
    save_canonical(prepared.train, paths.train);
    save_canonical(prepared.test, paths.test);
    std::cout << a.dataset << ": n_train = " << prepared.train.size() << ", n_test = " << prepared.test.size()
              << ", classes = " << prepared.train.n_classes << "\n";
    std::cout << "d = " << prepared.phenotype_length() << "\n";
    return 0;
}

struct FitBenchArgs {
    std::string dataset;
    std::string surrogate = "kpls";
    std::size_t samples = 100;
    std::size_t h = 2;
    double budget = 7200.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string data_dir;
    std::string prepared;
    int epochs = 100;
    std::size_t threads = 0;
    bool omit_timings = false;
};

int cmd_fit_bench(const FitBenchArgs& a) {
    const fs::path data_dir = data_dir_from(a.data_dir);
    const fs::path prepared_dir = a.prepared.empty() ? data_dir / "prepared" : fs::path(a.prepared);
    const auto paths = prepared_paths(prepared_dir, a.dataset);
    if (!fs::exists(paths.train))
        throw std::runtime_error("prepared dataset not found: " + paths.train.string() + " (run `saea prepare --dataset " +
                                 a.dataset + "` first)");
    Dataset train = load_canonical(paths.train);
    train.name = a.dataset;

    FitBenchOptions options;
    options.dataset = a.dataset;
    options.surrogate = surrogate_kind_from_string(a.surrogate);
    options.samples = a.samples;
    options.h = a.h;
    options.budget_seconds = a.budget;
    options.seed = a.seed;
    options.epochs = a.epochs;
    options.threads = a.threads;
    const auto row = fit_bench(train, options);
    if (!a.out.empty()) append_report_row(a.out, row);
    std::cout << kReportHeader << "\n" << row.to_csv_line(!a.omit_timings) << "\n";
    if (!a.omit_timings)
        std::printf("training %.3f s + surrogate fit %.3f s = %.3f s\n", row.train_seconds, row.fit_seconds,
                    row.train_seconds + row.fit_seconds);
    if (row.timeout)
        std::cout << "TIMEOUT: " << to_string(row.surrogate) << " fit on d = " << row.d << " exceeded "
                  << *row.timeout << " s\n";
    return 0;
}

struct EvolveArgs {
    std::string config;
    std::string out = ".";
    std::string data_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> surrogate;
    std::optional<std::size_t> h;
    std::optional<double> budget;
    bool omit_timings = false;
};

int cmd_evolve(const EvolveArgs& a) {
    auto config = EvolutionConfig::read(a.config);
    if (a.seed) config.seed = *a.seed;
    if (a.surrogate) config.surrogate = surrogate_kind_from_string(*a.surrogate);
    if (a.h) config.h = *a.h;
    if (a.budget) config.fit_budget_seconds = *a.budget;
    config.validate();
    if (config.data_dataset.empty()) throw ConfigError("data.dataset", "required field missing");

    const fs::path data_dir = data_dir_from(a.data_dir, config.data_dir);
    SplitSpec spec{config.data_train_fraction, config.data_split_seed, false};
    const auto prepared = prepare_named(config.data_dataset, data_dir, spec);
    Dataset train = prepared.train;
    train.name = config.data_dataset;

    const fs::path out_dir = a.out;
    const std::string stem = fs::path(a.config).stem().string();
    const auto json_path = out_dir / (stem + ".json");
    const auto csv_path = out_dir / (stem + ".csv");
    auto flush = [&](const RunLog& log) {
        write_file(json_path, log.to_json(!a.omit_timings));
        write_file(csv_path, log.to_csv(!a.omit_timings));
    };
    const auto log = run(config, train, flush);
    flush(log);
    std::cout << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
    if (!log.generations.empty())
        std::cout << "best training error " << log.generations.back().best_fitness << " after generation "
                  << log.generations.back().generation << "\n";
    if (log.status != "ok") {
        std::cerr << "error: run aborted: " << log.error << "\n";
        return 1;
    }
    return 0;
}

struct ReportArgs {
    std::vector<std::string> files;
    std::string out;
};

int cmd_report(const ReportArgs& a) {
    std::vector<BenchRow> rows;
    for (const auto& f : a.files) {
        auto part = read_report(f);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const auto table = build_report(rows);
    std::cout << table.render();
    if (!a.out.empty()) write_file(a.out, table.to_csv());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate-assisted neuroevolution with Kriging and KPLS surrogates"};
    app.require_subcommand(1);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare", "Load, binarize, split and normalize a UCI dataset");
    prepare->add_option("--dataset", prep.dataset, "iris, yeast, ecoli or abalone")->required();
    prepare->add_option("--data-dir", prep.data_dir, "Directory holding the raw UCI files (default $SAEA_DATA_DIR or ./data)");
    prepare->add_option("--out", prep.out, "Output directory (default <data-dir>/prepared)");
    prepare->add_option("--seed", prep.seed, "Split seed");
    prepare->add_option("--train-fraction", prep.train_fraction, "Training fraction")->check(CLI::Range(0.0, 1.0));
    prepare->add_flag("--stratified", prep.stratified, "Stratified split");

    FitBenchArgs fb;
    auto* fit_bench_cmd = app.add_subcommand("fit-bench", "Time a surrogate fit on m fully trained networks");
    fit_bench_cmd->add_option("--dataset", fb.dataset)->required();
    fit_bench_cmd->add_option("--surrogate", fb.surrogate)->check(CLI::IsMember({"kriging", "kpls"}));
    fit_bench_cmd->add_option("--samples", fb.samples, "Number of networks m");
    fit_bench_cmd->add_option("--pls-components", fb.h, "KPLS components h");
    fit_bench_cmd->add_option("--budget-secs", fb.budget, "Wall-clock budget for the fit");
    fit_bench_cmd->add_option("--seed", fb.seed);
    fit_bench_cmd->add_option("--out", fb.out, "Report CSV to append to");
    fit_bench_cmd->add_option("--data-dir", fb.data_dir);
    fit_bench_cmd->add_option("--prepared", fb.prepared, "Directory of prepared datasets (default <data-dir>/prepared)");
    fit_bench_cmd->add_option("--epochs", fb.epochs, "Training epochs per network");
    fit_bench_cmd->add_option("--threads", fb.threads, "Training threads (0 = all cores)");
    fit_bench_cmd->add_flag("--omit-timings", fb.omit_timings, "Leave times out of the printed row (the report file keeps them)");

    EvolveArgs ev;
    auto* evolve = app.add_subcommand("evolve", "Run the surrogate-assisted evolution from a config file");
    evolve->add_option("--config", ev.config)->required()->check(CLI::ExistingFile);
    evolve->add_option("--out", ev.out, "Output directory for the JSON and CSV logs");
    evolve->add_option("--data-dir", ev.data_dir);
    evolve->add_option("--seed", ev.seed, "Override evolution.seed");
    evolve->add_option("--surrogate", ev.surrogate, "Override surrogate.kind")->check(CLI::IsMember({"kriging", "kpls"}));
    evolve->add_option("--pls-components", ev.h, "Override surrogate.h");
    evolve->add_option("--budget-secs", ev.budget, "Override surrogate.fit_budget_seconds");
    evolve->add_flag("--omit-timings", ev.omit_timings, "Leave timing fields out of the logs");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Render report CSVs as a table");
    report->add_option("files", rep.files, "Report CSV files")->required();
    report->add_option("--out", rep.out, "Write a plot-ready CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*prepare) return cmd_prepare(prep);
        if (*fit_bench_cmd) return cmd_fit_bench(fb);
        if (*evolve) return cmd_evolve(ev);
        if (*report) return cmd_report(rep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
