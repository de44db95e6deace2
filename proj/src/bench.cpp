#include "saea/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "saea/error.hpp"
#include "saea/keyvalue.hpp"
#include "saea/kpls.hpp"
#include "saea/kriging.hpp"
#include "saea/phenotype.hpp"

namespace saea {

namespace detail {
const std::map<std::string, std::string>& builtin_schema_map();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string shortest(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string display_name(const std::string& name) {
    std::string out = name;
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

}  // namespace

const std::vector<std::string>& curated_datasets() {
    static const std::vector<std::string> names{"iris", "yeast", "ecoli", "abalone"};
    return names;
}

const std::string& builtin_schema_text(const std::string& name) {
    const auto& map = detail::builtin_schema_map();
    const auto it = map.find(name);
    if (it == map.end()) throw SchemaError("no built-in schema for dataset '" + name + "'");
    return it->second;
}

Schema builtin_schema(const std::string& name) { return Schema::parse(builtin_schema_text(name)); }

std::filesystem::path resolve_data_dir(const std::string& fallback) {
    if (const char* env = std::getenv("SAEA_DATA_DIR"); env && *env) return env;
    return fallback;
}

Schema find_schema(const std::string& name, const std::filesystem::path& data_dir) {
    const auto local = data_dir / (name + ".schema");
    if (std::filesystem::exists(local)) return Schema::read(local);
    return builtin_schema(name);
}

PreparedSplit prepare_named(const std::string& name, const std::filesystem::path& data_dir, const SplitSpec& spec) {
    const Schema schema = find_schema(name, data_dir);
    const auto raw = data_dir / schema.file;
    if (!std::filesystem::exists(raw))
        throw std::runtime_error("raw data file not found: " + raw.string() + " (download the UCI file '" + schema.file +
                                 "' for dataset '" + name + "' into " + data_dir.string() + ")");
    return prepare_dataset(raw, schema, spec);
}

PreparedPaths prepared_paths(const std::filesystem::path& dir, const std::string& name) {
    return {dir / (name + ".train.txt"), dir / (name + ".test.txt")};
}

std::string host_descriptor() {
    std::string model = "unknown-cpu";
    std::ifstream in("/proc/cpuinfo");
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) model = trim(line.substr(colon + 1));
            break;
        }
    }
    std::string out = model + " (" + std::to_string(std::max(1u, std::thread::hardware_concurrency())) + " cores)";
    std::replace(out.begin(), out.end(), ',', ';');
    std::replace(out.begin(), out.end(), '\n', ' ');
    return out;
}

std::string BenchRow::to_csv_line(bool include_timings) const {
    std::ostringstream o;
    o << dataset << ',' << d << ',' << m << ',' << to_string(surrogate) << ',' << (h ? std::to_string(*h) : "") << ','
      << (include_timings ? fixed(fit_seconds, 6) : "") << ',' << (timeout ? shortest(*timeout) : "") << ','
      << (include_timings ? fixed(train_seconds, 6) : "") << ',' << seed << ',' << host;
    return o.str();
}

BenchRow BenchRow::parse_csv_line(const std::string& line) {
    const auto f = split_list(line, ',');
    if (f.size() != 10) throw SchemaError("expected 10 fields, got " + std::to_string(f.size()));
    auto to_size = [](const std::string& s, const char* what) {
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw SchemaError(std::string("bad ") + what + " '" + s + "'");
        }
    };
    auto to_real = [](const std::string& s, const char* what) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw SchemaError(std::string("bad ") + what + " '" + s + "'");
        }
    };
    BenchRow r;
    r.dataset = f[0];
    r.d = to_size(f[1], "d");
    r.m = to_size(f[2], "m");
    try {
        r.surrogate = surrogate_kind_from_string(f[3]);
    } catch (const ConfigError&) {
        throw SchemaError("bad surrogate '" + f[3] + "'");
    }
    if (!f[4].empty()) r.h = to_size(f[4], "h");
    r.fit_seconds = f[5].empty() ? 0.0 : to_real(f[5], "fit_seconds");
    if (!f[6].empty()) r.timeout = to_real(f[6], "timeout");
    r.train_seconds = f[7].empty() ? 0.0 : to_real(f[7], "train_seconds");
    r.seed = to_size(f[8], "seed");
    r.host = f[9];
    return r;
}

FitBenchData build_bench_data(const Dataset& train, const FitBenchOptions& options) {
    if (options.samples < 2) throw std::invalid_argument("fit-bench: need at least 2 samples");
    GridConfig grid = options.grid;
    grid.n_inputs = static_cast<int>(train.n_features());
    grid.n_outputs = train.n_classes;
    grid.validate();
    const TrainingSpec spec{options.epochs, options.learning_rate, options.batch_size};
    const std::size_t m = options.samples;
    std::vector<PhenotypeVector> phenotypes(m);
    std::vector<double> fitness(m);
    std::vector<std::exception_ptr> errors(m);

    auto work = [&](std::size_t i) {
        // Each network draws its genotype and SGD order from its own stream; a network whose
        // training diverges is redrawn from the same stream.
        Rng rng(options.seed ^ static_cast<std::uint64_t>(i));
        for (int attempt = 0;; ++attempt) {
            try {
                const auto trained = sgd_train(random_genotype(grid, rng), train, spec, rng).genotype;
                phenotypes[i] = extract(trained, train);
                fitness[i] = error_rate(trained, train);
                return;
            } catch (const EvaluationError&) {
                if (attempt >= 9) throw;
            }
        }
    };

    const auto t0 = Clock::now();
    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, m);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < m; i = next++) {
            try {
                work(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    FitBenchData out;
    out.train_seconds = seconds_since(t0);
    std::vector<const PhenotypeVector*> rows;
    for (const auto& p : phenotypes) rows.push_back(&p);
    out.phenotypes = stack_phenotypes(rows);
    out.fitness = Eigen::Map<Eigen::VectorXd>(fitness.data(), static_cast<Eigen::Index>(m));
    return out;
}

BenchRow time_surrogate_fit(const std::string& dataset, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            SurrogateKind kind, std::size_t h, double budget_seconds, std::uint64_t seed) {
    BenchRow row;
    row.dataset = dataset;
    row.d = static_cast<std::size_t>(x.cols());
    row.m = static_cast<std::size_t>(x.rows());
    row.surrogate = kind;
    if (kind == SurrogateKind::kpls) row.h = h;
    row.seed = seed;
    row.host = host_descriptor();
    FitSpec spec;
    spec.seed = seed;
    spec.budget_seconds = budget_seconds;
    const auto t0 = Clock::now();
    try {
        if (kind == SurrogateKind::kpls) {
            (void)fit_kpls(x, y, h, spec);
        } else {
            (void)fit_kriging(x, y, spec);
        }
        row.fit_seconds = seconds_since(t0);
    } catch (const FitTimeout& e) {
        row.fit_seconds = e.elapsed();
        row.timeout = budget_seconds;
    }
    return row;
}

BenchRow fit_bench(const Dataset& train, const FitBenchOptions& options) {
    const auto data = build_bench_data(train, options);
    auto row = time_surrogate_fit(options.dataset.empty() ? train.name : options.dataset, data.phenotypes, data.fitness,
                                  options.surrogate, options.h, options.budget_seconds, options.seed);
    row.train_seconds = data.train_seconds;
    return row;
}

void append_report_row(const std::filesystem::path& path, const BenchRow& row) {
    bool need_header = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    if (!need_header) {
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        if (trim(header) != kReportHeader) throw SchemaError(path.string() + ": not a report file (unexpected header)");
    }
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (need_header) out << kReportHeader << '\n';
    out << row.to_csv_line() << '\n';
}

std::vector<BenchRow> read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string() + ": cannot open report file");
    std::string line;
    if (!std::getline(in, line) || trim(line) != kReportHeader)
        throw SchemaError(path.string() + ": header does not match '" + std::string(kReportHeader) + "'");
    std::vector<BenchRow> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        try {
            rows.push_back(BenchRow::parse_csv_line(trim(line)));
        } catch (const SchemaError& e) {
            throw SchemaError(path.string() + " line " + std::to_string(number) + ": " + e.what());
        }
    }
    return rows;
}

ReportTable build_report(const std::vector<BenchRow>& rows) {
    std::vector<std::string> order;
    for (const auto& name : curated_datasets())
        if (std::any_of(rows.begin(), rows.end(), [&](const BenchRow& r) { return r.dataset == name; }))
            order.push_back(name);
    for (const auto& r : rows)
        if (std::find(order.begin(), order.end(), r.dataset) == order.end()) order.push_back(r.dataset);

    ReportTable table;
    for (const auto& name : order) {
        ReportTable::Line line;
        line.dataset = name;
        for (const auto& r : rows) {
            if (r.dataset != name) continue;
            line.d = r.d;
            auto& slot = r.surrogate == SurrogateKind::kpls ? line.kpls_seconds : line.kriging_seconds;
            slot = r.timeout ? std::nullopt : std::optional<double>(r.fit_seconds);
        }
        table.lines.push_back(std::move(line));
    }
    return table;
}

std::string format_hms(double seconds) {
    const long long total = std::llround(std::max(0.0, seconds));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", total / 3600, (total / 60) % 60, total % 60);
    return buf;
}

std::string ReportTable::render() const {
    std::vector<std::array<std::string, 4>> cells;
    cells.push_back({"Dataset", "Pheno. dist. vector", "KPLS", "Kriging"});
    for (const auto& l : lines)
        cells.push_back({display_name(l.dataset), std::to_string(l.d), l.kpls_seconds ? format_hms(*l.kpls_seconds) : "-",
                         l.kriging_seconds ? format_hms(*l.kriging_seconds) : "-"});
    std::array<std::size_t, 4> width{};
    for (const auto& row : cells)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream o;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            o << cells[r][c];
            if (c + 1 < 4) o << std::string(width[c] - cells[r][c].size() + 2, ' ');
        }
        o << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            o << std::string(total + 6, '-') << '\n';
        }
    }
    return o.str();
}

std::string ReportTable::to_csv() const {
    std::ostringstream o;
    o << "dataset,d,kpls_seconds,kriging_seconds\n";
    for (const auto& l : lines)
        o << l.dataset << ',' << l.d << ',' << (l.kpls_seconds ? fixed(*l.kpls_seconds, 6) : "") << ','
          << (l.kriging_seconds ? fixed(*l.kriging_seconds, 6) : "") << '\n';
    return o.str();
}

}  // namespace saea
