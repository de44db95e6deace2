// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
//
//   acceptance              every criterion except 7c
//   acceptance --only 7c    the two-hour Kriging budget run
//   acceptance --only 1,8   a subset

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "saea/bench.hpp"
#include "saea/cgp_ann.hpp"
#include "saea/error.hpp"
#include "saea/evolution.hpp"
#include "saea/kpls.hpp"
#include "saea/kriging.hpp"
#include "saea/pls.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace saea;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

const fs::path kIris = fs::path(SAEA_TEST_DATA_DIR) / "iris.data";

const fs::path& data_dir() {
    static const fs::path dir = oracle::fixture_data_dir(kIris, "acceptance");
    return dir;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "saea-acceptance";
    fs::create_directories(dir);
    const auto p = dir / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct CliResult {
    int status = -1;
    std::string output;
};

CliResult cli(const std::string& args) {
    static int counter = 0;
    const auto capture = scratch("cli-" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string("\"") + SAEA_CLI_PATH + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(capture)};
}

// ---- 1 ----

Outcome phenotype_lengths() {
    const std::map<std::string, std::size_t> expected{{"iris", 336}, {"yeast", 1338}, {"ecoli", 2016}, {"abalone", 6264}};
    Outcome o{true, ""};
    for (const auto& name : curated_datasets()) {
        const auto d = prepare_named(name, data_dir(), {}).phenotype_length();
        o.pass = o.pass && d == expected.at(name);
        o.detail += name + " " + std::to_string(d) + " (want " + std::to_string(expected.at(name)) + ") ";
    }
    const char* env = std::getenv("SAEA_DATA_DIR");
    o.detail += (env && *env) ? "[UCI files from $SAEA_DATA_DIR where present]" : "[yeast/ecoli/abalone: stand-in files]";
    return o;
}

// ---- 2 ----

Outcome kriging_oracle() {
    // Instances are drawn until cond(R + nI) <= 1e6 on the model's normalised inputs; a
    // double-precision solve cannot promise 1e-8 forward error beyond that.
    synth::Rng rng(2024);
    double worst = 0.0;
    int redrawn = 0;
    for (int t = 0; t < 20; ++t) {
        auto inst = synth::small_instance(rng);
        auto model = condition_kriging(inst.x, inst.y, inst.theta, 1e-10, 1e-10);
        while (oracle::correlation_condition(model.x, inst.theta, 1e-10) > 1e6) {
            ++redrawn;
            inst = synth::small_instance(rng);
            model = condition_kriging(inst.x, inst.y, inst.theta, 1e-10, 1e-10);
        }
        const auto terms =
            concentrated_log_likelihood(CorrelationGeometry::anisotropic(model.x), inst.theta, model.y, 1e-10, 1e-10);
        oracle::BruteKriging brute(oracle::to_rows(model.x), {model.y.data(), model.y.data() + model.y.size()},
                                   {inst.theta.data(), inst.theta.data() + inst.theta.size()}, 1e-10);
        worst = std::max({worst, rel_diff(terms.value, brute.likelihood), rel_diff(terms.beta, brute.beta),
                          rel_diff(terms.sigma2, brute.sigma2)});

        // Predictions come back on the original scale; the oracle works on the normalised one.
        const auto q = synth::uniform(5, inst.x.cols(), rng, -2.0, 2.0);
        const double s2 = model.norm.y_scale * model.norm.y_scale;
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const Eigen::VectorXd qi = q.row(i).transpose();
            const Eigen::VectorXd qn = (qi - model.norm.x_mean).cwiseQuotient(model.norm.x_scale);
            const auto [mean, var] = brute.predict({qn.data(), qn.data() + qn.size()});
            const auto p = model.predict(qi);
            worst = std::max(worst, rel_diff(p.mean, model.norm.y_mean + model.norm.y_scale * mean));
            worst = std::max(worst, rel_diff(p.variance, s2 * var));
        }
    }
    return {worst <= 1e-8, "20 instances (" + std::to_string(redrawn) +
                               " redrawn for cond(R) > 1e6), likelihood/beta/sigma2 and 100 predictions, worst relative "
                               "difference " + fmt("%.2e", worst) + " (tolerance 1e-8)"};
}

// ---- 3 ----

Outcome interpolation() {
    synth::Rng rng(303);
    std::uniform_int_distribution<int> m_dist(5, 20), d_dist(1, 4);
    int failures = 0, kpls_models = 0;
    double worst_mean = 0.0, worst_var = 0.0;
    for (int t = 0; t < 50; ++t) {
        const bool kpls = t % 5 == 4;
        const int m = m_dist(rng);
        const Eigen::Index d = kpls ? 20 : d_dist(rng);
        const Eigen::MatrixXd x = synth::uniform(m, d, rng);
        const auto y = synth::smooth_target(x, rng);
        FitSpec spec;
        spec.seed = static_cast<std::uint64_t>(t);
        const auto model = kpls ? fit_kpls(x, y, 2, spec) : fit_kriging(x, y, spec);
        kpls_models += kpls;
        const double n = model.kernel.nugget;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto p = model.predict(Eigen::VectorXd(x.row(i).transpose()));
            const double em = std::abs(p.mean - y(i)) / (n * y.norm());
            const double ev = p.variance / (n * model.sigma2());
            worst_mean = std::max(worst_mean, em);
            worst_var = std::max(worst_var, ev);
            failures += em > 10.0 || ev > 10.0;
        }
    }
    return {failures == 0, "50 fitted models (" + std::to_string(kpls_models) + " KPLS), worst |mean - y| = " +
                               fmt("%.3g", worst_mean) + " nugget*|y|, worst variance = " + fmt("%.3g", worst_var) +
                               " nugget*sigma2 (bound 10)"};
}

// ---- 4 ----

Outcome pls() {
    auto gaussian = [](Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
        synth::Rng rng(seed);
        return synth::gaussian(n, p, rng);
    };
    auto centred = [](Eigen::MatrixXd x) {
        x.rowwise() -= x.colwise().mean();
        return x;
    };

    double ols_gap = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(seed % 6);
        const Eigen::MatrixXd x = centred(gaussian(40, d, 400 + seed));
        Eigen::MatrixXd y = x * Eigen::VectorXd::LinSpaced(d, -1.0, 2.0) + gaussian(40, 1, 500 + seed);
        y = centred(y);
        const auto coef = fit_pls(x, y.col(0), static_cast<std::size_t>(d)).coefficients();
        const auto ref = oracle::ols(x, y.col(0));
        for (Eigen::Index i = 0; i < d; ++i)
            ols_gap = std::max(ols_gap, std::abs(coef(i) - ref[static_cast<std::size_t>(i)]));
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(10);
    beta(0) = 3.0;
    beta(1) = -2.0;
    double cosine = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd x = centred(gaussian(2000, 10, 600 + seed));
        const Eigen::VectorXd r = fit_pls(x, x * beta, 1).rotation.col(0);
        cosine = std::min(cosine, std::abs(r.dot(beta)) / (r.norm() * beta.norm()));
    }

    double off_diagonal = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd x = centred(gaussian(50, 8, 700 + seed));
        Eigen::MatrixXd y = x.rowwise().sum() + x.col(2).cwiseAbs2() + gaussian(50, 1, 800 + seed);
        y = centred(y);
        const auto p = fit_pls(x, y.col(0), 5);
        Eigen::MatrixXd gram = p.scores.transpose() * p.scores;
        gram.diagonal().setZero();
        off_diagonal = std::max(off_diagonal, gram.cwiseAbs().maxCoeff());
    }
    const bool pass = ols_gap <= 1e-6 && cosine >= 0.99 && off_diagonal <= 1e-8;
    return {pass, "OLS gap at h=d " + fmt("%.2e", ols_gap) + " (<= 1e-6), direction cosine " + fmt("%.6f", cosine) +
                      " (>= 0.99), max |t_a . t_b| " + fmt("%.2e", off_diagonal) + " (<= 1e-8)"};
}

// ---- 5 ----

Outcome kpls_identity() {
    synth::Rng rng(505);
    double worst = 0.0;
    for (Eigen::Index d = 1; d <= 3; ++d) {
        const auto x = synth::uniform(15, d, rng);
        const auto y = synth::smooth_target(x, rng);
        const auto plain = fit_kriging(x, y);
        const auto forced = fit_kpls_with_rotation(x, y, Eigen::MatrixXd::Identity(d, d));
        const auto q = synth::uniform(20, d, rng);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const Eigen::VectorXd qi = q.row(i).transpose();
            const auto a = plain.predict(qi), b = forced.predict(qi);
            worst = std::max(worst, std::abs(a.mean - b.mean) / std::max(1.0, std::abs(a.mean)));
            worst = std::max(worst, std::abs(a.variance - b.variance) / std::max(1.0, a.variance));
        }
    }
    return {worst <= 1e-8, "d = h = 1, 2, 3 with 20 test points each, worst difference " + fmt("%.2e", worst) +
                               " (tolerance 1e-8)"};
}

// ---- 6 ----

Outcome gradient_check() {
    Rng rng(606);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    std::size_t checked = 0;
    for (int t = 0; t < 100; ++t) {
        GridConfig c;
        c.rows = 2 + t % 3;
        c.cols = 2 + t % 4;
        c.levels_back = c.cols;
        c.arity = 1 + t % 3;
        c.n_inputs = 3;
        c.n_outputs = 3;
        const auto genotype = random_genotype(c, rng);
        Eigen::MatrixXd x(4, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
        const std::vector<int> labels{0, 1, 2, 1};
        const auto grad = loss_and_gradient(genotype, x, labels);
        const double h = 1e-5;
        auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); };
        auto check = [&](std::vector<double> Genotype::*genes, const std::vector<double>& analytic) {
            for (std::size_t i = 0; i < (genotype.*genes).size(); ++i) {
                auto gp = genotype, gm = genotype;
                (gp.*genes)[i] += h;
                (gm.*genes)[i] -= h;
                const double fd = (oracle::loss(gp, x, labels) - oracle::loss(gm, x, labels)) / (2 * h);
                worst = std::max(worst, rel(analytic[i], fd));
                ++checked;
            }
        };
        check(&Genotype::weight_genes, grad.weights);
    }
    return {worst < 1e-4, "100 graphs, " + std::to_string(checked) + " weights, max relative error " +
                              fmt("%.2e", worst) + " (< 1e-4)"};
}

// ---- 7 ----

// m = 100 phenotype-like rows of length n * c with a synthetic fitness target.
struct BenchInput {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

BenchInput bench_input(Eigen::Index n_instances, Eigen::Index n_classes, std::uint64_t seed) {
    synth::Rng rng(seed);
    BenchInput b;
    b.x = synth::softmax_rows(100, n_instances, n_classes, rng);
    b.y = synth::smooth_target(b.x, rng);
    return b;
}

Outcome kpls_large() {
    const auto in = bench_input(3132, 2, 71);
    const auto row = time_surrogate_fit("abalone", in.x, in.y, SurrogateKind::kpls, 2, 1800.0, 0);
    const bool pass = !row.timeout && row.d == 6264;
    return {pass, "KPLS(h=2) at d = " + std::to_string(row.d) + ", m = 100: " +
                      (row.timeout ? std::string("TIMEOUT") : format_hms(row.fit_seconds) + " (" + fmt("%.2f", row.fit_seconds) + " s)") +
                      " (limit 00:30:00)"};
}

Outcome ratio_at_336() {
    const auto in = bench_input(112, 3, 72);
    const auto kpls = time_surrogate_fit("iris", in.x, in.y, SurrogateKind::kpls, 2, 7200.0, 0);
    const auto kriging = time_surrogate_fit("iris", in.x, in.y, SurrogateKind::kriging, 2, 7200.0, 0);
    if (kpls.timeout || kriging.timeout)
        return {false, std::string("unexpected TIMEOUT for ") + (kpls.timeout ? "KPLS" : "Kriging")};
    const double ratio = kriging.fit_seconds / kpls.fit_seconds;
    return {ratio >= 20.0, "d = 336, m = 100: Kriging " + fmt("%.2f", kriging.fit_seconds) + " s, KPLS " +
                               fmt("%.3f", kpls.fit_seconds) + " s, ratio " + fmt("%.0f", ratio) + " (>= 20)"};
}

Outcome timeout_at_2016() {
    const double budget = 7200.0;
    const auto in = bench_input(252, 8, 73);
    const auto kriging = time_surrogate_fit("ecoli", in.x, in.y, SurrogateKind::kriging, 2, budget, 0);
    const auto kpls = time_surrogate_fit("ecoli", in.x, in.y, SurrogateKind::kpls, 2, budget, 0);
    const bool pass = kriging.timeout.has_value() && !kpls.timeout.has_value();
    return {pass, "d = " + std::to_string(kriging.d) + ", m = 100, budget " + format_hms(budget) + ": Kriging " +
                      (kriging.timeout ? "TIMEOUT after " + format_hms(kriging.fit_seconds)
                                       : "completed in " + format_hms(kriging.fit_seconds)) +
                      ", KPLS " + (kpls.timeout ? std::string("TIMEOUT") : "completed in " + fmt("%.2f", kpls.fit_seconds) + " s")};
}

// ---- 8 ----

// Seconds per likelihood evaluation for each m. Batches of at least 0.2 s are interleaved
// across the sizes so slow drift in machine load hits all of them alike; the fastest batch
// per size is kept.
std::vector<double> seconds_per_evaluation(const std::vector<Eigen::Index>& sizes, Eigen::Index d, synth::Rng& rng) {
    struct Problem {
        CorrelationGeometry geometry;
        Eigen::VectorXd y;
    };
    std::vector<Problem> problems;
    for (auto m : sizes) {
        const auto x = synth::uniform(m, d, rng);
        problems.push_back({CorrelationGeometry::anisotropic(x), synth::smooth_target(x, rng)});
    }
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(d, 5.0);
    std::vector<double> best(sizes.size(), std::numeric_limits<double>::infinity());
    double sink = 0.0;
    for (int round = 0; round < 9; ++round)
        for (std::size_t i = 0; i < problems.size(); ++i) {
            int n = 0;
            const auto t0 = Clock::now();
            do {
                sink += concentrated_log_likelihood(problems[i].geometry, theta, problems[i].y).value;
                ++n;
            } while (seconds_since(t0) < 0.2);
            best[i] = std::min(best[i], seconds_since(t0) / n);
        }
    if (!std::isfinite(sink)) throw std::runtime_error("non-finite likelihood");
    return best;
}

Outcome cubic_scaling() {
    synth::Rng rng(808);
    const Eigen::Index d = 2;
    const auto t = seconds_per_evaluation({100, 200, 400}, d, rng);
    const double ratio = t[2] / t[1];
    return {ratio >= 6.0, "d = 2, seconds per evaluation m=100 " + fmt("%.3e", t[0]) + ", m=200 " + fmt("%.3e", t[1]) +
                              ", m=400 " + fmt("%.3e", t[2]) + "; t200/t100 " + fmt("%.2f", t[1] / t[0]) +
                              ", t400/t200 " + fmt("%.2f", ratio) + " (>= 6)"};
}

// ---- 9 ----

Outcome end_to_end() {
    auto config = EvolutionConfig::read(fs::path(SAEA_SOURCE_DIR) / "configs" / "iris_kpls.ini");
    if (config.mu != 5 || config.lambda != 20 || config.k != 5 || config.generations != 10 ||
        config.surrogate != SurrogateKind::kpls)
        return {false, "configs/iris_kpls.ini does not hold mu=5, lambda=20, k=5, G=10, kpls"};
    const auto prepared = prepare_named(config.data_dataset, data_dir(),
                                        {config.data_train_fraction, config.data_split_seed, false});
    Dataset train = prepared.train;
    train.name = config.data_dataset;
    const auto t0 = Clock::now();
    const auto log = run(config, train);
    const double elapsed = seconds_since(t0);
    if (log.status != "ok") return {false, "run aborted: " + log.error};

    bool monotone = true;
    for (std::size_t g = 1; g < log.generations.size(); ++g)
        monotone = monotone && log.generations[g].best_fitness <= log.generations[g - 1].best_fitness;
    std::vector<double> predicted, truth;
    for (const auto& rec : log.generations)
        for (const auto& p : rec.promoted) {
            predicted.push_back(p.predicted_mean);
            truth.push_back(p.true_fitness);
        }
    const auto rho = spearman_correlation(predicted, truth);
    const bool pass = monotone && rho && *rho > 0.0 && elapsed < 1800.0;
    return {pass, "best error " + fmt("%.4f", log.generations.front().best_fitness) + " -> " +
                      fmt("%.4f", log.generations.back().best_fitness) + (monotone ? " (monotone)" : " (NOT monotone)") +
                      ", Spearman over " + std::to_string(predicted.size()) + " promoted offspring " +
                      (rho ? fmt("%.3f", *rho) : std::string("undefined")) + " (> 0), run time " + format_hms(elapsed) +
                      " (< 00:30:00)"};
}

// ---- 10 ----

Outcome determinism() {
    const std::string dir = data_dir().string();
    std::vector<std::string> differing;
    auto same = [&](const std::string& what, const std::string& a, const std::string& b) {
        if (a != b) differing.push_back(what);
    };
    int failed_runs = 0;
    auto run_cli = [&](const std::string& args) {
        auto r = cli(args);
        failed_runs += r.status != 0;
        return r.output;
    };

    // prepare
    const auto p1 = scratch("det-prep-1"), p2 = scratch("det-prep-2");
    for (const auto& name : curated_datasets()) {
        const auto o1 = run_cli("prepare --dataset " + name + " --data-dir \"" + dir + "\" --out \"" + p1.string() + "\"");
        const auto o2 = run_cli("prepare --dataset " + name + " --data-dir \"" + dir + "\" --out \"" + p2.string() + "\"");
        same("prepare " + name + " stdout", o1, o2);
        same("prepare " + name + " train file", slurp(p1 / (name + ".train.txt")), slurp(p2 / (name + ".train.txt")));
        same("prepare " + name + " test file", slurp(p1 / (name + ".test.txt")), slurp(p2 / (name + ".test.txt")));
    }

    // fit-bench, both kinds
    for (const char* kind : {"kpls", "kriging"}) {
        const std::string args = std::string("fit-bench --dataset iris --surrogate ") + kind +
                                 " --samples 10 --epochs 5 --seed 4 --omit-timings --prepared \"" + p1.string() + "\"";
        same(std::string("fit-bench ") + kind + " stdout", run_cli(args), run_cli(args));
    }

    // evolve
    const auto config = scratch("det.ini");
    std::ofstream(config) << "[evolution]\nmu = 3\nlambda = 8\nk = 3\ngenerations = 2\ninit_size = 20\ns = 25\nseed = 9\n"
                             "[training]\ne_cheap = 3\ne_full = 10\n[data]\ndataset = iris\n";
    const auto e1 = scratch("det-evolve-1"), e2 = scratch("det-evolve-2");
    for (const auto& out : {e1, e2})
        run_cli("evolve --config \"" + config.string() + "\" --data-dir \"" + dir + "\" --out \"" + out.string() +
                "\" --omit-timings");
    same("evolve JSON log", slurp(e1 / "det.json"), slurp(e2 / "det.json"));
    same("evolve CSV log", slurp(e1 / "det.csv"), slurp(e2 / "det.csv"));
    if (slurp(e1 / "det.csv").empty()) differing.push_back("evolve wrote no log");

    // report
    const auto report = scratch("det-report.csv");
    for (const char* kind : {"kpls", "kriging"})
        run_cli(std::string("fit-bench --dataset iris --surrogate ") + kind + " --samples 10 --epochs 5 --prepared \"" +
                p1.string() + "\" --out \"" + report.string() + "\"");
    const auto c1 = scratch("det-table-1.csv"), c2 = scratch("det-table-2.csv");
    same("report stdout", run_cli("report \"" + report.string() + "\" --out \"" + c1.string() + "\""),
         run_cli("report \"" + report.string() + "\" --out \"" + c2.string() + "\""));
    same("report CSV", slurp(c1), slurp(c2));

    std::string detail = "prepare x4, fit-bench x2, evolve, report each run twice: ";
    if (differing.empty()) {
        detail += "identical non-timing output";
    } else {
        detail += "differences in";
        for (const auto& d : differing) detail += " [" + d + "]";
    }
    if (failed_runs) detail += ", " + std::to_string(failed_runs) + " command(s) exited nonzero";
    return {differing.empty() && failed_runs == 0, detail};
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<Outcome()> check;
    bool long_running = false;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"1", "phenotype-vector lengths", phenotype_lengths},
        {"2", "Kriging likelihood and predictions vs explicit-inverse oracle", kriging_oracle},
        {"3", "interpolation at training points", interpolation},
        {"4", "PLS correctness", pls},
        {"5", "identity-rotation KPLS equals Kriging", kpls_identity},
        {"6", "backprop vs central differences", gradient_check},
        {"7a", "KPLS fit at d = 6264 within 30 minutes", kpls_large},
        {"7b", "Kriging / KPLS fit-time ratio at d = 336", ratio_at_336},
        {"7c", "Kriging TIMEOUT at d >= 1338 while KPLS completes", timeout_at_2016, true},
        {"8", "cubic growth of likelihood cost in m", cubic_scaling},
        {"9", "end-to-end Iris run", end_to_end},
        {"10", "determinism of CLI outputs", determinism},
    };

    std::set<std::string> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            for (std::string id; std::getline(list, id, ',');) only.insert(id);
        } else {
            std::cerr << "usage: acceptance [--only ID[,ID...]]\n";
            return 2;
        }
    }
    for (const auto& id : only)
        if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.id == id; })) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }

    std::cout << "host: " << host_descriptor() << "\n" << std::flush;
    int failures = 0;
    for (const auto& c : criteria) {
        if (only.empty() ? c.long_running : only.count(c.id) == 0) {
            if (only.empty())
                std::cout << "[----] criterion " << c.id << ": " << c.title
                          << ": run separately with --only " << c.id << "\n";
            continue;
        }
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title << ": " << o.detail
                  << " [" << fmt("%.1f", seconds_since(t0)) << " s]\n"
                  << std::flush;
    }
    return failures ? 1 : 0;
}
