#include "saea/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "saea/error.hpp"
#include "saea/kpls.hpp"

namespace saea {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The exception from the lowest
// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    std::vector<std::exception_ptr> errors(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Rng individual_rng(const EvolutionConfig& c, std::size_t id) { return Rng(c.seed ^ static_cast<std::uint64_t>(id)); }

TrainingSpec cheap_spec(const EvolutionConfig& c) { return {c.e_cheap, c.learning_rate, c.batch_size}; }
TrainingSpec rest_spec(const EvolutionConfig& c) { return {c.e_full - c.e_cheap, c.learning_rate, c.batch_size}; }

// One network's training. The cheap phase and the remainder share one RNG stream, so
// cheap + rest is the same computation as e_full epochs in one call.
struct Candidate {
    std::size_t id = 0;
    Genotype genotype;
    Rng rng;
    std::optional<PhenotypeVector> phenotype;
    std::optional<double> fitness;
    std::string failure;
};

void cheap_train(Candidate& c, const EvolutionConfig& config, const Dataset& train) {
    try {
        c.genotype = sgd_train(c.genotype, train, cheap_spec(config), c.rng).genotype;
        c.phenotype = extract(c.genotype, train);
    } catch (const EvaluationError& e) {
        c.failure = e.what();
    }
}

void finish_train(Candidate& c, const EvolutionConfig& config, const Dataset& train) {
    try {
        c.genotype = sgd_train(c.genotype, train, rest_spec(config), c.rng).genotype;
        c.fitness = error_rate(c.genotype, train);
    } catch (const EvaluationError& e) {
        c.failure = e.what();
    }
}

struct SurrogateFit {
    KrigingModel model;
    double seconds = 0.0;
    std::size_t samples = 0;
    std::vector<std::string> warnings;
};

SurrogateFit fit_surrogate(const Archive& archive, const EvolutionConfig& config) {
    const auto entries = archive.recent(config.s);
    std::vector<const PhenotypeVector*> rows;
    Eigen::VectorXd y(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        rows.push_back(&entries[i]->phenotype);
        y(static_cast<Eigen::Index>(i)) = entries[i]->true_fitness;
    }
    const Eigen::MatrixXd x = stack_phenotypes(rows);
    FitSpec spec;
    spec.seed = config.seed;
    spec.budget_seconds = config.fit_budget_seconds;

    SurrogateFit out;
    out.samples = entries.size();
    const auto t0 = Clock::now();
    if (config.surrogate == SurrogateKind::kriging) {
        out.model = fit_kriging(x, y, spec);
    } else {
        std::size_t h = std::min({config.h, static_cast<std::size_t>(x.cols()), entries.size() - 1});
        if (h < config.h) out.warnings.push_back("pls components reduced to " + std::to_string(h) + " by sample size");
        while (true) {
            try {
                out.model = fit_kpls(x, y, h, spec);
                break;
            } catch (const DegenerateComponentError& e) {
                if (e.component() <= 1) throw;
                h = e.component() - 1;
                out.warnings.push_back(std::string(e.what()) + "; refitting with h=" + std::to_string(h));
            }
        }
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

void sort_parents(std::vector<Individual>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Individual& a, const Individual& b) {
        if (*a.true_fitness != *b.true_fitness) return *a.true_fitness < *b.true_fitness;
        return a.id < b.id;
    });
}

Individual evaluated_individual(Candidate& c) {
    Individual ind;
    ind.id = c.id;
    ind.genotype = std::move(c.genotype);
    ind.phenotype = std::move(c.phenotype);
    ind.true_fitness = c.fitness;
    ind.evaluated = true;
    return ind;
}

void record_population(GenerationRecord& rec, const std::vector<Individual>& parents) {
    rec.best_fitness = parents.empty() ? 0.0 : *parents.front().true_fitness;
    double sum = 0.0;
    for (const auto& p : parents) sum += *p.true_fitness;
    rec.mean_fitness = parents.empty() ? 0.0 : sum / static_cast<double>(parents.size());
}

GridConfig grid_for(const EvolutionConfig& config, const Dataset& train) {
    GridConfig g = config.grid;
    g.n_inputs = static_cast<int>(train.n_features());
    g.n_outputs = train.n_classes;
    g.validate();
    return g;
}

// ---- config parsing ----

std::uint64_t get_u64(const KeyValueFile& kv, const std::string& key, std::uint64_t fallback) {
    const auto v = kv.find(key);
    if (!v || v->empty()) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
        throw ConfigError(key, "expected non-negative integer, got '" + *v + "'");
    return out;
}

std::size_t get_size(const KeyValueFile& kv, const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(get_u64(kv, key, fallback));
}

const std::vector<std::string> kKnownKeys = {
    "evolution.mu",        "evolution.lambda",   "evolution.generations",      "evolution.k",
    "evolution.s",         "evolution.init_size", "evolution.seed",            "evolution.threads",
    "evolution.checkpoint_every", "evolution.checkpoint_path",
    "surrogate.kind",      "surrogate.h",        "surrogate.fit_budget_seconds",
    "training.e_cheap",    "training.e_full",    "training.learning_rate",     "training.batch_size",
    "mutation.connection", "mutation.function",  "mutation.weight_reset",
    "grid.rows",           "grid.cols",          "grid.levels_back",           "grid.arity",
    "grid.functions",
    "data.dataset",        "data.data_dir",      "data.train_fraction",        "data.split_seed",
};

// ---- log serialisation ----

json record_json(const GenerationRecord& r, bool timings) {
    json j;
    j["generation"] = r.generation;
    j["best_fitness"] = r.best_fitness;
    j["mean_fitness"] = r.mean_fitness;
    if (timings) j["surrogate_fit_seconds"] = r.surrogate_fit_seconds;
    j["k"] = r.k;
    j["s"] = r.s;
    json promoted = json::array();
    for (const auto& p : r.promoted)
        promoted.push_back({{"id", p.id},
                            {"predicted_mean", p.predicted_mean},
                            {"predicted_variance", p.predicted_variance},
                            {"true_fitness", p.true_fitness}});
    j["promoted"] = std::move(promoted);
    j["warnings"] = r.warnings;
    return j;
}

GenerationRecord record_from_json(const json& j) {
    GenerationRecord r;
    r.generation = j.at("generation").get<std::size_t>();
    r.best_fitness = j.at("best_fitness").get<double>();
    r.mean_fitness = j.at("mean_fitness").get<double>();
    r.surrogate_fit_seconds = j.value("surrogate_fit_seconds", 0.0);
    r.k = j.at("k").get<std::size_t>();
    r.s = j.at("s").get<std::size_t>();
    for (const auto& p : j.at("promoted"))
        r.promoted.push_back({p.at("id").get<std::size_t>(), p.at("predicted_mean").get<double>(),
                              p.at("predicted_variance").get<double>(), p.at("true_fitness").get<double>()});
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

RunLog make_log(const EvolutionConfig& config, const Dataset& train, const EvolutionState& state) {
    RunLog log;
    log.config_ini = config.to_ini();
    log.seed = config.seed;
    log.dataset = train.name;
    log.phenotype_length = train.size() * static_cast<std::size_t>(train.n_classes);
    log.generations = state.history;
    std::vector<double> predicted, truth;
    for (const auto& g : state.history)
        for (const auto& p : g.promoted) {
            predicted.push_back(p.predicted_mean);
            truth.push_back(p.true_fitness);
        }
    log.spearman = spearman_correlation(predicted, truth);
    return log;
}

RunLog continue_run(EvolutionState& state, const EvolutionConfig& config, const Dataset& train,
                    const std::function<void(const RunLog&)>& on_generation) {
    try {
        while (state.generation < config.generations) {
            step(state, config, train);
            if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() &&
                state.generation % config.checkpoint_every == 0)
                save_checkpoint(state, config, config.checkpoint_path);
            if (on_generation) on_generation(make_log(config, train, state));
        }
    } catch (const std::exception& e) {
        auto log = make_log(config, train, state);
        log.status = "aborted";
        log.error = e.what();
        return log;
    }
    return make_log(config, train, state);
}

}  // namespace

std::string to_string(SurrogateKind k) { return k == SurrogateKind::kriging ? "kriging" : "kpls"; }

SurrogateKind surrogate_kind_from_string(const std::string& s) {
    if (s == "kriging") return SurrogateKind::kriging;
    if (s == "kpls") return SurrogateKind::kpls;
    throw ConfigError("surrogate.kind", "expected kriging or kpls, got '" + s + "'");
}

void EvolutionConfig::validate() const {
    if (mu < 1) throw ConfigError("evolution.mu", "must be >= 1");
    if (lambda < 1) throw ConfigError("evolution.lambda", "must be >= 1");
    if (k < 1) throw ConfigError("evolution.k", "must be >= 1 (k = 0 would starve the archive)");
    if (k > lambda) throw ConfigError("evolution.k", "must not exceed lambda");
    if (s < 25 || s > 200) throw ConfigError("evolution.s", "must lie in [25, 200]");
    if (init_size < 2) throw ConfigError("evolution.init_size", "must be >= 2");
    if (init_size < mu) throw ConfigError("evolution.init_size", "must be >= mu");
    if (h < 1 || h > 4) throw ConfigError("surrogate.h", "must lie in [1, 4]");
    if (e_cheap < 0) throw ConfigError("training.e_cheap", "must be >= 0");
    if (e_full < e_cheap) throw ConfigError("training.e_full", "must be >= e_cheap");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("training.learning_rate", "must be positive");
    if (batch_size < 1) throw ConfigError("training.batch_size", "must be >= 1");
    if (!(mutation.connection >= 0.0 && mutation.connection <= 1.0))
        throw ConfigError("mutation.connection", "must lie in [0, 1]");
    if (!(mutation.function >= 0.0 && mutation.function <= 1.0))
        throw ConfigError("mutation.function", "must lie in [0, 1]");
    if (!(mutation.weight_reset >= 0.0 && mutation.weight_reset <= 1.0))
        throw ConfigError("mutation.weight_reset", "must lie in [0, 1]");
    if (fit_budget_seconds && !(*fit_budget_seconds > 0.0))
        throw ConfigError("surrogate.fit_budget_seconds", "must be positive");
    if (!(data_train_fraction > 0.0 && data_train_fraction < 1.0))
        throw ConfigError("data.train_fraction", "must lie in (0, 1)");
    if (grid.rows < 1) throw ConfigError("grid.rows", "must be >= 1");
    if (grid.cols < 1) throw ConfigError("grid.cols", "must be >= 1");
    if (grid.levels_back < 1 || grid.levels_back > grid.cols)
        throw ConfigError("grid.levels_back", "must lie in [1, cols]");
    if (grid.arity < 1) throw ConfigError("grid.arity", "must be >= 1");
    if (grid.functions.empty()) throw ConfigError("grid.functions", "must not be empty");
}

EvolutionConfig EvolutionConfig::from_keyvalue(const KeyValueFile& kv) {
    if (const auto unknown = kv.unknown_keys(kKnownKeys); !unknown.empty())
        throw ConfigError(unknown.front(), "unknown key");
    EvolutionConfig c;
    c.mu = get_size(kv, "evolution.mu", c.mu);
    c.lambda = get_size(kv, "evolution.lambda", c.lambda);
    c.generations = get_size(kv, "evolution.generations", c.generations);
    c.k = get_size(kv, "evolution.k", c.k);
    c.s = get_size(kv, "evolution.s", c.s);
    c.init_size = get_size(kv, "evolution.init_size", c.init_size);
    c.seed = get_u64(kv, "evolution.seed", c.seed);
    c.threads = get_size(kv, "evolution.threads", c.threads);
    c.checkpoint_every = get_size(kv, "evolution.checkpoint_every", c.checkpoint_every);
    c.checkpoint_path = kv.get_string("evolution.checkpoint_path", c.checkpoint_path);
    c.surrogate = surrogate_kind_from_string(kv.get_string("surrogate.kind", to_string(c.surrogate)));
    c.h = get_size(kv, "surrogate.h", c.h);
    if (kv.contains("surrogate.fit_budget_seconds")) c.fit_budget_seconds = kv.get_real("surrogate.fit_budget_seconds", 0.0);
    c.e_cheap = static_cast<int>(kv.get_int("training.e_cheap", c.e_cheap));
    c.e_full = static_cast<int>(kv.get_int("training.e_full", c.e_full));
    c.learning_rate = kv.get_real("training.learning_rate", c.learning_rate);
    c.batch_size = static_cast<int>(kv.get_int("training.batch_size", c.batch_size));
    c.mutation.connection = kv.get_real("mutation.connection", c.mutation.connection);
    c.mutation.function = kv.get_real("mutation.function", c.mutation.function);
    c.mutation.weight_reset = kv.get_real("mutation.weight_reset", c.mutation.weight_reset);
    c.grid.rows = static_cast<int>(kv.get_int("grid.rows", c.grid.rows));
    c.grid.cols = static_cast<int>(kv.get_int("grid.cols", c.grid.cols));
    c.grid.levels_back = static_cast<int>(kv.get_int("grid.levels_back", c.grid.levels_back));
    c.grid.arity = static_cast<int>(kv.get_int("grid.arity", c.grid.arity));
    if (kv.contains("grid.functions")) {
        c.grid.functions.clear();
        for (const auto& f : kv.get_list("grid.functions")) {
            try {
                c.grid.functions.push_back(activation_from_string(f));
            } catch (const std::exception&) {
                throw ConfigError("grid.functions", "unknown activation '" + f + "'");
            }
        }
    }
    c.data_dataset = kv.get_string("data.dataset", c.data_dataset);
    c.data_dir = kv.get_string("data.data_dir", c.data_dir);
    c.data_train_fraction = kv.get_real("data.train_fraction", c.data_train_fraction);
    c.data_split_seed = get_u64(kv, "data.split_seed", c.data_split_seed);
    c.validate();
    return c;
}

EvolutionConfig EvolutionConfig::read(const std::filesystem::path& path) {
    return from_keyvalue(KeyValueFile::read(path));
}

std::string EvolutionConfig::to_ini() const {
    std::ostringstream o;
    o << "[evolution]\nmu = " << mu << "\nlambda = " << lambda << "\ngenerations = " << generations << "\nk = " << k
      << "\ns = " << s << "\ninit_size = " << init_size << "\nseed = " << seed << "\nthreads = " << threads
      << "\ncheckpoint_every = " << checkpoint_every << "\ncheckpoint_path = " << checkpoint_path << "\n\n";
    o << "[surrogate]\nkind = " << to_string(surrogate) << "\nh = " << h << '\n';
    if (fit_budget_seconds) o << "fit_budget_seconds = " << fmt17(*fit_budget_seconds) << '\n';
    o << "\n[training]\ne_cheap = " << e_cheap << "\ne_full = " << e_full << "\nlearning_rate = " << fmt17(learning_rate)
      << "\nbatch_size = " << batch_size << "\n\n";
    o << "[mutation]\nconnection = " << fmt17(mutation.connection) << "\nfunction = " << fmt17(mutation.function)
      << "\nweight_reset = " << fmt17(mutation.weight_reset) << "\n\n";
    o << "[grid]\nrows = " << grid.rows << "\ncols = " << grid.cols << "\nlevels_back = " << grid.levels_back
      << "\narity = " << grid.arity << "\nfunctions = ";
    for (std::size_t i = 0; i < grid.functions.size(); ++i) o << (i ? "," : "") << to_string(grid.functions[i]);
    o << "\n\n[data]\ndataset = " << data_dataset << "\ndata_dir = " << data_dir
      << "\ntrain_fraction = " << fmt17(data_train_fraction) << "\nsplit_seed = " << data_split_seed << '\n';
    return o.str();
}

void Archive::add(ArchiveEntry entry) {
    if (!entries_.empty() && entry.phenotype.size() != dimension())
        throw std::invalid_argument("archive: phenotype length " + std::to_string(entry.phenotype.size()) +
                                    " differs from " + std::to_string(dimension()));
    for (const auto& e : entries_)
        if (e.id == entry.id) throw std::invalid_argument("archive: duplicate id " + std::to_string(entry.id));
    entries_.push_back(std::move(entry));
}

std::vector<const ArchiveEntry*> Archive::recent(std::size_t s) const {
    const std::size_t n = std::min(s, entries_.size());
    std::vector<const ArchiveEntry*> out;
    out.reserve(n);
    for (std::size_t i = entries_.size() - n; i < entries_.size(); ++i) out.push_back(&entries_[i]);
    return out;
}

void initialize(const EvolutionConfig& config, const Dataset& train, EvolutionState& state) {
    config.validate();
    const GridConfig grid = grid_for(config, train);
    state = EvolutionState{};
    state.rng = Rng(config.seed);

    std::vector<Candidate> pool(config.init_size);
    for (auto& c : pool) {
        c.id = state.next_id++;
        c.genotype = random_genotype(grid, state.rng);
        c.rng = individual_rng(config, c.id);
    }
    parallel_for(pool.size(), config.threads, [&](std::size_t i) {
        cheap_train(pool[i], config, train);
        if (pool[i].failure.empty()) finish_train(pool[i], config, train);
    });

    GenerationRecord rec;
    std::vector<Individual> evaluated;
    for (auto& c : pool) {
        if (!c.failure.empty()) {
            rec.warnings.push_back("individual " + std::to_string(c.id) + " dropped: " + c.failure);
            continue;
        }
        state.archive.add({c.id, 0, *c.phenotype, *c.fitness});
        evaluated.push_back(evaluated_individual(c));
    }
    if (evaluated.size() < 2) throw std::runtime_error("initialisation left fewer than 2 trainable networks");
    sort_parents(evaluated);
    if (evaluated.size() > config.mu) evaluated.resize(config.mu);
    state.parents = std::move(evaluated);

    auto fit = fit_surrogate(state.archive, config);
    state.model = std::move(fit.model);
    rec.generation = 0;
    rec.surrogate_fit_seconds = fit.seconds;
    rec.k = state.archive.size();
    rec.s = fit.samples;
    rec.warnings.insert(rec.warnings.end(), fit.warnings.begin(), fit.warnings.end());
    record_population(rec, state.parents);
    state.history.push_back(std::move(rec));
}

void step(EvolutionState& state, const EvolutionConfig& config, const Dataset& train) {
    if (!state.model) throw std::logic_error("step: surrogate model not fitted");
    if (state.parents.empty()) throw std::logic_error("step: empty parent population");
    GenerationRecord rec;
    rec.generation = state.generation + 1;

    // (1) offspring by mutation, parents taken round-robin in rank order.
    std::vector<Candidate> offspring(config.lambda);
    for (std::size_t i = 0; i < config.lambda; ++i) {
        auto& c = offspring[i];
        c.id = state.next_id++;
        c.genotype = mutate(state.parents[i % state.parents.size()].genotype, config.mutation, state.rng);
        c.rng = individual_rng(config, c.id);
    }
    // (2) cheap training and phenotype extraction.
    parallel_for(offspring.size(), config.threads, [&](std::size_t i) { cheap_train(offspring[i], config, train); });

    // (3) surrogate prediction.
    std::vector<std::size_t> ranked;
    std::vector<Prediction> predictions(offspring.size());
    for (std::size_t i = 0; i < offspring.size(); ++i) {
        if (!offspring[i].failure.empty()) {
            rec.warnings.push_back("offspring " + std::to_string(offspring[i].id) + " dropped: " + offspring[i].failure);
            continue;
        }
        predictions[i] = state.model->predict(offspring[i].phenotype->values);
        ranked.push_back(i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return predictions[a].mean < predictions[b].mean; });

    // (4) pre-selection: the k best predicted are fully trained and truly evaluated.
    const std::size_t k = std::min(config.k, ranked.size());
    ranked.resize(k);
    parallel_for(k, config.threads, [&](std::size_t j) { finish_train(offspring[ranked[j]], config, train); });

    std::vector<Individual> pool = state.parents;
    for (auto i : ranked) {
        auto& c = offspring[i];
        if (!c.failure.empty()) {
            rec.warnings.push_back("offspring " + std::to_string(c.id) + " dropped: " + c.failure);
            continue;
        }
        state.archive.add({c.id, rec.generation, *c.phenotype, *c.fitness});
        rec.promoted.push_back({c.id, predictions[i].mean, predictions[i].variance, *c.fitness});
        auto ind = evaluated_individual(c);
        ind.surrogate_mean = predictions[i].mean;
        ind.surrogate_variance = predictions[i].variance;
        pool.push_back(std::move(ind));
    }
    rec.k = rec.promoted.size();

    // (6) refit on the most recent s entries; a failed refit keeps the previous model.
    try {
        auto fit = fit_surrogate(state.archive, config);
        state.model = std::move(fit.model);
        rec.surrogate_fit_seconds = fit.seconds;
        rec.s = fit.samples;
        rec.warnings.insert(rec.warnings.end(), fit.warnings.begin(), fit.warnings.end());
    } catch (const std::exception& e) {
        rec.s = std::min(config.s, state.archive.size());
        rec.warnings.push_back(std::string("surrogate refit failed, keeping previous model: ") + e.what());
    }

    // (7) (mu + k) truncation on true fitness.
    sort_parents(pool);
    if (pool.size() > config.mu) pool.resize(config.mu);
    state.parents = std::move(pool);
    record_population(rec, state.parents);
    state.generation = rec.generation;
    state.history.push_back(std::move(rec));
}

std::optional<double> spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

std::string RunLog::to_json(bool include_timings) const {
    json j;
    j["format"] = "saea-run-log";
    j["version"] = 1;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    j["dataset"] = dataset;
    j["seed"] = seed;
    j["phenotype_length"] = phenotype_length;
    j["config"] = config_ini;
    json gens = json::array();
    for (const auto& g : generations) gens.push_back(record_json(g, include_timings));
    j["generations"] = std::move(gens);
    j["spearman"] = spearman ? json(*spearman) : json(nullptr);
    return j.dump(2) + "\n";
}

std::string RunLog::to_csv(bool include_timings) const {
    std::ostringstream o;
    o << "generation,best_fitness,mean_fitness,surrogate_fit_seconds,k,s\n";
    for (const auto& g : generations) {
        o << g.generation << ',' << fmt17(g.best_fitness) << ',' << fmt17(g.mean_fitness) << ','
          << (include_timings ? fmt17(g.surrogate_fit_seconds) : std::string()) << ',' << g.k << ',' << g.s << '\n';
    }
    return o.str();
}

RunLog run(const EvolutionConfig& config, const Dataset& train, const std::function<void(const RunLog&)>& on_generation) {
    EvolutionState state;
    try {
        initialize(config, train, state);
    } catch (const std::exception& e) {
        auto log = make_log(config, train, state);
        log.status = "aborted";
        log.error = e.what();
        return log;
    }
    if (on_generation) on_generation(make_log(config, train, state));
    if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() && config.generations == 0)
        save_checkpoint(state, config, config.checkpoint_path);
    return continue_run(state, config, train, on_generation);
}

RunLog resume(const EvolutionConfig& config, const Dataset& train, const std::filesystem::path& checkpoint,
              const std::function<void(const RunLog&)>& on_generation) {
    config.validate();
    EvolutionState state = load_checkpoint(checkpoint, config);
    const GridConfig grid = grid_for(config, train);
    if (!state.parents.empty() && !(state.parents.front().genotype.config == grid))
        throw ConfigError("grid", "checkpoint grid differs from the configured grid");
    try {
        auto fit = fit_surrogate(state.archive, config);
        state.model = std::move(fit.model);
    } catch (const std::exception& e) {
        auto log = make_log(config, train, state);
        log.status = "aborted";
        log.error = std::string("surrogate refit on resume failed: ") + e.what();
        return log;
    }
    return continue_run(state, config, train, on_generation);
}

void save_checkpoint(const EvolutionState& state, const EvolutionConfig& config, const std::filesystem::path& path) {
    json j;
    j["format"] = "saea-checkpoint";
    j["version"] = 1;
    j["config"] = config.to_ini();
    j["generation"] = state.generation;
    j["next_id"] = state.next_id;
    std::ostringstream rng;
    rng << state.rng;
    j["rng"] = rng.str();
    json archive = json::array();
    for (const auto& e : state.archive.entries())
        archive.push_back({{"id", e.id},
                           {"generation", e.generation},
                           {"n_classes", e.phenotype.n_classes},
                           {"true_fitness", e.true_fitness},
                           {"phenotype", format_phenotype(e.phenotype)}});
    j["archive"] = std::move(archive);
    json parents = json::array();
    for (const auto& p : state.parents)
        parents.push_back({{"id", p.id}, {"true_fitness", *p.true_fitness}, {"genotype", serialize(p.genotype)}});
    j["parents"] = std::move(parents);
    json history = json::array();
    for (const auto& g : state.history) history.push_back(record_json(g, true));
    j["history"] = std::move(history);

    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
        out << j.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

EvolutionState load_checkpoint(const std::filesystem::path& path, const EvolutionConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    if (j.value("format", "") != "saea-checkpoint" || j.value("version", 0) != 1)
        throw ParseError("checkpoint: unrecognised format in " + path.string());
    try {
        const auto saved = EvolutionConfig::from_keyvalue(KeyValueFile::parse(j.at("config").get<std::string>()));
        auto check = [](bool same, const char* field) {
            if (!same) throw ConfigError(field, "differs from the checkpoint");
        };
        check(saved.seed == config.seed, "evolution.seed");
        check(saved.mu == config.mu, "evolution.mu");
        check(saved.lambda == config.lambda, "evolution.lambda");
        check(saved.k == config.k, "evolution.k");
        check(saved.s == config.s, "evolution.s");
        check(saved.surrogate == config.surrogate, "surrogate.kind");
        check(saved.h == config.h, "surrogate.h");
        check(saved.e_cheap == config.e_cheap, "training.e_cheap");
        check(saved.e_full == config.e_full, "training.e_full");

        EvolutionState state;
        state.generation = j.at("generation").get<std::size_t>();
        state.next_id = j.at("next_id").get<std::size_t>();
        std::istringstream rng(j.at("rng").get<std::string>());
        rng >> state.rng;
        if (!rng) throw ParseError("checkpoint: bad rng state");
        for (const auto& e : j.at("archive"))
            state.archive.add({e.at("id").get<std::size_t>(), e.at("generation").get<std::size_t>(),
                               parse_phenotype(e.at("phenotype").get<std::string>(), e.at("n_classes").get<std::size_t>()),
                               e.at("true_fitness").get<double>()});
        for (const auto& p : j.at("parents")) {
            Individual ind;
            ind.id = p.at("id").get<std::size_t>();
            ind.true_fitness = p.at("true_fitness").get<double>();
            ind.genotype = deserialize_genotype(p.at("genotype").get<std::string>());
            ind.evaluated = true;
            state.parents.push_back(std::move(ind));
        }
        for (const auto& g : j.at("history")) state.history.push_back(record_from_json(g));
        return state;
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace saea
