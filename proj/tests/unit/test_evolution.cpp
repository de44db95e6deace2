#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "saea/bench.hpp"
#include "saea/error.hpp"
#include "saea/evolution.hpp"

using namespace saea;
namespace fs = std::filesystem;

namespace {

const Dataset& iris_train() {
    static const Dataset train = [] {
        auto d = prepare_dataset(fs::path(SAEA_TEST_DATA_DIR) / "iris.data", builtin_schema("iris"), {}).train;
        d.name = "iris";
        return d;
    }();
    return train;
}

EvolutionConfig small_config() {
    EvolutionConfig c;
    c.mu = 3;
    c.lambda = 6;
    c.k = 2;
    c.generations = 3;
    c.init_size = 8;
    c.s = 25;
    c.e_cheap = 2;
    c.e_full = 5;
    c.grid.rows = 4;
    c.grid.cols = 3;
    c.grid.levels_back = 3;
    c.grid.arity = 3;
    c.seed = 7;
    return c;
}

std::string field_of(const EvolutionConfig& c) {
    try {
        c.validate();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return {};
}

std::string parse_field(const std::string& ini) {
    try {
        EvolutionConfig::from_keyvalue(KeyValueFile::parse(ini));
    } catch (const ConfigError& e) {
        return e.field();
    }
    return {};
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    CHECK(field_of(small_config()).empty());
    auto c = small_config();
    c.k = 0;
    CHECK(field_of(c) == "evolution.k");
    c = small_config();
    c.k = c.lambda + 1;
    CHECK(field_of(c) == "evolution.k");
    c = small_config();
    c.s = 24;
    CHECK(field_of(c) == "evolution.s");
    c.s = 201;
    CHECK(field_of(c) == "evolution.s");
    c = small_config();
    c.mu = 0;
    CHECK(field_of(c) == "evolution.mu");
    c = small_config();
    c.e_full = 1;
    CHECK(field_of(c) == "training.e_full");
    c = small_config();
    c.h = 5;
    CHECK(field_of(c) == "surrogate.h");
    c = small_config();
    c.fit_budget_seconds = 0.0;
    CHECK(field_of(c) == "surrogate.fit_budget_seconds");

    CHECK(parse_field("[evolution]\nmu = 2\nbogus = 1\n") == "evolution.bogus");
    CHECK(parse_field("[surrogate]\nkind = gp\n") == "surrogate.kind");
    CHECK(parse_field("[grid]\nfunctions = tanh,softsign\n") == "grid.functions");
    CHECK(parse_field("[evolution]\nk = 0\n") == "evolution.k");
}

TEST_CASE("config survives an ini round trip") {
    auto c = small_config();
    c.surrogate = SurrogateKind::kriging;
    c.fit_budget_seconds = 12.5;
    c.data_dataset = "iris";
    c.grid.functions = {Activation::relu, Activation::tanh};
    const auto text = c.to_ini();
    const auto back = EvolutionConfig::from_keyvalue(KeyValueFile::parse(text));
    CHECK(back.to_ini() == text);
    CHECK(back.surrogate == SurrogateKind::kriging);
    CHECK(back.fit_budget_seconds == 12.5);
}

TEST_CASE("shipped example configs parse") {
    for (const auto& entry : fs::directory_iterator(fs::path(SAEA_SOURCE_DIR) / "configs")) {
        CAPTURE(entry.path().string());
        const auto c = EvolutionConfig::read(entry.path());
        CHECK_FALSE(c.data_dataset.empty());
    }
}

TEST_CASE("archive rejects mismatched vectors and repeated ids") {
    Archive a;
    PhenotypeVector p;
    p.values = Eigen::VectorXd::Constant(6, 0.5);
    p.n_instances = 3;
    p.n_classes = 2;
    a.add({0, 0, p, 0.1});
    CHECK_THROWS_AS(a.add({0, 0, p, 0.2}), std::invalid_argument);
    PhenotypeVector q = p;
    q.values = Eigen::VectorXd::Constant(4, 0.5);
    CHECK_THROWS_AS(a.add({1, 0, q, 0.2}), std::invalid_argument);
    for (std::size_t i = 1; i < 5; ++i) a.add({i, 1, p, 0.0});
    const auto r = a.recent(3);
    REQUIRE(r.size() == 3);
    CHECK(r.front()->id == 2);
    CHECK(r.back()->id == 4);
    CHECK(a.recent(100).size() == 5);
}

TEST_CASE("initialize fills the archive with training-split vectors") {
    EvolutionState state;
    initialize(small_config(), iris_train(), state);
    CHECK(state.archive.size() == 8);
    CHECK(state.archive.dimension() == 336);
    CHECK(state.parents.size() == 3);
    CHECK(state.model.has_value());
    CHECK(state.model->is_kpls());
    CHECK(state.history.size() == 1);
    for (std::size_t i = 1; i < state.parents.size(); ++i)
        CHECK(*state.parents[i - 1].true_fitness <= *state.parents[i].true_fitness);

    EvolutionState again;
    initialize(small_config(), iris_train(), again);
    REQUIRE(again.archive.size() == state.archive.size());
    for (std::size_t i = 0; i < state.archive.size(); ++i) {
        CHECK(again.archive.entries()[i].phenotype.values == state.archive.entries()[i].phenotype.values);
        CHECK(again.archive.entries()[i].true_fitness == state.archive.entries()[i].true_fitness);
    }
}

TEST_CASE("two initial networks are enough for a surrogate") {
    auto c = small_config();
    c.init_size = 2;
    c.mu = 2;
    EvolutionState state;
    initialize(c, iris_train(), state);
    CHECK(state.model->sample_size() == 2);
    CHECK(state.model->hyperparameter_count() == 1);  // h clamped to m - 1
    CHECK_FALSE(state.history.front().warnings.empty());
}

TEST_CASE("steps: archive grows by k, elitism, only true fitness is archived") {
    const auto c = small_config();
    EvolutionState state;
    initialize(c, iris_train(), state);
    std::map<std::size_t, double> truth;
    for (const auto& e : state.archive.entries()) truth[e.id] = e.true_fitness;
    double best = *state.parents.front().true_fitness;
    for (std::size_t g = 1; g <= 4; ++g) {
        const auto before = state.archive.size();
        step(state, c, iris_train());
        CHECK(state.generation == g);
        CHECK(state.archive.size() == before + c.k);
        const auto& rec = state.history.back();
        CHECK(rec.k == c.k);
        CHECK(rec.promoted.size() == c.k);
        for (const auto& p : rec.promoted) truth[p.id] = p.true_fitness;
        CHECK(*state.parents.front().true_fitness <= best);
        best = *state.parents.front().true_fitness;
        CHECK(rec.best_fitness == best);
        for (const auto& p : state.parents) {
            CHECK(p.evaluated);
            CHECK(truth.count(p.id) == 1);
        }
    }
    for (const auto& e : state.archive.entries()) {
        REQUIRE(truth.count(e.id) == 1);
        CHECK(truth[e.id] == e.true_fitness);
    }
}

TEST_CASE("surrogate kind does not change the offspring or their vectors") {
    // With k = lambda every offspring reaches the archive, so all of them can be compared.
    auto c = small_config();
    c.k = c.lambda;
    auto archive_after = [&](SurrogateKind kind) {
        auto cfg = c;
        cfg.surrogate = kind;
        EvolutionState state;
        initialize(cfg, iris_train(), state);
        step(state, cfg, iris_train());
        step(state, cfg, iris_train());
        std::map<std::size_t, std::pair<Eigen::VectorXd, double>> out;
        for (const auto& e : state.archive.entries()) out[e.id] = {e.phenotype.values, e.true_fitness};
        return out;
    };
    const auto a = archive_after(SurrogateKind::kpls);
    const auto b = archive_after(SurrogateKind::kriging);
    REQUIRE(a.size() == b.size());
    for (const auto& [id, v] : a) {
        REQUIRE(b.count(id) == 1);
        CHECK(b.at(id).first == v.first);
        CHECK(b.at(id).second == v.second);
    }
}

TEST_CASE("run: zero generations, determinism, and the CSV layout") {
    auto c = small_config();
    c.generations = 0;
    const auto init_only = run(c, iris_train());
    CHECK(init_only.status == "ok");
    CHECK(init_only.generations.size() == 1);
    CHECK(init_only.phenotype_length == 336);

    c.generations = 2;
    std::size_t callbacks = 0;
    const auto a = run(c, iris_train(), [&](const RunLog&) { ++callbacks; });
    const auto b = run(c, iris_train());
    CHECK(callbacks == 3);
    CHECK(a.to_json(false) == b.to_json(false));
    CHECK(a.to_csv(false) == b.to_csv(false));
    CHECK(a.to_csv().rfind("generation,best_fitness,mean_fitness,surrogate_fit_seconds,k,s\n", 0) == 0);
    CHECK(a.to_json(false).find("surrogate_fit_seconds") == std::string::npos);

    auto other = c;
    other.seed = 8;
    CHECK(run(other, iris_train()).to_json(false) != a.to_json(false));
}

TEST_CASE("a fit failure at initialisation aborts with the log flushed") {
    auto c = small_config();
    c.surrogate = SurrogateKind::kriging;
    c.fit_budget_seconds = 1e-9;
    const auto log = run(c, iris_train());
    CHECK(log.status == "aborted");
    CHECK(log.error.find("budget") != std::string::npos);
}

TEST_CASE("checkpoint and resume reproduce an uninterrupted run") {
    const auto dir = fs::temp_directory_path() / "saea-checkpoint-test";
    fs::create_directories(dir);
    auto c = small_config();
    c.generations = 2;
    c.checkpoint_every = 1;
    c.checkpoint_path = (dir / "run.ckpt").string();
    run(c, iris_train());
    CHECK(fs::exists(c.checkpoint_path));

    auto longer = c;
    longer.generations = 4;
    longer.checkpoint_path = (dir / "longer.ckpt").string();
    const auto resumed = resume(longer, iris_train(), c.checkpoint_path);
    const auto straight = run(longer, iris_train());
    CHECK(resumed.generations.size() == 5);
    // The echoed config differs only in checkpoint_path, so compare generation records.
    CHECK(resumed.to_csv(false) == straight.to_csv(false));
    for (std::size_t g = 0; g < 5; ++g) {
        REQUIRE(resumed.generations[g].promoted.size() == straight.generations[g].promoted.size());
        for (std::size_t i = 0; i < resumed.generations[g].promoted.size(); ++i) {
            CHECK(resumed.generations[g].promoted[i].id == straight.generations[g].promoted[i].id);
            CHECK(resumed.generations[g].promoted[i].predicted_mean == straight.generations[g].promoted[i].predicted_mean);
        }
    }

    auto mismatched = longer;
    mismatched.seed = 99;
    CHECK_THROWS_AS(resume(mismatched, iris_train(), c.checkpoint_path), ConfigError);
    std::ofstream(dir / "junk.ckpt") << "{}";
    CHECK_THROWS_AS(resume(longer, iris_train(), dir / "junk.ckpt"), ParseError);
}

TEST_CASE("spearman correlation") {
    CHECK(*spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(*spearman_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    // Ties take average ranks: ranks (1.5, 1.5, 3) vs (1, 2, 3).
    CHECK(*spearman_correlation({5, 5, 7}, {1, 2, 3}) == doctest::Approx(0.8660254037844386));
    CHECK_FALSE(spearman_correlation({1, 1, 1}, {1, 2, 3}).has_value());
    CHECK_FALSE(spearman_correlation({1}, {2}).has_value());
    CHECK_THROWS_AS(spearman_correlation({1, 2}, {1}), std::invalid_argument);
}
