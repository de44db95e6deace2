#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "saea/cgp_ann.hpp"
#include "saea/dataset.hpp"
#include "saea/keyvalue.hpp"
#include "saea/kriging.hpp"
#include "saea/phenotype.hpp"

namespace saea {

enum class SurrogateKind { kriging, kpls };

std::string to_string(SurrogateKind k);
SurrogateKind surrogate_kind_from_string(const std::string& s);

/// Run parameters. `data_*` fields are only read by the command-line front end.
struct EvolutionConfig {
    std::size_t mu = 5;
    std::size_t lambda = 20;
    std::size_t generations = 10;
    std::size_t k = 5;
    std::size_t s = 100;
    std::size_t init_size = 100;
    SurrogateKind surrogate = SurrogateKind::kpls;
    std::size_t h = 2;
    int e_cheap = 10;
    int e_full = 100;
    double learning_rate = 0.05;
    int batch_size = 32;
    std::uint64_t seed = 0;
    std::optional<double> fit_budget_seconds;
    MutationRates mutation;
    GridConfig grid;  // n_inputs and n_outputs are taken from the dataset
    std::size_t checkpoint_every = 0;
    std::string checkpoint_path;
    std::size_t threads = 0;  // 0 = hardware concurrency

    std::string data_dataset;
    std::string data_dir;
    double data_train_fraction = 0.75;
    std::uint64_t data_split_seed = 0;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
    static EvolutionConfig from_keyvalue(const KeyValueFile& kv);
    static EvolutionConfig read(const std::filesystem::path& path);
    /// INI text that from_keyvalue reads back to an equal config.
    std::string to_ini() const;
};

struct Individual {
    std::size_t id = 0;
    Genotype genotype;
    std::optional<PhenotypeVector> phenotype;
    std::optional<double> true_fitness;
    std::optional<double> surrogate_mean;
    std::optional<double> surrogate_variance;
    bool evaluated = false;
};

struct ArchiveEntry {
    std::size_t id = 0;
    std::size_t generation = 0;  // insertion timestamp
    PhenotypeVector phenotype;
    double true_fitness = 0.0;
};

/// Truly evaluated (phenotype, fitness) pairs in insertion order.
class Archive {
public:
    /// Throws std::invalid_argument on a dimension mismatch or a repeated id.
    void add(ArchiveEntry entry);
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t dimension() const { return entries_.empty() ? 0 : entries_.front().phenotype.size(); }
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    /// The most recent min(s, size) entries, oldest first.
    std::vector<const ArchiveEntry*> recent(std::size_t s) const;

private:
    std::vector<ArchiveEntry> entries_;
};

struct PromotedRecord {
    std::size_t id = 0;
    double predicted_mean = 0.0;
    double predicted_variance = 0.0;
    double true_fitness = 0.0;
};

struct GenerationRecord {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double surrogate_fit_seconds = 0.0;
    std::size_t k = 0;  // individuals truly evaluated this generation
    std::size_t s = 0;  // archive entries the surrogate was fitted on
    std::vector<PromotedRecord> promoted;
    std::vector<std::string> warnings;
};

struct EvolutionState {
    std::vector<Individual> parents;  // evaluated, best first
    Archive archive;
    std::optional<KrigingModel> model;
    std::size_t generation = 0;
    std::size_t next_id = 0;
    Rng rng;
    std::vector<GenerationRecord> history;
};

/// Random networks, each trained for e_full epochs with the phenotype taken after e_cheap
/// of them, true-evaluated, archived, then the first surrogate fit. The archive is kept in
/// `state` if the surrogate fit throws.
void initialize(const EvolutionConfig& config, const Dataset& train, EvolutionState& state);

/// One pre-selection generation.
void step(EvolutionState& state, const EvolutionConfig& config, const Dataset& train);

struct RunLog {
    std::string config_ini;
    std::uint64_t seed = 0;
    std::string dataset;
    std::size_t phenotype_length = 0;
    std::vector<GenerationRecord> generations;  // generation 0 is initialisation
    std::optional<double> spearman;             // prediction vs truth over promoted offspring
    std::string status = "ok";                  // ok | aborted
    std::string error;

    std::string to_json(bool include_timings = true) const;
    std::string to_csv(bool include_timings = true) const;
};

/// Spearman rank correlation with average ranks for ties; nullopt when undefined.
std::optional<double> spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

/// initialize + G steps. Fatal errors are caught and reported in the log (status "aborted").
/// `on_generation` sees every completed generation, including initialisation.
RunLog run(const EvolutionConfig& config, const Dataset& train,
           const std::function<void(const RunLog&)>& on_generation = {});

/// Continue a run from a checkpoint written by `run` up to config.generations.
RunLog resume(const EvolutionConfig& config, const Dataset& train, const std::filesystem::path& checkpoint,
              const std::function<void(const RunLog&)>& on_generation = {});

void save_checkpoint(const EvolutionState& state, const EvolutionConfig& config, const std::filesystem::path& path);
EvolutionState load_checkpoint(const std::filesystem::path& path, const EvolutionConfig& config);

}  // namespace saea
