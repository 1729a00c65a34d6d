#pragma once

#include "mcbnn/config.hpp"
#include "mcbnn/dataset.hpp"
#include "mcbnn/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcbnn {

enum class ExperimentKind { baseline, fault, variation, nonlinear_init, sneak_audit };

ExperimentKind experiment_kind_from(const std::string& name);
std::string to_string(ExperimentKind k);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::baseline;
    std::string dataset = "iris";    // builtin name or CSV path
    NetworkConfig net;               // layer_sizes empty = derive from dataset defaults
    double train_fraction = 0.7;
    std::size_t synth_samples = 1000;

    double fault_fraction = 0;       // kind == fault
    VariationDirection var_direction = VariationDirection::increased;
    double var_fraction = 0;         // kind == variation
    std::string init_range_id;       // kind == nonlinear_init: linear|full|lower|upper

    std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};
    int workers = 0;                 // 0 = library default
    bool trace_energy = false;

    void validate() const;
};

struct RunReport {
    std::uint64_t seed = 0;
    TrainReport train;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<RunReport> runs;
    double mean_accuracy = 0;
    double std_accuracy = 0;
    double mean_f1 = 0;
    double std_f1 = 0;
};

// Fill cfg with the defaults a dataset/model pair trains well under
// (topology, R0, kappa_scale, epochs, activation, output function).
void apply_dataset_defaults(NetworkConfig& cfg, const std::string& dataset,
                            std::size_t n_features, std::size_t n_classes);

// Resolve spec -> per-seed runs (parallel up to `workers`), aggregate stats.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Named conductance init range for the nonlinearity study.
std::pair<double, double> named_init_range(const std::string& range_id,
                                           const DeviceCharacterization& model);
void nonlinear_init(CrossbarState& cb, const std::string& range_id, Rng& rng);

// Single seeded run used by both run_experiment and the CLI `train`
// subcommand. Returns the report; optionally emits artifacts into out_dir.
struct RunOptions {
    std::string out_dir;     // empty = no files
    bool dump_waveforms = false;
    bool trace_energy = false;
    bool trace_signals = false;
};
RunReport run_single(const ExperimentSpec& spec, std::uint64_t seed, const RunOptions& opts);

// Parse an experiment spec from a config file (sections: experiment,
// network, timing, encoding).
ExperimentSpec spec_from_config(const Config& cfg);

// report.txt body echoing every resolved value plus results
std::string render_report(const ExperimentSpec& spec, const RunReport& run);
std::string render_summary(const ExperimentResult& result);

} // namespace mcbnn
