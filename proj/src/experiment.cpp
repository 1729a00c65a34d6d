#include "mcbnn/experiment.hpp"
#include "mcbnn/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mcbnn {

namespace {

std::uint64_t substream(std::uint64_t seed, std::uint64_t lane) {
    return seed * 0x9e3779b97f4a7c15ULL + lane;
}

const MemristorParams& variation_params(const std::string& model, VariationDirection dir) {
    static const MemristorParams silver_dec =
        apply_variation(builtin_model("silver").params, VariationDirection::decreased, "silver");
    static const MemristorParams silver_inc =
        apply_variation(builtin_model("silver").params, VariationDirection::increased, "silver");
    static const MemristorParams titania_dec =
        apply_variation(builtin_model("titania").params, VariationDirection::decreased, "titania");
    static const MemristorParams titania_inc =
        apply_variation(builtin_model("titania").params, VariationDirection::increased, "titania");
    if (model == "silver")
        return dir == VariationDirection::decreased ? silver_dec : silver_inc;
    if (model == "titania")
        return dir == VariationDirection::decreased ? titania_dec : titania_inc;
    throw std::invalid_argument("unknown model for variation: " + model);
}

} // namespace

ExperimentKind experiment_kind_from(const std::string& name) {
    if (name == "baseline") return ExperimentKind::baseline;
    if (name == "fault") return ExperimentKind::fault;
    if (name == "variation") return ExperimentKind::variation;
    if (name == "nonlinear_init") return ExperimentKind::nonlinear_init;
    if (name == "sneak_audit") return ExperimentKind::sneak_audit;
    throw std::invalid_argument("unknown experiment kind: " + name);
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::baseline: return "baseline";
        case ExperimentKind::fault: return "fault";
        case ExperimentKind::variation: return "variation";
        case ExperimentKind::nonlinear_init: return "nonlinear_init";
        case ExperimentKind::sneak_audit: return "sneak_audit";
    }
    return "?";
}

void ExperimentSpec::validate() const {
    require(!seeds.empty(), "experiment needs at least one seed");
    require(train_fraction > 0 && train_fraction < 1, "train fraction must be in (0,1)");
    switch (kind) {
        case ExperimentKind::fault:
            require(fault_fraction >= 0 && fault_fraction <= 1, "fault fraction in [0,1]");
            break;
        case ExperimentKind::variation:
            require(var_fraction >= 0 && var_fraction <= 1, "variation fraction in [0,1]");
            break;
        case ExperimentKind::nonlinear_init:
            require(!init_range_id.empty(), "nonlinear_init needs an init range id");
            break;
        default:
            break;
    }
}

void apply_dataset_defaults(NetworkConfig& cfg, const std::string& dataset,
                            std::size_t n_features, std::size_t n_classes) {
    const bool titania = cfg.model == "titania";
    auto base = [&](std::vector<std::size_t> sizes, Activation act, OutputFn out, double R0,
                    double ks, std::size_t ep) {
        if (cfg.layer_sizes.empty()) cfg.layer_sizes = std::move(sizes);
        cfg.hidden_act = act;
        cfg.output_fn = out;
        if (cfg.R0 <= 0) cfg.R0 = R0;
        if (cfg.kappa_scale <= 0) cfg.kappa_scale = ks;
        if (cfg.epochs == 0) cfg.epochs = ep;
    };
    if (dataset == "xor") {
        base({2, 2, 2}, Activation::tanh, OutputFn::softmax, 30e3, 0.1, 1000);
    } else if (dataset == "iris") {
        base({4, 4, 3}, Activation::sigmoid, OutputFn::softmax, titania ? 15e3 : 20e3,
             titania ? 1.0 : 0.15, 100);
    } else if (dataset == "synth-digits") {
        base({784, 397, 204, 10}, Activation::sigmoid, OutputFn::softmax, 1e3, 0.25, 7);
    } else {
        // generic single-layer net, sigmoid output for binary problems
        std::vector<std::size_t> sizes{n_features,
                                       n_classes <= 2 ? std::size_t{1} : n_classes};
        const OutputFn out = n_classes <= 2 ? OutputFn::sigmoid : OutputFn::softmax;
        base(std::move(sizes), Activation::sigmoid, out, titania ? 15e3 : 3e3, 0.5, 40);
    }
}

std::pair<double, double> named_init_range(const std::string& id,
                                           const DeviceCharacterization& m) {
    if (id == "linear" || id.empty()) return {m.G_lin_min, m.G_lin_max};
    if (id == "full") return {m.G_abs_min, m.G_abs_max};
    if (id == "lower") return {m.G_abs_min, m.G_lin_min};
    if (id == "upper") return {m.G_lin_max, m.G_abs_max};
    throw std::invalid_argument("unknown init range id: " + id);
}

void nonlinear_init(CrossbarState& cb, const std::string& range_id, Rng& rng) {
    const auto [lo, hi] = named_init_range(range_id, cb.model);
    require(lo >= cb.model.G_abs_min - 1e-12 && hi <= cb.model.G_abs_max + 1e-12,
            "init range exceeds device bounds");
    reinit_conductances(cb, lo, hi, rng);
}

RunReport run_single(const ExperimentSpec& spec, std::uint64_t seed, const RunOptions& opts) {
    spec.validate();
    const Dataset full = load_dataset(spec.dataset, spec.net.encoding.x_max,
                                      substream(seed, 4), spec.synth_samples);
    NetworkConfig cfg = spec.net;
    apply_dataset_defaults(cfg, full.name, full.n_features(), full.n_classes);
    cfg.seed = seed;
    require(cfg.layer_sizes.front() == full.n_features(), "network input width != features");
    cfg.validate();

    auto [train_set, test_set] = stratified_split(full, spec.train_fraction, substream(seed, 5));

    Rng init_rng(substream(seed, 0));
    Network net(cfg, init_rng);

    // experiment mutations act on this run's crossbars only
    if (spec.kind == ExperimentKind::fault && spec.fault_fraction > 0) {
        std::size_t lane = 10;
        for (auto& cb : net.crossbars())
            inject_faults(cb, FaultPlan{spec.fault_fraction, substream(seed, lane++)});
    } else if (spec.kind == ExperimentKind::variation && spec.var_fraction > 0) {
        const MemristorParams& vp = variation_params(cfg.model, spec.var_direction);
        std::size_t lane = 20;
        for (auto& cb : net.crossbars()) {
            Rng rng(substream(seed, lane++));
            const std::size_t n = cb.x.size();
            const auto k = static_cast<std::size_t>(std::llround(spec.var_fraction * n));
            std::vector<std::size_t> idx(n);
            for (std::size_t i = 0; i < n; ++i) idx[i] = i;
            rng.shuffle(idx);
            for (std::size_t i = 0; i < k; ++i) {
                // re-seat the state so the varied device starts at the same
                // conductance it held with nominal parameters
                const double G = small_signal_conductance(*cb.cell_params[idx[i]], cb.x[idx[i]]);
                cb.cell_params[idx[i]] = &vp;
                cb.x[idx[i]] = std::clamp(state_for_conductance(vp, G), 0.0, 1.0);
            }
        }
    } else if (spec.kind == ExperimentKind::nonlinear_init) {
        std::size_t lane = 30;
        for (auto& cb : net.crossbars()) {
            Rng rng(substream(seed, lane++));
            nonlinear_init(cb, spec.init_range_id, rng);
        }
    }

    const bool trace_energy = opts.trace_energy || spec.trace_energy;
    if (trace_energy)
        for (auto& cb : net.crossbars()) {
            cb.trace_energy = true;
            cb.cell_energy.assign(cb.x.size(), 0.0);
        }

    std::ofstream signals;
    if (opts.trace_signals && !opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        signals.open(opts.out_dir + "/signals.csv");
        signals << "step,layer,quantity,index,value\n";
        net.set_signal_sink([&signals](std::size_t step, const ForwardTrace& tr,
                                       const std::vector<double>& y_out,
                                       const std::vector<std::vector<double>>& tanh_delta) {
            char buf[128];
            auto emit = [&](std::size_t layer, const char* q, const std::vector<double>& v) {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%zu,%.9g\n", step, layer, q, i,
                                  v[i]);
                    signals << buf;
                }
            };
            for (std::size_t k = 0; k < tr.pre.size(); ++k) {
                emit(k, "x", tr.layer_in[k]);
                emit(k, "r", tr.pre[k]);
            }
            emit(tr.pre.size() - 1, "o", tr.output);
            emit(tr.pre.size() - 1, "y", y_out);
            for (std::size_t k = 1; k < tanh_delta.size(); ++k)
                emit(k, "tanh_delta", tanh_delta[k]);
        });
    }

    if (opts.dump_waveforms && !opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        // representative first-step waveforms of the first crossbar
        const auto& cb = net.crossbars().front();
        {
            std::ofstream f(opts.out_dir + "/waveform_read_row1.csv");
            write_csv(encode_read(train_set.features(0, 0), cb.enc, cb.timing, cb.model), f);
        }
        {
            std::ofstream f(opts.out_dir + "/waveform_update_row1.csv");
            write_csv(encode_update(train_set.features(0, 0), cb.enc, cb.timing, cb.model), f);
        }
        {
            std::ofstream f(opts.out_dir + "/waveform_switch_col0.csv");
            write_csv(switch_schedule(0.5, cb.enc, cb.timing, cb.model), f);
        }
    }

    Rng order_rng(substream(seed, 1));
    RunReport rep;
    rep.seed = seed;
    rep.train = net.train(train_set, test_set, cfg.epochs, order_rng);

    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        {
            std::ofstream f(opts.out_dir + "/cost.csv");
            f << "epoch,mean_loss\n";
            char buf[64];
            for (std::size_t e = 0; e < rep.train.epochs.size(); ++e) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1,
                              rep.train.epochs[e].mean_loss);
                f << buf;
            }
        }
        {
            std::ofstream f(opts.out_dir + "/metrics.txt");
            char buf[128];
            std::snprintf(buf, sizeof buf, "accuracy = %.17g\nmacro_f1 = %.17g\n",
                          rep.train.test_accuracy, rep.train.test_macro_f1);
            f << buf << "confusion =\n";
            for (std::size_t i = 0; i < rep.train.confusion.rows(); ++i) {
                for (std::size_t j = 0; j < rep.train.confusion.cols(); ++j)
                    f << "  " << rep.train.confusion(i, j);
                f << "\n";
            }
        }
        for (std::size_t k = 0; k < net.crossbars().size(); ++k) {
            std::ofstream f(opts.out_dir + "/conductance_" + std::to_string(k) + ".csv");
            write_conductance_csv(net.crossbars()[k], f);
        }
        std::ofstream f(opts.out_dir + "/report.txt");
        f << render_report(spec, rep);
    }
    return rep;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    result.spec = spec;
    result.runs.resize(spec.seeds.size());

    const int workers = spec.workers > 0 ? spec.workers : 0;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers > 0 ? workers : omp_get_max_threads())
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        RunOptions opts;
        opts.trace_energy = spec.trace_energy;
        result.runs[i] = run_single(spec, spec.seeds[i], opts);
    }

    auto stats = [&](auto getter) {
        double mean = 0;
        for (const auto& r : result.runs) mean += getter(r);
        mean /= static_cast<double>(result.runs.size());
        double var = 0;
        for (const auto& r : result.runs) {
            const double d = getter(r) - mean;
            var += d * d;
        }
        var /= static_cast<double>(result.runs.size());
        return std::make_pair(mean, std::sqrt(var));
    };
    std::tie(result.mean_accuracy, result.std_accuracy) =
        stats([](const RunReport& r) { return r.train.test_accuracy; });
    std::tie(result.mean_f1, result.std_f1) =
        stats([](const RunReport& r) { return r.train.test_macro_f1; });
    return result;
}

ExperimentSpec spec_from_config(const Config& cfg) {
    ExperimentSpec spec;
    spec.kind = experiment_kind_from(cfg.get_or("experiment.kind", "baseline"));
    spec.dataset = cfg.get_or("experiment.dataset", "iris");
    spec.train_fraction = cfg.get_double("experiment.train_fraction", 0.7);
    spec.synth_samples = static_cast<std::size_t>(cfg.get_int("experiment.synth_samples", 1000));
    spec.fault_fraction = cfg.get_double("experiment.fault_fraction", 0.0);
    spec.var_fraction = cfg.get_double("experiment.variation_fraction", 0.0);
    const std::string dir = cfg.get_or("experiment.variation_direction", "increased");
    require(dir == "increased" || dir == "decreased", "variation_direction must be "
                                                      "increased|decreased");
    spec.var_direction = dir == "increased" ? VariationDirection::increased
                                            : VariationDirection::decreased;
    spec.init_range_id = cfg.get_or("experiment.init_range", "");
    spec.workers = static_cast<int>(cfg.get_int("experiment.workers", 0));
    spec.trace_energy = cfg.get_bool("experiment.trace_energy", false);
    if (cfg.has("experiment.seeds")) {
        spec.seeds.clear();
        std::stringstream ss(cfg.get("experiment.seeds"));
        std::string tok;
        while (std::getline(ss, tok, ','))
            spec.seeds.push_back(std::strtoull(tok.c_str(), nullptr, 10));
    }

    NetworkConfig& n = spec.net;
    if (cfg.has("network.layers")) {
        n.layer_sizes.clear();
        std::stringstream ss(cfg.get("network.layers"));
        std::string tok;
        while (std::getline(ss, tok, '-'))
            n.layer_sizes.push_back(std::strtoull(tok.c_str(), nullptr, 10));
    }
    n.model = cfg.get_or("network.model", "silver");
    const std::string mode = cfg.get_or("network.mode", "device");
    require(mode == "device" || mode == "behavioral", "mode must be device|behavioral");
    n.mode = mode == "device" ? Mode::device : Mode::behavioral;
    const std::string act = cfg.get_or("network.activation", "");
    if (act == "sigmoid") n.hidden_act = Activation::sigmoid;
    else if (act == "tanh") n.hidden_act = Activation::tanh;
    else require(act.empty(), "activation must be sigmoid|tanh");
    n.R0 = cfg.get_double("network.R0", 0.0);
    n.kappa_scale = cfg.get_double("network.kappa_scale", 0.0);
    n.epochs = static_cast<std::size_t>(cfg.get_int("network.epochs", 0));
    n.tanh_rescale = cfg.get_bool("network.tanh_rescale", true);
    n.init_G_lo = cfg.get_double("network.init_G_lo", 0.0);
    n.init_G_hi = cfg.get_double("network.init_G_hi", 0.0);
    n.timing.T_rd = cfg.get_double("timing.T_rd", n.timing.T_rd);
    n.timing.T_wr = cfg.get_double("timing.T_wr", n.timing.T_wr);
    n.timing.dt = cfg.get_double("timing.dt", n.timing.dt);
    n.encoding.a = cfg.get_double("encoding.a", n.encoding.a);
    n.encoding.x_max = cfg.get_double("encoding.x_max", n.encoding.x_max);
    return spec;
}

namespace {

std::string format_net(const NetworkConfig& c) {
    std::stringstream ss;
    ss << "layers = ";
    for (std::size_t i = 0; i < c.layer_sizes.size(); ++i)
        ss << (i ? "-" : "") << c.layer_sizes[i];
    ss << "\nmodel = " << c.model
       << "\nmode = " << (c.mode == Mode::device ? "device" : "behavioral")
       << "\nactivation = " << (c.hidden_act == Activation::tanh ? "tanh" : "sigmoid")
       << "\noutput = " << (c.output_fn == OutputFn::softmax ? "softmax" : "sigmoid")
       << "\nR0 = " << c.R0 << "\nkappa_scale = " << c.kappa_scale
       << "\nepochs = " << c.epochs << "\ntanh_rescale = " << (c.tanh_rescale ? 1 : 0)
       << "\nT_rd = " << c.timing.T_rd << "\nT_wr = " << c.timing.T_wr
       << "\ndt = " << c.timing.dt << "\na = " << c.encoding.a
       << "\nx_max = " << c.encoding.x_max << "\nseed = " << c.seed << "\n";
    return ss.str();
}

} // namespace

std::string render_report(const ExperimentSpec& spec, const RunReport& run) {
    std::stringstream ss;
    ss << "[experiment]\nkind = " << to_string(spec.kind) << "\ndataset = " << spec.dataset
       << "\ntrain_fraction = " << spec.train_fraction << "\nseed = " << run.seed << "\n";
    if (spec.kind == ExperimentKind::fault)
        ss << "fault_fraction = " << spec.fault_fraction << "\n";
    if (spec.kind == ExperimentKind::variation)
        ss << "variation_fraction = " << spec.var_fraction << "\nvariation_direction = "
           << (spec.var_direction == VariationDirection::increased ? "increased" : "decreased")
           << "\n";
    if (spec.kind == ExperimentKind::nonlinear_init)
        ss << "init_range = " << spec.init_range_id << "\n";
    NetworkConfig cfg = spec.net;
    {
        // echo the fully resolved network configuration
        const Dataset probe = load_dataset(spec.dataset, spec.net.encoding.x_max, 0,
                                           spec.synth_samples);
        apply_dataset_defaults(cfg, probe.name, probe.n_features(), probe.n_classes);
    }
    ss << "\n[network]\n" << format_net(cfg);
    ss << "\n[result]\n";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "train_accuracy = %.17g\ntest_accuracy = %.17g\ntest_macro_f1 = %.17g\n"
                  "final_mean_loss = %.17g\naudit_pass = %d\nmax_abs_read_v = %.17g\n"
                  "max_abs_off_v = %.17g\n",
                  run.train.train_accuracy, run.train.test_accuracy, run.train.test_macro_f1,
                  run.train.epochs.empty() ? 0.0 : run.train.epochs.back().mean_loss,
                  run.train.audit_pass ? 1 : 0, run.train.audit.max_abs_read_v,
                  run.train.audit.max_abs_off_v);
    ss << buf;
    if (run.train.energy_per_synapse > 0) {
        std::snprintf(buf, sizeof buf, "energy_per_synapse_J = %.17g\n",
                      run.train.energy_per_synapse);
        ss << buf;
    }
    return ss.str();
}

std::string render_summary(const ExperimentResult& r) {
    std::stringstream ss;
    ss << "experiment = " << to_string(r.spec.kind) << "\ndataset = " << r.spec.dataset
       << "\nseeds =";
    for (auto s : r.spec.seeds) ss << " " << s;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "\nmean_accuracy = %.6f\nstd_accuracy = %.6f\nmean_macro_f1 = %.6f\n"
                  "std_macro_f1 = %.6f\n",
                  r.mean_accuracy, r.std_accuracy, r.mean_f1, r.std_f1);
    ss << buf << "per_seed_accuracy =";
    for (const auto& run : r.runs) {
        std::snprintf(buf, sizeof buf, " %.6f", run.train.test_accuracy);
        ss << buf;
    }
    ss << "\n";
    return ss.str();
}

} // namespace mcbnn
