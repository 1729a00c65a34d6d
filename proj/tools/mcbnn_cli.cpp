#include "mcbnn/config.hpp"
#include "mcbnn/experiment.hpp"
#include "mcbnn/network.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

int cmd_characterize(const std::string& model_name, const std::string& out_dir,
                     double amplitude, double width_pos, double width_neg, double dt) {
    const mcbnn::DeviceModel& model = mcbnn::builtin_model(model_name);
    mcbnn::PulseSpec pulse = model.default_pulse;
    if (amplitude > 0) pulse.amplitude = amplitude;
    if (width_pos > 0) pulse.width_pos = width_pos;
    if (width_neg > 0) pulse.width_neg = width_neg;
    if (dt > 0) pulse.dt = dt;

    std::vector<mcbnn::GtSample> curve;
    const mcbnn::DeviceCharacterization c = mcbnn::characterize(model.params, pulse, {}, &curve);

    std::printf("model = %s\n", model_name.c_str());
    std::printf("pulse: amplitude = %g V, width_pos = %g s, width_neg = %g s, dt = %g s\n",
                pulse.amplitude, pulse.width_pos, pulse.width_neg, pulse.dt);
    std::printf("v_th_pos = %.6g V\nv_th_neg = %.6g V\n", c.v_th_pos, c.v_th_neg);
    std::printf("G_abs = [%.6g, %.6g] S\n", c.G_abs_min, c.G_abs_max);
    std::printf("G_lin = [%.6g, %.6g] S\n", c.G_lin_min, c.G_lin_max);
    std::printf("c1 = %.6g S/s\nc2 = %.6g S/s\n", c.c1, c.c2);
    std::printf("G_ref = %.6g S\n", c.G_ref());

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir + "/conductance_vs_time.csv");
        f << "t,G\n";
        char buf[64];
        for (const auto& s : curve) {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", s.t, s.G);
            f << buf;
        }
        std::printf("curve written to %s/conductance_vs_time.csv\n", out_dir.c_str());
    }
    return 0;
}

std::vector<std::size_t> parse_layers(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t dash = text.find('-', pos);
        if (dash == std::string::npos) dash = text.size();
        out.push_back(std::stoull(text.substr(pos, dash - pos)));
        pos = dash + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memristive crossbar neural network simulator"};
    app.require_subcommand(1);

    // characterize
    auto* chr = app.add_subcommand("characterize", "simulate and report device characterization");
    std::string chr_model = "silver", chr_out;
    double chr_amp = 0, chr_wpos = 0, chr_wneg = 0, chr_dt = 0;
    chr->add_option("--model", chr_model, "device model")->check(CLI::IsMember({"silver", "titania"}));
    chr->add_option("--out", chr_out, "directory for the G(t) curve CSV");
    chr->add_option("--amplitude", chr_amp, "calibration pulse amplitude [V]");
    chr->add_option("--width-pos", chr_wpos, "positive pulse width [s]");
    chr->add_option("--width-neg", chr_wneg, "negative pulse width [s]");
    chr->add_option("--dt", chr_dt, "integration step [s]");

    // train
    auto* tr = app.add_subcommand("train", "train one network and write its report");
    std::string tr_dataset = "iris", tr_model = "silver", tr_mode = "device", tr_out = "out";
    std::string tr_layers, tr_config;
    std::uint64_t tr_seed = 42;
    long long tr_epochs = 0;
    double tr_r0 = 0, tr_ks = 0;
    bool tr_wave = false, tr_energy = false, tr_signals = false;
    tr->add_option("--dataset", tr_dataset, "builtin name or CSV path");
    tr->add_option("--model", tr_model, "device model")->check(CLI::IsMember({"silver", "titania"}));
    tr->add_option("--mode", tr_mode, "simulation mode")->check(CLI::IsMember({"device", "behavioral"}));
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_option("--seed", tr_seed, "run seed");
    tr->add_option("--out", tr_out, "output directory");
    tr->add_option("--layers", tr_layers, "override topology, e.g. 4-4-3");
    tr->add_option("--R0", tr_r0, "feedback resistance [ohm]");
    tr->add_option("--kappa-scale", tr_ks, "multiplier on the calibrated kappa");
    tr->add_option("--config", tr_config, "config file with [network]/[timing]/[encoding]");
    tr->add_flag("--dump-waveforms", tr_wave, "emit waveform CSVs");
    tr->add_flag("--trace-energy", tr_energy, "accumulate per-synapse energy");
    tr->add_flag("--trace-signals", tr_signals, "emit per-step signal traces");

    // experiment
    auto* ex = app.add_subcommand("experiment", "run a multi-seed experiment from a spec file");
    std::string ex_spec, ex_out = "out";
    ex->add_option("--spec", ex_spec, "experiment config file")->required();
    ex->add_option("--out", ex_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (chr->parsed())
            return cmd_characterize(chr_model, chr_out, chr_amp, chr_wpos, chr_wneg, chr_dt);

        if (tr->parsed()) {
            mcbnn::ExperimentSpec spec;
            if (!tr_config.empty())
                spec = mcbnn::spec_from_config(mcbnn::Config::parse_file(tr_config));
            spec.kind = mcbnn::ExperimentKind::baseline;
            spec.dataset = tr_dataset;
            spec.net.model = tr_model;
            spec.net.mode = tr_mode == "device" ? mcbnn::Mode::device : mcbnn::Mode::behavioral;
            if (tr_epochs > 0) spec.net.epochs = static_cast<std::size_t>(tr_epochs);
            if (tr_r0 > 0) spec.net.R0 = tr_r0;
            if (tr_ks > 0) spec.net.kappa_scale = tr_ks;
            if (!tr_layers.empty()) spec.net.layer_sizes = parse_layers(tr_layers);

            mcbnn::RunOptions opts;
            opts.out_dir = tr_out;
            opts.dump_waveforms = tr_wave;
            opts.trace_energy = tr_energy;
            opts.trace_signals = tr_signals;
            const mcbnn::RunReport rep = mcbnn::run_single(spec, tr_seed, opts);
            std::printf("train_accuracy = %.6f\ntest_accuracy = %.6f\ntest_macro_f1 = %.6f\n",
                        rep.train.train_accuracy, rep.train.test_accuracy,
                        rep.train.test_macro_f1);
            std::printf("audit = %s\nreport written to %s\n",
                        rep.train.audit_pass ? "PASS" : "FAIL", tr_out.c_str());
            return 0;
        }

        if (ex->parsed()) {
            const mcbnn::ExperimentSpec spec =
                mcbnn::spec_from_config(mcbnn::Config::parse_file(ex_spec));
            const mcbnn::ExperimentResult result = mcbnn::run_experiment(spec);
            std::filesystem::create_directories(ex_out);
            for (const auto& run : result.runs) {
                const std::string dir = ex_out + "/seed_" + std::to_string(run.seed);
                std::filesystem::create_directories(dir);
                std::ofstream f(dir + "/report.txt");
                f << mcbnn::render_report(spec, run);
            }
            const std::string summary = mcbnn::render_summary(result);
            std::ofstream f(ex_out + "/summary.txt");
            f << summary;
            std::fputs(summary.c_str(), stdout);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 1;
}
