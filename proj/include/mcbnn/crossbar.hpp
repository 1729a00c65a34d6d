#pragma once

#include "mcbnn/common.hpp"
#include "mcbnn/device.hpp"
#include "mcbnn/waveform.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mcbnn {

// Per-phase voltage audit. During reads every cell is tracked; during
// writes only cells under an OFF column switch are.
struct PhaseAudit {
    double max_abs_read_v = 0;
    double max_abs_off_v = 0;
    bool pass(const DeviceCharacterization& model) const {
        const double lim_hi = model.v_th_pos, lim_lo = model.v_th_neg;
        return max_abs_read_v <= lim_hi && max_abs_read_v <= -lim_lo &&
               max_abs_off_v <= lim_hi && max_abs_off_v <= -lim_lo;
    }
    void merge(const PhaseAudit& o) {
        max_abs_read_v = std::max(max_abs_read_v, o.max_abs_read_v);
        max_abs_off_v = std::max(max_abs_off_v, o.max_abs_off_v);
    }
};

struct FaultPlan {
    double fraction = 0;
    std::uint64_t seed = 0;
};

// Memristive crossbar of (n+1) rows x m columns; row 0 is the bias row.
struct CrossbarState {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> x;                            // cell states, row-major
    std::vector<const MemristorParams*> cell_params;  // per cell
    std::vector<std::uint8_t> stuck;                  // fault flags

    const MemristorParams* nominal = nullptr;
    DeviceCharacterization model;   // characterization used for encoding
    EncodingConstants enc;
    Timing timing;
    double R0 = 0;       // output op-amp feedback resistance [ohm]
    double Gs_on = 0;    // switch conductances [S]
    double Gs_off = 1e-9;

    bool audit_enabled = true;
    PhaseAudit audit;                 // accumulated over phases since reset
    bool trace_energy = false;
    std::vector<double> cell_energy; // [J] per cell, when tracing

    double G_of(std::size_t r, std::size_t c) const {
        const std::size_t k = r * cols + c;
        return small_signal_conductance(*cell_params[k], x[k]);
    }
};

// Build a crossbar with healthy cells drawn uniformly from [G_lo, G_hi].
CrossbarState make_crossbar(std::size_t rows, std::size_t cols, const DeviceModel& model,
                            double R0, const EncodingConstants& enc, const Timing& timing,
                            Rng& rng, double G_lo = 0, double G_hi = 0);

// Re-draw healthy cell conductances uniformly in [G_lo, G_hi].
void reinit_conductances(CrossbarState& cb, double G_lo, double G_hi, Rng& rng);

// w_ji = a * R0 * (G_ref - G_ji)
double weight_of(const CrossbarState& cb, std::size_t col, std::size_t row);
Matrix weights_dense(const CrossbarState& cb); // rows x cols of weight_of

// Simulated read phases. Inputs are feature-unit values; the bias input
// x0 = enc.x_max is prepended internally. No cell state changes.
std::vector<double> forward_read(const CrossbarState& cb, std::span<const double> x);
std::vector<double> backward_read(const CrossbarState& cb, std::span<const double> y);

// Time-domain write phase: every healthy cell integrates its row update
// waveform against the column node voltage solved per step. OpenMP-parallel
// across columns; the serial variant computes bit-identical results and is
// kept as the reference for tests and benchmarks.
void write_phase(CrossbarState& cb, std::span<const double> x, std::span<const double> y);
void write_phase_serial(CrossbarState& cb, std::span<const double> x, std::span<const double> y);

// Analytic shortcut: dG = -(eta_eff / (a*R0)) * x_i * y_j, clipped to the
// linear region; stuck cells frozen.
void write_phase_behavioral(CrossbarState& cb, std::span<const double> x,
                            std::span<const double> y, double eta_eff);

void inject_faults(CrossbarState& cb, const FaultPlan& plan);

struct AuditReport {
    PhaseAudit audit;
    bool pass = false;
};
AuditReport sneak_path_audit(const CrossbarState& cb);
void reset_audit(CrossbarState& cb);

// Conductance snapshot: row,col,G,stuck
void write_conductance_csv(const CrossbarState& cb, std::ostream& os);

// Switch conductance satisfying the on/off separation premises for this
// geometry and device model.
double switch_on_conductance(std::size_t rows, const DeviceCharacterization& model);

} // namespace mcbnn
