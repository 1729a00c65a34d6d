#pragma once

#include <string>
#include <vector>

namespace mcbnn {

// Fitting parameters of the generalized voltage-threshold memristor model.
struct MemristorParams {
    double a1 = 0;      // current amplitude, v >= 0 branch [A]
    double a2 = 0;      // current amplitude, v < 0 branch [A]
    double b = 0;       // I-V curvature [1/V]
    double Ap = 0;      // state speed, positive drive [1/s]
    double An = 0;      // state speed, negative drive [1/s]
    double xp = 0;      // window onset for rising state
    double xn = 0;      // window onset for falling state (measured from x = 1)
    double Vp = 0;      // positive threshold magnitude [V]
    double Vn = 0;      // negative threshold magnitude [V]
    double alpha_p = 0; // exponential damping, rising
    double alpha_n = 0; // exponential damping, falling
    double eta = 1;     // polarity: +1 or -1

    void validate() const;
    // +1 if positive applied voltage raises conductance as mounted, else -1.
    double mount() const { return eta >= 0 ? 1.0 : -1.0; }
};

// One memristor: internal state variable x in [0,1] plus its parameter set.
struct DeviceState {
    double x = 0.5;
    const MemristorParams* params = nullptr;
};

// Empirical characterization extracted from a simulated pulse train.
struct DeviceCharacterization {
    double v_th_pos = 0;  // effective thresholds in the mounted frame [V]
    double v_th_neg = 0;
    double G_abs_min = 0; // full conductance excursion [S]
    double G_abs_max = 0;
    double G_lin_min = 0; // linear-region bounds [S]
    double G_lin_max = 0;
    double c1 = 0;        // slope of the decreasing linear segment [S/s], < 0
    double c2 = 0;        // slope of the increasing linear segment [S/s], > 0

    double G_ref() const { return 0.5 * (G_lin_min + G_lin_max); }
};

// Calibration pulse train: reset with -amplitude, then record one
// +amplitude/-amplitude cycle of the given widths.
struct PulseSpec {
    double amplitude = 0; // [V], mounted frame
    double width_pos = 0; // [s]
    double width_neg = 0; // [s]
    double dt = 0;        // integration step [s]
};

// I = a1*x*sinh(b*v) for v >= 0, a2*x*sinh(b*v) for v < 0 (device frame).
double device_current(const DeviceState& s, double v);

// Small-signal conductance dI/dv at v -> 0.
double small_signal_conductance(const MemristorParams& p, double x);
inline double small_signal_conductance(const DeviceState& s) {
    return small_signal_conductance(*s.params, s.x);
}

// Invert G = a1*b*x; used to seed states from a conductance range.
double state_for_conductance(const MemristorParams& p, double G);

// Advance the state under constant applied voltage (mounted frame) for dt
// seconds. Sub-steps internally so |dx| <= 0.05 per Euler step; x stays
// clamped to [0,1]. Inside the threshold window the state is untouched.
DeviceState device_step(const DeviceState& s, double v_applied, double dt);

// Simulated G(t) point.
struct GtSample {
    double t;
    double G;
};

struct CharacterizeOptions {
    // detector constants; see characterize() notes
    int resample_points = 200;
    int window = 28;
    double r2_min = 0.995;
    double extend_tol = 0.04; // fraction of segment span
};

// Drive the device with the pulse train, extract G(t) at a sub-threshold
// read voltage (0.1 * v_th_pos) and detect the linear conductance region:
// each monotone segment is resampled uniformly in G, scanned with a sliding
// least-squares window (R^2 >= r2_min), the longest run is kept and extended
// along its fitted line, and the linear region is the overlap of the rising
// and falling runs. c1/c2 are the local slopes where each branch crosses the
// midpoint of the detected region. Throws if no monotone segment of >= 10
// samples exists.
DeviceCharacterization characterize(const MemristorParams& p, const PulseSpec& pulse,
                                    const CharacterizeOptions& opts = {},
                                    std::vector<GtSample>* curve_out = nullptr);

enum class VariationDirection { decreased, increased };

// Exact parameter rows for the 10% I-V variation study.
MemristorParams apply_variation(const MemristorParams& base, VariationDirection dir,
                                const std::string& model);

// Built-in device models.
struct DeviceModel {
    std::string name;
    MemristorParams params;
    PulseSpec default_pulse;
    // published characterization (thresholds echoed from params)
    DeviceCharacterization published;
    double init_lo = 0; // baseline conductance init range [S]
    double init_hi = 0;
};

const DeviceModel& builtin_model(const std::string& name); // "silver" | "titania"
std::vector<std::string> builtin_model_names();

// Override parameters from flat "key = value" entries (a1, a2, b, Ap, An,
// xp, xn, Vp, Vn, alpha_p, alpha_n, eta).
MemristorParams params_from_config(const MemristorParams& base,
                                   const std::vector<std::pair<std::string, std::string>>& kv);

} // namespace mcbnn
