#include "mcbnn/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mcbnn {

namespace {

// current through a mounted cell under an applied voltage
double applied_current(const MemristorParams& p, double x, double v_applied) {
    const double m = p.mount();
    DeviceState s{x, &p};
    return m * device_current(s, m * v_applied);
}

} // namespace

double switch_on_conductance(std::size_t rows, const DeviceCharacterization& model) {
    return 1e4 * (static_cast<double>(rows) * model.G_abs_max + model.G_ref());
}

CrossbarState make_crossbar(std::size_t rows, std::size_t cols, const DeviceModel& model,
                            double R0, const EncodingConstants& enc, const Timing& timing,
                            Rng& rng, double G_lo, double G_hi) {
    require(rows >= 1 && cols >= 1, "crossbar must have at least one row and column");
    CrossbarState cb;
    cb.rows = rows;
    cb.cols = cols;
    cb.nominal = &model.params;
    cb.model = model.published;
    cb.enc = enc;
    cb.timing = timing;
    cb.R0 = R0;
    cb.Gs_on = switch_on_conductance(rows, cb.model);
    cb.cell_params.assign(rows * cols, cb.nominal);
    cb.stuck.assign(rows * cols, 0);
    cb.x.assign(rows * cols, 0.0);
    if (G_lo <= 0 || G_hi <= 0) {
        G_lo = model.init_lo;
        G_hi = model.init_hi;
    }
    reinit_conductances(cb, G_lo, G_hi, rng);
    return cb;
}

void reinit_conductances(CrossbarState& cb, double G_lo, double G_hi, Rng& rng) {
    require(G_lo > 0 && G_hi >= G_lo, "bad conductance init range");
    for (std::size_t k = 0; k < cb.x.size(); ++k) {
        if (cb.stuck[k]) continue;
        const double G = rng.uniform(G_lo, G_hi);
        cb.x[k] = state_for_conductance(*cb.cell_params[k], G);
    }
}

double weight_of(const CrossbarState& cb, std::size_t col, std::size_t row) {
    require(row < cb.rows && col < cb.cols, "cell index out of range");
    return cb.enc.a * cb.R0 * (cb.model.G_ref() - cb.G_of(row, col));
}

Matrix weights_dense(const CrossbarState& cb) {
    Matrix w(cb.rows, cb.cols);
    for (std::size_t i = 0; i < cb.rows; ++i)
        for (std::size_t j = 0; j < cb.cols; ++j)
            w(i, j) = weight_of(cb, j, i);
    return w;
}

namespace {

// node voltage per the conductance balance: all rows driven, one resistor
// of conductance G_ref to the summing amplifier output vf, switch Gs to
// the (virtual ground) output stage
double column_node_voltage(const CrossbarState& cb, std::size_t col,
                           const std::vector<double>& v_rows, double vf, double Gs) {
    double num = vf * cb.model.G_ref();
    double den = Gs + cb.model.G_ref();
    for (std::size_t i = 0; i < cb.rows; ++i) {
        const double G = cb.G_of(i, col);
        num += v_rows[i] * G;
        den += G;
    }
    return num / den;
}

std::vector<double> encoded_inputs(const CrossbarState& cb, std::span<const double> x) {
    require(x.size() + 1 == cb.rows, "input dimension must match feature rows");
    std::vector<double> v(cb.rows);
    v[0] = cb.enc.a * cb.enc.x_max; // bias row at full scale
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double vi = cb.enc.a * x[i];
        require(vi > cb.model.v_th_neg && vi < cb.model.v_th_pos, "read safety violation");
        v[i + 1] = vi;
    }
    return v;
}

} // namespace

std::vector<double> forward_read(const CrossbarState& cb, std::span<const double> x) {
    const std::vector<double> v_rows = encoded_inputs(cb, x);
    const double vf = -std::accumulate(v_rows.begin(), v_rows.end(), 0.0);
    std::vector<double> r(cb.cols);
    PhaseAudit audit;
    double* energy = nullptr;
    auto& self = const_cast<CrossbarState&>(cb);
    if (cb.trace_energy && self.cell_energy.size() == cb.x.size())
        energy = self.cell_energy.data();
    for (std::size_t j = 0; j < cb.cols; ++j) {
        const double v = column_node_voltage(cb, j, v_rows, vf, cb.Gs_on);
        r[j] = -cb.R0 * cb.Gs_on * v;
        for (std::size_t i = 0; i < cb.rows; ++i) {
            const double v_cell = v_rows[i] - v;
            audit.max_abs_read_v = std::max(audit.max_abs_read_v, std::abs(v_cell));
            if (energy) {
                const std::size_t k = i * cb.cols + j;
                energy[k] += v_cell * applied_current(*cb.cell_params[k], cb.x[k], v_cell) *
                             cb.timing.T_rd;
            }
        }
    }
    if (cb.audit_enabled) self.audit.merge(audit);
    return r;
}

std::vector<double> backward_read(const CrossbarState& cb, std::span<const double> y) {
    require(y.size() == cb.cols, "error dimension must match columns");
    std::vector<double> v_cols(cb.cols);
    for (std::size_t j = 0; j < cb.cols; ++j) {
        const double vj = cb.enc.a * y[j];
        require(vj > cb.model.v_th_neg && vj < cb.model.v_th_pos, "read safety violation");
        v_cols[j] = vj;
    }
    const double vb = -std::accumulate(v_cols.begin(), v_cols.end(), 0.0);
    std::vector<double> delta(cb.rows);
    PhaseAudit audit;
    for (std::size_t i = 0; i < cb.rows; ++i) {
        double num = vb * cb.model.G_ref();
        double den = cb.Gs_on + cb.model.G_ref();
        for (std::size_t j = 0; j < cb.cols; ++j) {
            const double G = cb.G_of(i, j);
            num += v_cols[j] * G;
            den += G;
        }
        const double u = num / den;
        delta[i] = -cb.R0 * cb.Gs_on * u;
        for (std::size_t j = 0; j < cb.cols; ++j)
            audit.max_abs_read_v = std::max(audit.max_abs_read_v, std::abs(v_cols[j] - u));
    }
    if (cb.audit_enabled) const_cast<CrossbarState&>(cb).audit.merge(audit);
    return delta;
}

namespace {

struct ColumnResult {
    PhaseAudit audit;
};

// integrate one column over the full write phase
ColumnResult step_column(CrossbarState& cb, std::size_t col, const std::vector<Waveform>& rows_w,
                         const Waveform& sched, double* energy) {
    ColumnResult res;
    const Timing& t = cb.timing;
    std::vector<double> v_rows(cb.rows);
    // walk the merged segment boundaries of the switch schedule; row
    // waveforms only change value on quarter boundaries, which the
    // schedule segments never straddle
    for (const Segment& seg : sched.segments) {
        const bool on = seg.value > 0.5;
        const double Gs = on ? cb.Gs_on : cb.Gs_off;
        double t_cur = seg.begin;
        while (t_cur < seg.end - 1e-15) {
            const double h = std::min(t.dt, seg.end - t_cur);
            for (std::size_t i = 0; i < cb.rows; ++i) v_rows[i] = sample(rows_w[i], t_cur);
            const double v_col = column_node_voltage(cb, col, v_rows, 0.0, Gs);
            for (std::size_t i = 0; i < cb.rows; ++i) {
                const std::size_t k = i * cb.cols + col;
                const double v_cell = v_rows[i] - v_col;
                if (!on)
                    res.audit.max_abs_off_v = std::max(res.audit.max_abs_off_v, std::abs(v_cell));
                if (energy)
                    energy[k] += v_cell * applied_current(*cb.cell_params[k], cb.x[k], v_cell) * h;
                if (cb.stuck[k]) continue;
                const MemristorParams& p = *cb.cell_params[k];
                DeviceState s{cb.x[k], &p};
                cb.x[k] = device_step(s, v_cell, h).x;
            }
            t_cur += h;
        }
    }
    return res;
}

void write_phase_impl(CrossbarState& cb, std::span<const double> x, std::span<const double> y,
                      bool parallel) {
    require(x.size() + 1 == cb.rows, "input dimension must match feature rows");
    require(y.size() == cb.cols, "error dimension must match columns");
    cb.enc.validate(cb.model, cb.timing);

    std::vector<Waveform> rows_w(cb.rows);
    rows_w[0] = encode_update(cb.enc.x_max, cb.enc, cb.timing, cb.model);
    for (std::size_t i = 0; i < x.size(); ++i)
        rows_w[i + 1] = encode_update(x[i], cb.enc, cb.timing, cb.model);
    std::vector<Waveform> scheds(cb.cols);
    for (std::size_t j = 0; j < cb.cols; ++j)
        scheds[j] = switch_schedule(y[j], cb.enc, cb.timing, cb.model);

    double* energy = nullptr;
    if (cb.trace_energy && cb.cell_energy.size() == cb.x.size()) energy = cb.cell_energy.data();

    std::vector<ColumnResult> results(cb.cols);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t j = 0; j < cb.cols; ++j)
            results[j] = step_column(cb, j, rows_w, scheds[j], energy);
    } else {
        for (std::size_t j = 0; j < cb.cols; ++j)
            results[j] = step_column(cb, j, rows_w, scheds[j], energy);
    }
    if (cb.audit_enabled)
        for (const auto& res : results) cb.audit.merge(res.audit);
}

} // namespace

void write_phase(CrossbarState& cb, std::span<const double> x, std::span<const double> y) {
    write_phase_impl(cb, x, y, true);
}

void write_phase_serial(CrossbarState& cb, std::span<const double> x,
                        std::span<const double> y) {
    write_phase_impl(cb, x, y, false);
}

void write_phase_behavioral(CrossbarState& cb, std::span<const double> x,
                            std::span<const double> y, double eta_eff) {
    require(eta_eff > 0, "eta_eff must be positive");
    require(x.size() + 1 == cb.rows, "input dimension must match feature rows");
    require(y.size() == cb.cols, "error dimension must match columns");
    const double scale = eta_eff / (cb.enc.a * cb.R0);
    const double lo = cb.model.G_lin_min, hi = cb.model.G_lin_max;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < cb.rows; ++i) {
        const double xi = (i == 0) ? cb.enc.x_max : x[i - 1];
        for (std::size_t j = 0; j < cb.cols; ++j) {
            const std::size_t k = i * cb.cols + j;
            if (cb.stuck[k]) continue;
            const MemristorParams& p = *cb.cell_params[k];
            const double G = small_signal_conductance(p, cb.x[k]);
            const double Gn = std::clamp(G - scale * xi * y[j], lo, hi);
            cb.x[k] = state_for_conductance(p, Gn);
        }
    }
}

void inject_faults(CrossbarState& cb, const FaultPlan& plan) {
    require(plan.fraction >= 0 && plan.fraction <= 1, "fault fraction must lie in [0,1]");
    const std::size_t n = cb.x.size();
    const auto k = static_cast<std::size_t>(std::llround(plan.fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(plan.seed);
    rng.shuffle(idx);
    for (std::size_t i = 0; i < k; ++i) cb.stuck[idx[i]] = 1;
}

AuditReport sneak_path_audit(const CrossbarState& cb) {
    AuditReport rep;
    rep.audit = cb.audit;
    rep.pass = cb.audit.pass(cb.model);
    return rep;
}

void reset_audit(CrossbarState& cb) { cb.audit = PhaseAudit{}; }

void write_conductance_csv(const CrossbarState& cb, std::ostream& os) {
    os << "row,col,G,stuck\n";
    char buf[96];
    for (std::size_t i = 0; i < cb.rows; ++i)
        for (std::size_t j = 0; j < cb.cols; ++j) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%d\n", i, j, cb.G_of(i, j),
                          static_cast<int>(cb.stuck[i * cb.cols + j]));
            os << buf;
        }
}

} // namespace mcbnn
