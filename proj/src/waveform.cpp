#include "mcbnn/waveform.hpp"
#include "mcbnn/common.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mcbnn {

void Timing::validate() const {
    require(T_rd > 0 && T_wr > 0, "phase durations must be positive");
    require(dt > 0 && dt <= T_wr / 400.0, "dt must satisfy dt <= T_wr/400");
}

void EncodingConstants::validate(const DeviceCharacterization& model, const Timing& t) const {
    require(a > 0 && x_max > 0, "encoding scales must be positive");
    require(a * x_max < std::min(model.v_th_pos, -model.v_th_neg),
            "read safety: a*x_max must stay inside the threshold window");
    require(kappa >= 0, "kappa must be nonnegative");
    const double worst = kappa * std::max(std::abs(model.c1), std::abs(model.c2));
    require(worst <= t.quarter() + 1e-15, "switch durations must fit their quarter");
}

Waveform encode_read(double x, const EncodingConstants& c, const Timing& t,
                     const DeviceCharacterization& model) {
    const double v = c.a * x;
    require(v > model.v_th_neg && v < model.v_th_pos,
            "read safety violation: encoded voltage reaches a threshold");
    return {{{0.0, t.T_rd, v}}};
}

Waveform encode_update(double x, SignBranch branch, const EncodingConstants& c,
                       const Timing& t, const DeviceCharacterization& model) {
    require(std::abs(c.a * x) < std::min(model.v_th_pos, -model.v_th_neg),
            "update encoding: |a*x| must stay inside the threshold window");
    const double ax = c.a * x;
    const double vp = model.v_th_pos, vn = model.v_th_neg;
    const double q = t.quarter(), t0 = t.write_begin();
    double v[4];
    if (branch == SignBranch::nonneg) {
        v[0] = ax + vp;
        v[1] = -ax + vn;
        v[2] = vn;
        v[3] = vp;
    } else {
        v[0] = vp;
        v[1] = vn;
        v[2] = ax + vn;
        v[3] = -ax + vp;
    }
    Waveform w;
    for (int k = 0; k < 4; ++k)
        w.segments.push_back({t0 + k * q, t0 + (k + 1) * q, v[k]});
    return w;
}

Waveform switch_schedule(double y, const EncodingConstants& c, const Timing& t,
                         const DeviceCharacterization& model) {
    const double q = t.quarter(), t0 = t.write_begin();
    // ON durations per quarter index
    double on[4] = {0, 0, 0, 0};
    if (y >= 0) {
        on[1] = c.kappa * std::abs(model.c2 * y);
        on[3] = c.kappa * std::abs(model.c1 * y);
    } else {
        on[0] = c.kappa * std::abs(model.c1 * y);
        on[2] = c.kappa * std::abs(model.c2 * y);
    }
    Waveform w;
    for (int k = 0; k < 4; ++k) {
        const double d = std::min(on[k], q);
        require(on[k] <= q + 1e-15, "switch ON duration exceeds its quarter");
        const double b = t0 + k * q, e = t0 + (k + 1) * q;
        if (d > 0) {
            w.segments.push_back({b, b + d, 1.0});
            if (b + d < e) w.segments.push_back({b + d, e, 0.0});
        } else {
            w.segments.push_back({b, e, 0.0});
        }
    }
    return w;
}

double sample(const Waveform& w, double time) {
    require(!w.segments.empty(), "empty waveform");
    require(time >= w.span_begin() && time < w.span_end(), "sample time outside waveform span");
    // half-open segments: boundary times resolve to the later segment
    for (const auto& s : w.segments)
        if (time >= s.begin && time < s.end) return s.value;
    return w.segments.back().value; // unreachable for well-formed waveforms
}

void write_csv(const Waveform& w, std::ostream& os) {
    os << "time,value\n";
    char buf[64];
    for (const auto& s : w.segments) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", s.begin, s.value);
        os << buf;
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", s.end, s.value);
        os << buf;
    }
}

} // namespace mcbnn
