#pragma once

#include "mcbnn/device.hpp"

#include <iosfwd>
#include <vector>

namespace mcbnn {

// Phase timing. The write phase is split into four equal quarters.
struct Timing {
    double T_rd = 10e-6; // read phase [s]
    double T_wr = 1e-3;  // write phase [s]
    double dt = 2.5e-6;  // simulation step [s]

    void validate() const;
    double quarter() const { return T_wr / 4.0; }
    double write_begin() const { return 2.0 * T_rd; }
    double write_end() const { return 2.0 * T_rd + T_wr; }
};

// Piecewise-constant signal; segments are half-open [begin, end).
struct Segment {
    double begin;
    double end;
    double value; // volts, or 0/1 switch state
};

struct Waveform {
    std::vector<Segment> segments;

    double span_begin() const { return segments.front().begin; }
    double span_end() const { return segments.back().end; }
};

// Encoding scales shared by every row/column interface of a crossbar.
struct EncodingConstants {
    double a = 0.6;       // feature-to-voltage scale [V per feature unit]
    double kappa = 0;     // error-to-duration scale [s per (S/s)]
    double x_max = 0.24;  // feature full scale after normalization

    void validate(const DeviceCharacterization& model, const Timing& t) const;
};

// Read-phase encoding: one segment at a*x over [0, T_rd).
Waveform encode_read(double x, const EncodingConstants& c, const Timing& t,
                     const DeviceCharacterization& model);

enum class SignBranch { nonneg, neg };

// Write-phase row voltages, four equal quarters over [2T_rd, 2T_rd+T_wr).
Waveform encode_update(double x, SignBranch branch, const EncodingConstants& c,
                       const Timing& t, const DeviceCharacterization& model);
inline Waveform encode_update(double x, const EncodingConstants& c, const Timing& t,
                              const DeviceCharacterization& model) {
    return encode_update(x, x >= 0 ? SignBranch::nonneg : SignBranch::neg, c, t, model);
}

// Column switch schedule over the write phase: leading-edge ON windows whose
// durations scale with |c2*y| / |c1*y| per quarter.
Waveform switch_schedule(double y, const EncodingConstants& c, const Timing& t,
                         const DeviceCharacterization& model);

// Value at a time inside the waveform span; boundaries resolve to the later
// segment. Throws outside the span.
double sample(const Waveform& w, double time);

void write_csv(const Waveform& w, std::ostream& os);

} // namespace mcbnn
