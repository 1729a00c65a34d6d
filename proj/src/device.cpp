#include "mcbnn/device.hpp"
#include "mcbnn/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mcbnn {

void MemristorParams::validate() const {
    require(Vp > 0 && Vn > 0, "thresholds must be positive magnitudes");
    require(xp > 0 && xp < 1 && xn > 0 && xn < 1, "xp, xn must lie in (0,1)");
    require(a1 > 0 && a2 > 0, "a1, a2 must be positive");
    require(Ap >= 0 && An >= 0, "Ap, An must be nonnegative");
    require(eta == 1.0 || eta == -1.0, "eta must be +1 or -1");
}

double device_current(const DeviceState& s, double v) {
    const MemristorParams& p = *s.params;
    const double amp = (v >= 0) ? p.a1 : p.a2;
    return amp * s.x * std::sinh(p.b * v);
}

double small_signal_conductance(const MemristorParams& p, double x) {
    return p.a1 * p.b * x;
}

double state_for_conductance(const MemristorParams& p, double G) {
    return G / (p.a1 * p.b);
}

namespace {

// exponential drive; zero inside the threshold window
double drive(const MemristorParams& p, double v) {
    if (v > p.Vp) return p.Ap * (std::exp(v) - std::exp(p.Vp));
    if (v < -p.Vn) return -p.An * (std::exp(-v) - std::exp(p.Vn));
    return 0.0;
}

// state-motion window; taper reaches zero at the boundary
double window_fn(const MemristorParams& p, double x, bool rising) {
    if (rising) {
        if (x < p.xp) return 1.0;
        return std::exp(-p.alpha_p * (x - p.xp)) * (1.0 - x) / (1.0 - p.xp);
    }
    if (x > 1.0 - p.xn) return 1.0;
    return std::exp(p.alpha_n * (x + p.xn - 1.0)) * std::max(x, 0.0) / (1.0 - p.xn);
}

constexpr double kMaxDxPerStep = 0.05;

} // namespace

DeviceState device_step(const DeviceState& s, double v_applied, double dt) {
    require(std::isfinite(v_applied) && std::isfinite(dt), "voltage and dt must be finite");
    require(dt > 0, "dt must be positive");
    const MemristorParams& p = *s.params;
    const double v = p.mount() * v_applied;
    const double g = drive(p, v);
    if (g == 0.0) return s; // inert window: bit-identical state

    DeviceState out = s;
    const bool rising = (p.eta * g) > 0;
    double remaining = dt;
    while (remaining > 0) {
        const double rate = p.eta * g * window_fn(p, out.x, rising);
        if (rate == 0.0) break;
        double h = remaining;
        if (std::abs(rate) * h > kMaxDxPerStep) h = kMaxDxPerStep / std::abs(rate);
        out.x = std::clamp(out.x + rate * h, 0.0, 1.0);
        remaining -= h;
    }
    return out;
}

namespace {

struct MonotoneSegment {
    std::size_t first, last; // inclusive sample indices
    int dir;                 // +1 rising, -1 falling
};

std::vector<MonotoneSegment> monotone_segments(const std::vector<GtSample>& curve) {
    std::vector<MonotoneSegment> segs;
    const std::size_t n = curve.size();
    std::size_t i = 0;
    while (i + 1 < n) {
        int dir = 0;
        std::size_t j = i;
        while (j + 1 < n) {
            const double d = curve[j + 1].G - curve[j].G;
            if (d != 0.0) {
                const int ds = d > 0 ? 1 : -1;
                if (dir == 0) dir = ds;
                else if (ds != dir) break;
            }
            ++j;
        }
        if (dir != 0 && j - i + 1 >= 10) segs.push_back({i, j, dir});
        i = (j > i) ? j : i + 1;
    }
    return segs;
}

struct LinearRun {
    double G_lo, G_hi;
    double slope;
    double t_lo, t_hi;
    bool valid = false;
};

// resample the segment at conductance levels uniform over its span,
// taking the first time each level is crossed
void resample_uniform_G(const std::vector<GtSample>& curve, const MonotoneSegment& seg,
                        int n_points, std::vector<double>& t_out, std::vector<double>& G_out) {
    t_out.clear();
    G_out.clear();
    const double G0 = curve[seg.first].G, G1 = curve[seg.last].G;
    std::size_t cursor = seg.first;
    for (int k = 0; k < n_points; ++k) {
        const double level = G0 + (G1 - G0) * k / (n_points - 1);
        while (cursor < seg.last) {
            const double a = curve[cursor].G, b = curve[cursor + 1].G;
            const bool crossed = seg.dir > 0 ? (b >= level) : (b <= level);
            if (crossed) break;
            ++cursor;
        }
        const double a = curve[cursor].G, b = curve[std::min(cursor + 1, seg.last)].G;
        double t;
        if (a == b) {
            t = curve[cursor].t;
        } else {
            const double f = std::clamp((level - a) / (b - a), 0.0, 1.0);
            t = curve[cursor].t + f * (curve[std::min(cursor + 1, seg.last)].t - curve[cursor].t);
        }
        t_out.push_back(t);
        G_out.push_back(level);
    }
}

LinearRun detect_linear(const std::vector<double>& t, const std::vector<double>& G,
                        const CharacterizeOptions& o) {
    LinearRun run;
    const int n = static_cast<int>(G.size());
    const int K = std::min(o.window, n);
    if (n < K || K < 3) return run;

    std::vector<char> good(n - K + 1, 0);
    for (int i = 0; i + K <= n; ++i) {
        double tm = 0, gm = 0;
        for (int k = 0; k < K; ++k) { tm += t[i + k]; gm += G[i + k]; }
        tm /= K; gm /= K;
        double stt = 0, stg = 0, sgg = 0;
        for (int k = 0; k < K; ++k) {
            const double dt = t[i + k] - tm, dg = G[i + k] - gm;
            stt += dt * dt; stg += dt * dg; sgg += dg * dg;
        }
        const double r2 = (stt > 0 && sgg > 0) ? (stg * stg) / (stt * sgg) : 1.0;
        good[i] = r2 >= o.r2_min;
    }

    int best_i = -1, best_j = -1;
    for (int i = 0; i < static_cast<int>(good.size());) {
        if (!good[i]) { ++i; continue; }
        int j = i;
        while (j < static_cast<int>(good.size()) && good[j]) ++j;
        if (best_i < 0 || (j - 1 + K - 1 - i) > (best_j - best_i)) {
            best_i = i;
            best_j = j - 1 + K - 1;
        }
        i = j;
    }
    if (best_i < 0) return run;

    // least-squares slope over the core run
    double tm = 0, gm = 0;
    const int m = best_j - best_i + 1;
    for (int k = best_i; k <= best_j; ++k) { tm += t[k]; gm += G[k]; }
    tm /= m; gm /= m;
    double stt = 0, stg = 0;
    for (int k = best_i; k <= best_j; ++k) {
        stt += (t[k] - tm) * (t[k] - tm);
        stg += (t[k] - tm) * (G[k] - gm);
    }
    const double slope = stg / stt;
    const double icpt = gm - slope * tm;

    // grow the run along its fitted line
    const double tol = o.extend_tol * std::abs(G.back() - G.front());
    int lo = best_i, hi = best_j;
    while (lo > 0 && std::abs(slope * t[lo - 1] + icpt - G[lo - 1]) <= tol) --lo;
    while (hi + 1 < n && std::abs(slope * t[hi + 1] + icpt - G[hi + 1]) <= tol) ++hi;

    run.G_lo = std::min(G[lo], G[hi]);
    run.G_hi = std::max(G[lo], G[hi]);
    run.slope = slope;
    run.t_lo = t[lo];
    run.t_hi = t[hi];
    run.valid = true;
    return run;
}

// local slope of the segment where it crosses G = level
double local_slope_at(const std::vector<GtSample>& curve, const MonotoneSegment& seg,
                      double level, double half_width) {
    double t0 = 0, t1 = 0;
    bool found0 = false, found1 = false;
    const double lo = level - half_width, hi = level + half_width;
    for (std::size_t i = seg.first; i < seg.last; ++i) {
        const double a = curve[i].G, b = curve[i + 1].G;
        auto crosses = [&](double lev) {
            return (a <= lev && b >= lev) || (a >= lev && b <= lev);
        };
        if (!found0 && crosses(lo)) {
            const double f = (lo - a) / (b - a);
            t0 = curve[i].t + f * (curve[i + 1].t - curve[i].t);
            found0 = true;
        }
        if (!found1 && crosses(hi)) {
            const double f = (hi - a) / (b - a);
            t1 = curve[i].t + f * (curve[i + 1].t - curve[i].t);
            found1 = true;
        }
        if (found0 && found1) break;
    }
    if (!found0 || !found1 || t0 == t1) return 0.0;
    return (hi - lo) / (t1 - t0);
}

} // namespace

DeviceCharacterization characterize(const MemristorParams& p, const PulseSpec& pulse,
                                    const CharacterizeOptions& opts,
                                    std::vector<GtSample>* curve_out) {
    p.validate();
    require(pulse.amplitude > std::max(p.Vp, p.Vn),
            "calibration amplitude must exceed both thresholds");
    require(pulse.dt > 0 && pulse.width_pos > 0 && pulse.width_neg > 0,
            "pulse widths and dt must be positive");

    DeviceState s{0.5, &p};
    // reset low, unrecorded
    {
        const int n = static_cast<int>(pulse.width_neg / pulse.dt);
        for (int i = 0; i < n; ++i) s = device_step(s, -pulse.amplitude, pulse.dt);
    }

    std::vector<GtSample> curve;
    double t = 0;
    const double v_read = 0.1 * (p.mount() > 0 ? p.Vp : p.Vn);
    auto record = [&] {
        const double I = device_current(s, v_read);
        curve.push_back({t, I / v_read});
    };
    record();
    for (const double polarity : {+1.0, -1.0}) {
        const double width = polarity > 0 ? pulse.width_pos : pulse.width_neg;
        const int n = static_cast<int>(width / pulse.dt);
        for (int i = 0; i < n; ++i) {
            s = device_step(s, polarity * pulse.amplitude, pulse.dt);
            t += pulse.dt;
            record();
        }
    }
    if (curve_out) *curve_out = curve;

    const auto segs = monotone_segments(curve);
    require(!segs.empty(), "characterize: no monotone segment of >= 10 samples");

    LinearRun rise, fall;
    const MonotoneSegment* rise_seg = nullptr;
    const MonotoneSegment* fall_seg = nullptr;
    std::vector<double> ts, gs;
    for (const auto& seg : segs) {
        resample_uniform_G(curve, seg, opts.resample_points, ts, gs);
        const LinearRun run = detect_linear(ts, gs, opts);
        if (!run.valid) continue;
        if (seg.dir > 0 && (!rise.valid || run.G_hi - run.G_lo > rise.G_hi - rise.G_lo)) {
            rise = run;
            rise_seg = &seg;
        }
        if (seg.dir < 0 && (!fall.valid || run.G_hi - run.G_lo > fall.G_hi - fall.G_lo)) {
            fall = run;
            fall_seg = &seg;
        }
    }
    require(rise.valid && fall.valid, "characterize: no linear run detected in both directions");

    DeviceCharacterization out;
    out.v_th_pos = p.mount() > 0 ? p.Vp : p.Vn;
    out.v_th_neg = p.mount() > 0 ? -p.Vn : -p.Vp;

    double gmin = curve.front().G, gmax = curve.front().G;
    for (const auto& c : curve) {
        gmin = std::min(gmin, c.G);
        gmax = std::max(gmax, c.G);
    }
    out.G_abs_min = gmin;
    out.G_abs_max = gmax;
    out.G_lin_min = std::max(rise.G_lo, fall.G_lo);
    out.G_lin_max = std::min(rise.G_hi, fall.G_hi);
    require(out.G_lin_min < out.G_lin_max,
            "characterize: rising and falling linear runs do not overlap");

    // local slopes at the region midpoint drive the switch-duration scaling
    const double mid = out.G_ref();
    const double hw = 0.01 * (out.G_lin_max - out.G_lin_min);
    double c2 = local_slope_at(curve, *rise_seg, mid, hw);
    double c1 = local_slope_at(curve, *fall_seg, mid, hw);
    if (c2 == 0.0) c2 = rise.slope;
    if (c1 == 0.0) c1 = fall.slope;
    out.c2 = std::abs(c2);
    out.c1 = -std::abs(c1);
    return out;
}

MemristorParams apply_variation(const MemristorParams& base, VariationDirection dir,
                                const std::string& model) {
    MemristorParams v = base;
    if (model == "silver" && dir == VariationDirection::decreased) {
        v.a1 = 0.153; v.a2 = 0.153; v.b = 0.045; v.Ap = 2680; v.An = 2680;
        v.xp = 0.18462; v.xn = 0.3077; v.Vp = 0.104848; v.Vn = 0.098295;
        v.alpha_p = 0.145; v.alpha_n = 0.725; v.eta = 1;
    } else if (model == "silver" && dir == VariationDirection::increased) {
        v.a1 = 0.187; v.a2 = 0.187; v.b = 0.055; v.Ap = 5924; v.An = 5924;
        v.xp = 0.42363; v.xn = 0.70605; v.Vp = 0.217696; v.Vn = 0.20409;
        v.alpha_p = 2.115; v.alpha_n = 10.575; v.eta = 1;
    } else if (model == "titania" && dir == VariationDirection::decreased) {
        v.a1 = 1.26; v.a2 = 1.26; v.b = 0.045; v.Ap = 9.888; v.An = 6.798;
        v.xp = 0.2139; v.xn = 0.3565; v.Vp = 0.594165; v.Vn = 0.511896;
        v.alpha_p = 0.0; v.alpha_n = 0.0; v.eta = -1;
    } else if (model == "titania" && dir == VariationDirection::increased) {
        v.a1 = 1.54; v.a2 = 1.54; v.b = 0.055; v.Ap = 32.16; v.An = 22.11;
        v.xp = 0.57903; v.xn = 0.96505; v.Vp = 0.6994; v.Vn = 0.60256;
        v.alpha_p = 1.9855; v.alpha_n = 11.191; v.eta = -1;
    } else {
        throw std::invalid_argument("apply_variation: unknown model '" + model + "'");
    }
    return v;
}

namespace {

DeviceModel make_silver() {
    DeviceModel m;
    m.name = "silver";
    m.params = {0.17, 0.17, 0.05, 4000, 4000, 0.3, 0.5, 0.16, 0.15, 1.0, 5.0, 1.0};
    m.default_pulse = {0.5, 3.6e-3, 4.8e-3, 2e-6};
    m.published.v_th_pos = 0.16;
    m.published.v_th_neg = -0.15;
    m.published.G_abs_min = 0.255e-3;
    m.published.G_abs_max = 8.5e-3;
    m.published.G_lin_min = 3.18e-3;
    m.published.G_lin_max = 6.38e-3;
    m.init_lo = 4.4e-3;
    m.init_hi = 5.0e-3;
    return m;
}

DeviceModel make_titania() {
    DeviceModel m;
    m.name = "titania";
    m.params = {1.4, 1.4, 0.05, 16, 11, 0.3, 0.5, 0.65, 0.56, 1.1, 6.2, -1.0};
    m.default_pulse = {1.2, 0.45, 0.98, 5e-5};
    m.published.v_th_pos = 0.56;  // mounted frame: polarity inverted device
    m.published.v_th_neg = -0.65;
    m.published.G_abs_min = 1e-3;
    m.published.G_abs_max = 70e-3;
    m.published.G_lin_min = 28e-3;
    m.published.G_lin_max = 48e-3;
    m.init_lo = 35e-3;
    m.init_hi = 41e-3;
    return m;
}

} // namespace

const DeviceModel& builtin_model(const std::string& name) {
    static const DeviceModel silver = make_silver();
    static const DeviceModel titania = make_titania();
    if (name == "silver") return silver;
    if (name == "titania") return titania;
    throw std::invalid_argument("unknown device model '" + name + "'");
}

std::vector<std::string> builtin_model_names() { return {"silver", "titania"}; }

MemristorParams params_from_config(const MemristorParams& base,
                                   const std::vector<std::pair<std::string, std::string>>& kv) {
    MemristorParams p = base;
    for (const auto& [key, value] : kv) {
        const double v = std::strtod(value.c_str(), nullptr);
        if (key == "a1") p.a1 = v;
        else if (key == "a2") p.a2 = v;
        else if (key == "b") p.b = v;
        else if (key == "Ap") p.Ap = v;
        else if (key == "An") p.An = v;
        else if (key == "xp") p.xp = v;
        else if (key == "xn") p.xn = v;
        else if (key == "Vp") p.Vp = v;
        else if (key == "Vn") p.Vn = v;
        else if (key == "alpha_p") p.alpha_p = v;
        else if (key == "alpha_n") p.alpha_n = v;
        else if (key == "eta") p.eta = v;
        else throw std::invalid_argument("unknown device parameter '" + key + "'");
    }
    p.validate();
    return p;
}

} // namespace mcbnn
