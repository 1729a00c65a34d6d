#include <doctest.h>

#include "mcbnn/device.hpp"
#include "mcbnn/common.hpp"

#include <cmath>

using namespace mcbnn;

TEST_CASE("device current closed form") {
    const MemristorParams& p = builtin_model("silver").params;
    DeviceState s{1.0, &p};
    CHECK(device_current(s, 0.0) == 0.0);
    // a1 = 0.17, b = 0.05: I(0.1 V) = 0.17 * sinh(0.005)
    CHECK(device_current(s, 0.1) == doctest::Approx(0.17 * std::sinh(0.005)).epsilon(1e-12));
    CHECK(device_current(s, 0.1) == doctest::Approx(8.5001e-4).epsilon(1e-4));
}

TEST_CASE("device current is odd when a1 == a2") {
    const MemristorParams& p = builtin_model("silver").params;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        DeviceState s{rng.uniform(), &p};
        const double v = rng.uniform(-1.0, 1.0);
        CHECK(device_current(s, -v) == doctest::Approx(-device_current(s, v)).epsilon(1e-12));
    }
}

TEST_CASE("small-signal conductance is a1*b*x") {
    const MemristorParams& p = builtin_model("silver").params;
    CHECK(small_signal_conductance(p, 1.0) == doctest::Approx(8.5e-3));
    CHECK(state_for_conductance(p, 8.5e-3) == doctest::Approx(1.0));
}

TEST_CASE("threshold window leaves the state bit-identical") {
    const MemristorParams& p = builtin_model("silver").params;
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform();
        // silver window is (-0.15, 0.16); include both boundaries
        const double v = rng.uniform(-0.15, 0.16);
        DeviceState s{x, &p};
        CHECK(device_step(s, v, 1e-3).x == x);
    }
    DeviceState s{0.4, &p};
    CHECK(device_step(s, 0.16, 1.0).x == 0.4);
    CHECK(device_step(s, -0.15, 1.0).x == 0.4);
    CHECK(device_step(s, 0.15, 1e-3).x == 0.4);
}

TEST_CASE("supra-threshold drive moves the state in the right direction") {
    const MemristorParams& p = builtin_model("silver").params;
    DeviceState s{0.4, &p};
    const DeviceState up = device_step(s, 0.3, 1e-5);
    CHECK(up.x > 0.4);
    const DeviceState dn = device_step(s, -0.3, 1e-5);
    CHECK(dn.x < 0.4);

    // titania mounts with inverted polarity; positive applied drive must
    // still raise conductance
    const MemristorParams& t = builtin_model("titania").params;
    DeviceState st{0.4, &t};
    CHECK(device_step(st, 1.0, 1e-4).x > 0.4);
    CHECK(device_step(st, -1.0, 1e-4).x < 0.4);
}

TEST_CASE("state stays clamped at the boundaries") {
    const MemristorParams& p = builtin_model("silver").params;
    DeviceState s{1.0, &p};
    CHECK(device_step(s, 0.5, 1e-2).x == 1.0);
    DeviceState z{0.0, &p};
    CHECK(device_step(z, -0.5, 1e-2).x == 0.0);
}

TEST_CASE("device_step rejects bad arguments") {
    const MemristorParams& p = builtin_model("silver").params;
    DeviceState s{0.5, &p};
    CHECK_THROWS_AS(device_step(s, std::nan(""), 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(device_step(s, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(device_step(s, 0.1, -1.0), std::invalid_argument);
}

TEST_CASE("halving dt changes a 1 ms pulse by < 1%") {
    const MemristorParams& p = builtin_model("silver").params;
    auto integrate = [&](double dt) {
        DeviceState s{0.4, &p};
        const int n = static_cast<int>(1e-3 / dt);
        for (int i = 0; i < n; ++i) s = device_step(s, 0.3, dt);
        return s.x;
    };
    const double coarse = integrate(2.5e-6);
    const double fine = integrate(1.25e-6);
    CHECK(std::abs(fine - coarse) / fine < 0.01);
}

TEST_CASE("characterize reproduces the published silver ranges") {
    const DeviceModel& m = builtin_model("silver");
    const DeviceCharacterization c = characterize(m.params, m.default_pulse);
    CHECK(c.v_th_pos == doctest::Approx(0.16));
    CHECK(c.v_th_neg == doctest::Approx(-0.15));
    CHECK(c.G_abs_min == doctest::Approx(0.255e-3).epsilon(0.10));
    CHECK(c.G_abs_max == doctest::Approx(8.5e-3).epsilon(0.10));
    CHECK(c.G_lin_min == doctest::Approx(3.18e-3).epsilon(0.10));
    CHECK(c.G_lin_max == doctest::Approx(6.38e-3).epsilon(0.10));
    CHECK(c.c1 < 0);
    CHECK(c.c2 > 0);
}

TEST_CASE("characterize reproduces the published titania ranges") {
    const DeviceModel& m = builtin_model("titania");
    const DeviceCharacterization c = characterize(m.params, m.default_pulse);
    CHECK(c.v_th_pos == doctest::Approx(0.56));
    CHECK(c.v_th_neg == doctest::Approx(-0.65));
    CHECK(c.G_abs_min == doctest::Approx(1e-3).epsilon(0.10));
    CHECK(c.G_abs_max == doctest::Approx(70e-3).epsilon(0.10));
    CHECK(c.G_lin_min == doctest::Approx(28e-3).epsilon(0.10));
    CHECK(c.G_lin_max == doctest::Approx(48e-3).epsilon(0.10));
}

TEST_CASE("characterize rejects sub-threshold calibration pulses") {
    const DeviceModel& m = builtin_model("silver");
    PulseSpec weak = m.default_pulse;
    weak.amplitude = 0.1; // below both thresholds
    CHECK_THROWS_AS(characterize(m.params, weak), std::invalid_argument);
}

TEST_CASE("variation rows carry the exact published values") {
    const MemristorParams& base = builtin_model("silver").params;
    const MemristorParams dec = apply_variation(base, VariationDirection::decreased, "silver");
    CHECK(dec.a1 == 0.153);
    CHECK(dec.Ap == 2680);
    CHECK(dec.Vp == 0.104848);
    const MemristorParams inc =
        apply_variation(builtin_model("titania").params, VariationDirection::increased, "titania");
    CHECK(inc.a1 == 1.54);
    CHECK(inc.Ap == 32.16);
    CHECK(inc.Vn == 0.60256);
    CHECK_THROWS_AS(apply_variation(base, VariationDirection::increased, "unknown"),
                    std::invalid_argument);
}

TEST_CASE("config overrides replace individual parameters") {
    const MemristorParams& base = builtin_model("silver").params;
    const MemristorParams p = params_from_config(base, {{"a1", "0.2"}, {"Vp", "0.2"}});
    CHECK(p.a1 == 0.2);
    CHECK(p.Vp == 0.2);
    CHECK(p.a2 == base.a2);
    CHECK_THROWS_AS(params_from_config(base, {{"bogus", "1"}}), std::invalid_argument);
}
