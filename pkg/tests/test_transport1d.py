"""1D quantile transport, the L2 baseline, and the shift-sweep driver."""

import numpy as np
import pytest

from w2misfit.errors import (GridMismatch, MassMismatchUnresolvable, ZeroMass)
from w2misfit.transport1d import (Signal1D, l2_1d, read_signal_csv,
                                  shift_signal, signed_w2_1d, sweep_curves,
                                  w2_1d, write_signal_csv)


def hat(x_min=-4.0, x_max=4.0, n=2001) -> Signal1D:
    x = np.linspace(x_min, x_max, n)
    return Signal1D(x_min, x_max, np.maximum(1.0 - np.abs(x), 0.0))


def gaussian(mu, sigma=0.5, n=2001) -> Signal1D:
    x = np.linspace(-6.0, 6.0, n)
    return Signal1D(-6.0, 6.0, np.exp(-0.5 * ((x - mu) / sigma) ** 2))


class TestW2:
    def test_identical_signals(self):
        f = hat()
        assert w2_1d(f, f) == pytest.approx(0.0, abs=1e-12)

    def test_translation_squared_law(self):
        f = hat()
        for s in (0.25, 1.0, 2.0):
            g = shift_signal(f, s)
            assert w2_1d(f, g) == pytest.approx(s**2, abs=1e-3)

    def test_gaussian_translation(self):
        assert w2_1d(gaussian(-1.0), gaussian(0.5)) == pytest.approx(
            1.5**2, rel=1e-3)

    def test_symmetry(self):
        f, g = gaussian(0.0, 0.4), gaussian(0.7, 0.6)
        assert w2_1d(f, g) == pytest.approx(w2_1d(g, f), rel=1e-6)

    def test_amplitude_invariance(self):
        f, g = hat(), gaussian(0.3)
        scaled = Signal1D(f.x_min, f.x_max, 7.5 * f.values)
        assert w2_1d(scaled, g) == pytest.approx(w2_1d(f, g), rel=1e-12)

    def test_uniform_dilation(self):
        # uniform on [0,1] vs uniform on [0,2]: map x -> 2x,
        # cost = int (x - 2x)^2 dx = 1/3
        n = 4001
        x = np.linspace(-1.0, 3.0, n)
        u1 = Signal1D(-1.0, 3.0, ((x >= 0) & (x <= 1)).astype(float))
        u2 = Signal1D(-1.0, 3.0, ((x >= 0) & (x <= 2)).astype(float))
        assert w2_1d(u1, u2) == pytest.approx(1.0 / 3.0, abs=2e-3)

    def test_rejects_negative_and_zero(self):
        f = hat()
        neg = Signal1D(f.x_min, f.x_max, f.values - 1.0)
        with pytest.raises(ValueError):
            w2_1d(neg, f)
        zero = Signal1D(f.x_min, f.x_max, np.zeros(f.n))
        with pytest.raises(ZeroMass):
            w2_1d(zero, f)


class TestL2:
    def test_simple_value(self):
        x = np.linspace(0.0, 1.0, 101)
        f = Signal1D(0.0, 1.0, np.ones(101))
        g = Signal1D(0.0, 1.0, np.zeros(101))
        assert l2_1d(f, g) == pytest.approx(1.01, abs=1e-12)  # sum * dx

    def test_grid_mismatch(self):
        f = hat(n=101)
        g = hat(-3.0, 3.0, 101)
        with pytest.raises(GridMismatch):
            l2_1d(f, g)


class TestSignedW2:
    def test_matches_manual_split(self):
        x = np.linspace(-4.0, 4.0, 2001)
        f = Signal1D(-4.0, 4.0, np.sin(x) * np.exp(-x**2))
        g = Signal1D(-4.0, 4.0, np.roll(f.values, 40))
        manual = (w2_1d(Signal1D(-4, 4, np.maximum(f.values, 0)),
                        Signal1D(-4, 4, np.maximum(g.values, 0)))
                  + w2_1d(Signal1D(-4, 4, np.maximum(-f.values, 0)),
                          Signal1D(-4, 4, np.maximum(-g.values, 0))))
        assert signed_w2_1d(f, g) == pytest.approx(manual, rel=1e-12)

    def test_positive_signals_reduce_to_w2(self):
        f, g = gaussian(0.0), gaussian(1.0)
        assert signed_w2_1d(f, g) == pytest.approx(w2_1d(f, g), rel=1e-12)

    def test_one_sided_part_raises(self):
        x = np.linspace(-1.0, 1.0, 201)
        f = Signal1D(-1.0, 1.0, np.maximum(1 - np.abs(x), 0))
        g = Signal1D(-1.0, 1.0, x)  # has a negative part, f does not
        with pytest.raises(MassMismatchUnresolvable):
            signed_w2_1d(f, g)


class TestShiftSignal:
    def test_exact_on_grid_multiples(self):
        f = hat(n=801)
        s = 10 * f.dx
        g = shift_signal(f, s)
        assert np.allclose(g.values[10:], f.values[:-10], atol=1e-12)

    def test_zero_fill(self):
        f = hat(n=801)
        g = shift_signal(f, 2.0)
        assert g.values[0] == 0.0


class TestSweepCurves:
    def test_zero_shift_row(self):
        f = hat(n=401)
        l2_vals, w2_vals = sweep_curves(f, np.array([0.0]))
        assert l2_vals[0] == 0.0
        assert w2_vals[0] == pytest.approx(0.0, abs=1e-12)

    def test_clean_curve_is_square_law(self):
        f = hat(n=1601)
        shifts = np.array([-1.0, 0.5, 2.0])
        _, w2_vals = sweep_curves(f, shifts)
        assert np.allclose(w2_vals, shifts**2, atol=1e-3)

    def test_noise_is_reproducible(self):
        f = hat(n=401)
        shifts = np.linspace(-1, 1, 5)
        a = sweep_curves(f, shifts, noise="both", seed=42)
        b = sweep_curves(f, shifts, noise="both", seed=42)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_unknown_noise_mode(self):
        with pytest.raises(ValueError):
            sweep_curves(hat(n=401), np.array([0.0]), noise="gauss")


class TestSignalCsv:
    def test_round_trip(self, tmp_path):
        f = gaussian(0.3, n=257)
        p = tmp_path / "s.csv"
        write_signal_csv(f, p)
        back = read_signal_csv(p)
        assert back.x_min == f.x_min and back.x_max == f.x_max
        assert np.array_equal(back.values, f.values)

    def test_rejects_nonuniform_grid(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("x,value\n0,1\n0.5,1\n2,1\n")
        with pytest.raises(ValueError, match="uniform"):
            read_signal_csv(p)
