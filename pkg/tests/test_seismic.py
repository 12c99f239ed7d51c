"""Two-layer traveltimes, panel synthesis, and noise utilities."""

import numpy as np
import pytest

from w2misfit.errors import EventOutsideWindow
from w2misfit.grids import GridField
from w2misfit.seismic import (AcquisitionGeometry, LayerModel, add_noise,
                              default_geometry, reference_model, ricker,
                              synthesize_panel, traveltimes, wavelet_profile)
from w2misfit.transport1d import Signal1D


class TestLayerModel:
    def test_rejects_nonpositive_parameters(self):
        with pytest.raises(ValueError):
            LayerModel(d1=0.0, d2=0.5, v1=1.0, v2=1.5)
        with pytest.raises(ValueError):
            LayerModel(d1=1.0, d2=0.5, v1=-1.0, v2=1.5)

    def test_dict_round_trip(self):
        m = reference_model()
        assert LayerModel.from_dict(m.to_dict()) == m


class TestTraveltimes:
    def test_zero_offset_values(self):
        m = reference_model()  # d1=1, d2=0.5, v1=1, v2=1.5
        t1, t2 = traveltimes(m, 0.0)
        assert t1 == pytest.approx(2.0)
        # t2 at zero offset: 2 d1/v1 + 2 d2/v2
        assert t2 == pytest.approx(2.0 + 1.0 / 1.5)

    def test_first_event_straight_ray(self):
        m = reference_model()
        off = 1.2
        t1, _ = traveltimes(m, off)
        assert t1 == pytest.approx(2 * np.sqrt(1.0 + (off / 2) ** 2))

    def test_monotone_in_offset(self):
        m = reference_model()
        off = np.linspace(0.0, 2.0, 21)
        t1, t2 = traveltimes(m, off)
        assert np.all(np.diff(t1) > 0) and np.all(np.diff(t2) > 0)

    def test_monotone_in_depths_and_velocity(self):
        base = reference_model()
        t1, t2 = traveltimes(base, 1.0)
        t1_deep, t2_deep = traveltimes(LayerModel(1.2, 0.5, 1.0, 1.5), 1.0)
        assert t1_deep > t1 and t2_deep > t2
        _, t2_d2 = traveltimes(LayerModel(1.0, 0.7, 1.0, 1.5), 1.0)
        assert t2_d2 > t2
        t1_fast, _ = traveltimes(LayerModel(1.0, 0.5, 1.3, 1.5), 1.0)
        assert t1_fast < t1


class TestRicker:
    def test_peak_and_zeros(self):
        assert ricker(0.0, 2.0) == pytest.approx(1.0)
        t0 = 1.0 / (np.pi * 2.0 * np.sqrt(2.0))  # zero crossing
        assert ricker(t0, 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_even_and_decaying(self):
        t = np.linspace(-3, 3, 301)
        v = ricker(t, 1.0)
        assert np.allclose(v, v[::-1], atol=1e-12)
        assert abs(v[0]) < 1e-6


class TestGeometry:
    def test_default_grid_is_square_celled(self):
        geom = default_geometry()
        g = geom.grid()
        assert (g.n1, g.n2) == (64, 128)
        assert g.dx == pytest.approx(2.0 / 63)

    def test_rejects_tiny_sampling(self):
        with pytest.raises(ValueError):
            AcquisitionGeometry(n_offsets=8)


class TestPanel:
    def test_reproducible(self):
        geom = default_geometry()
        a = synthesize_panel(reference_model(), geom)
        b = synthesize_panel(reference_model(), geom)
        assert np.array_equal(a.values, b.values)

    def test_continuity_in_parameters(self):
        geom = default_geometry()
        a = synthesize_panel(reference_model(), geom)
        b = synthesize_panel(LayerModel(1.0, 0.5, 1.0 + 1e-6, 1.5), geom)
        assert np.abs(a.values - b.values).max() <= 1e-4

    def test_events_on_moveout_curves(self):
        geom = default_geometry()
        panel = synthesize_panel(reference_model(), geom)
        t1, _ = traveltimes(reference_model(), geom.offsets())
        times = geom.times()
        # near each offset the strongest positive sample sits on an event
        for i in (0, 20, 40, 63):
            j = int(np.argmin(np.abs(times - t1[i])))
            window = panel.values[i, max(j - 2, 0):j + 3]
            assert window.max() > 0.15

    def test_event_outside_window(self):
        geom = default_geometry()
        with pytest.raises(EventOutsideWindow):
            synthesize_panel(LayerModel(5.0, 0.5, 1.0, 1.5), geom)


class TestWaveletAndNoise:
    def test_wavelet_profile_shape(self):
        f = wavelet_profile()
        assert (f.x_min, f.x_max, f.n) == (-4.0, 4.0, 1601)
        assert f.values[f.n // 2] == pytest.approx(1.0)

    def test_seeded_noise_is_reproducible(self):
        f = wavelet_profile(n=257)
        a = add_noise(f, 0.1, seed=5)
        b = add_noise(f, 0.1, seed=5)
        assert np.array_equal(a.values, b.values)
        c = add_noise(f, 0.1, seed=6)
        assert not np.array_equal(a.values, c.values)

    def test_zero_amplitude_is_identity(self):
        f = wavelet_profile(n=257)
        assert np.array_equal(add_noise(f, 0.0, seed=1).values, f.values)

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError):
            add_noise(wavelet_profile(n=257), -0.1, seed=1)

    def test_noise_mean_is_statistically_zero(self):
        n = 100_000
        f = Signal1D(0.0, 1.0, np.zeros(n))
        a = 0.2
        noisy = add_noise(f, a, seed=42)
        sigma = a / np.sqrt(3.0)
        assert abs(noisy.values.mean()) <= 3 * sigma / np.sqrt(n)

    def test_gridfield_noise(self):
        geom = default_geometry()
        panel = synthesize_panel(reference_model(), geom)
        noisy = add_noise(panel, 0.05, seed=3)
        assert isinstance(noisy, GridField)
        assert np.abs(noisy.values - panel.values).max() <= 0.05

    def test_unsupported_type(self):
        with pytest.raises(TypeError):
            add_noise(np.zeros(5), 0.1, seed=0)
