"""Misfit evaluation, parameter scans, and the simplex minimizer."""

import numpy as np
import pytest

from w2misfit.errors import W2MisfitError
from w2misfit.inversion import (MisfitSurface, misfit, nelder_mead,
                                scan_surface, write_surface_csv)
from w2misfit.seismic import default_geometry, reference_model, synthesize_panel


@pytest.fixture(scope="module")
def reference_panel():
    geom = default_geometry()
    return synthesize_panel(reference_model(), geom), geom


class TestNelderMead:
    def test_quadratic_bowl(self):
        res = nelder_mead(lambda x: float(np.sum((x - [2.0, -1.0]) ** 2)),
                          [0.0, 0.0], xtol=1e-6, ftol=1e-12)
        assert res.converged
        assert np.allclose(res.x_min, [2.0, -1.0], atol=1e-4)

    def test_rosenbrock(self):
        def rosen(x):
            return float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)

        res = nelder_mead(rosen, [-1.2, 1.0], xtol=1e-6, ftol=1e-12,
                          max_evals=2000, step_rel=0.1)
        assert res.converged
        assert np.allclose(res.x_min, [1.0, 1.0], atol=1e-2)

    def test_budget_exhaustion_flags_unconverged(self):
        res = nelder_mead(lambda x: float(np.sum(x**2)), [5.0, 5.0],
                          xtol=1e-12, ftol=0.0, max_evals=10)
        assert not res.converged
        assert res.evals == 10

    def test_rejects_non_finite_objective(self):
        with pytest.raises(ValueError):
            nelder_mead(lambda x: float("nan"), [1.0])

    def test_result_serialization(self):
        res = nelder_mead(lambda x: float(np.sum(x**2)), [1.0, 1.0])
        d = res.to_dict()
        assert set(d) == {"x_min", "value", "evals", "converged"}


class TestMisfit:
    def test_truth_model_is_near_zero(self, reference_panel):
        panel, geom = reference_panel
        w2, l2 = misfit(reference_model(), panel, geom)
        assert l2 == 0.0
        # identical panels: only the solver's discretization floor remains
        assert w2 <= 1e-3

    def test_perturbed_model_is_positive(self, reference_panel):
        panel, geom = reference_panel
        from w2misfit.seismic import LayerModel
        w2, l2 = misfit(LayerModel(1.1, 0.5, 1.0, 1.5), panel, geom)
        assert w2 > 1e-3 and l2 > 1e-3

    def test_failure_names_the_trial_model(self, reference_panel):
        panel, geom = reference_panel
        from w2misfit.seismic import LayerModel
        with pytest.raises(W2MisfitError, match="trial model"):
            misfit(LayerModel(10.0, 0.5, 1.0, 1.5), panel, geom)


class TestScanSurface:
    def test_shape_and_nan_handling(self, reference_panel):
        panel, geom = reference_panel
        surface = scan_surface("d1", "v1", [1.0, 10.0], [1.0],
                               dict(d2=0.5, v2=1.5), panel, geom)
        assert surface.w2_values.shape == (2, 1)
        assert surface.w2_values[0, 0] == pytest.approx(0.0, abs=1e-3)
        assert np.isnan(surface.w2_values[1, 0])  # event leaves the window
        assert np.isnan(surface.l2_values[1, 0])

    def test_unknown_parameter(self, reference_panel):
        panel, geom = reference_panel
        with pytest.raises(ValueError, match="unknown parameter"):
            scan_surface("d1", "rho", [1.0], [1.0], {}, panel, geom)

    def test_csv_output(self, tmp_path):
        surface = MisfitSurface("d1", "v1", np.array([1.0, 2.0]),
                                np.array([3.0]), np.array([[0.5], [0.6]]),
                                np.array([[0.1], [0.2]]))
        path = tmp_path / "s.csv"
        write_surface_csv(surface, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "p1,p2,l2_sq,w2_sq"
        assert len(lines) == 3
        assert lines[1].split(",")[3] == "0.10000000000000001"
