"""Synthetic two-layer seismograms and 1D wavelet profiles.

The forward model is deliberately simple plumbing: straight-ray / RMS
hyperbolic moveout for the two reflections, a Ricker source wavelet, and a
convolutional trace per offset.  It exists to exercise the misfit machinery,
not to model physics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import EventOutsideWindow
from .grids import Grid2D, GridField
from .transport1d import Signal1D

__all__ = ["LayerModel", "AcquisitionGeometry", "reference_model",
           "default_geometry", "traveltimes", "ricker", "synthesize_panel",
           "wavelet_profile", "add_noise"]


@dataclass(frozen=True)
class LayerModel:
    """Two-layer earth: thicknesses d1, d2 and wave speeds v1, v2."""

    d1: float
    d2: float
    v1: float
    v2: float

    def __post_init__(self):
        for name in ("d1", "d2", "v1", "v2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {"d1": self.d1, "d2": self.d2, "v1": self.v1, "v2": self.v2}

    @classmethod
    def from_dict(cls, d: dict) -> "LayerModel":
        return cls(d1=float(d["d1"]), d2=float(d["d2"]),
                   v1=float(d["v1"]), v2=float(d["v2"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def reference_model() -> LayerModel:
    return LayerModel(d1=1.0, d2=0.5, v1=1.0, v2=1.5)


@dataclass(frozen=True)
class AcquisitionGeometry:
    """Uniform offset/time sampling plus the source wavelet peak frequency.

    The offset and time spacings must agree (the panel lives on a square-cell
    grid); default_geometry() builds a consistent default.
    """

    offset_min: float = 0.0
    offset_max: float = 2.0
    n_offsets: int = 64
    time_min: float = 0.0
    time_max: float = 254.0 / 63.0  # 127 cells of the offset spacing 2/63
    n_times: int = 128
    wavelet_peak_freq: float = 2.0

    def __post_init__(self):
        if self.n_offsets < 16 or self.n_times < 16:
            raise ValueError("need at least 16 offsets and 16 time samples")
        self.grid()  # validates square cells

    def grid(self) -> Grid2D:
        return Grid2D(self.n_offsets, self.n_times,
                      self.offset_min, self.offset_max,
                      self.time_min, self.time_max)

    def offsets(self) -> np.ndarray:
        return self.grid().x1()

    def times(self) -> np.ndarray:
        return self.grid().x2()


def default_geometry(wavelet_peak_freq: float = 2.0) -> AcquisitionGeometry:
    """64 offsets on [0, 2]; 128 times with the same spacing (window ~[0, 4])."""
    dx = 2.0 / 63
    return AcquisitionGeometry(offset_min=0.0, offset_max=2.0, n_offsets=64,
                               time_min=0.0, time_max=127 * dx, n_times=128,
                               wavelet_peak_freq=wavelet_peak_freq)


def traveltimes(model: LayerModel, offset) -> tuple:
    """Two-way reflection times at the given offset (scalar or array).

    First reflector: straight ray.  Second reflector: hyperbolic moveout with
    the RMS velocity of the overburden.
    """
    offset = np.asarray(offset, dtype=float)
    t1 = 2.0 * np.sqrt(model.d1**2 + (offset / 2.0) ** 2) / model.v1
    t01 = 2.0 * model.d1 / model.v1
    t02 = t01 + 2.0 * model.d2 / model.v2
    v_rms_sq = (model.v1**2 * t01 + model.v2**2 * (t02 - t01)) / t02
    t2 = np.sqrt(t02**2 + offset**2 / v_rms_sq)
    if t1.ndim == 0:
        return float(t1), float(t2)
    return t1, t2


def ricker(t, peak_freq: float):
    """Ricker wavelet (1 - 2 pi^2 nu^2 t^2) exp(-pi^2 nu^2 t^2)."""
    a = (math.pi * peak_freq) ** 2
    t = np.asarray(t, dtype=float)
    return (1.0 - 2.0 * a * t**2) * np.exp(-a * t**2)


def synthesize_panel(model: LayerModel, geom: AcquisitionGeometry) -> GridField:
    """Offset-time panel: two Ricker events on their moveout curves.

    Reflection coefficients: R1 from the impedance contrast, R2 = (1 - R1^2)/2
    (fixed transmission-adjusted convention).  Raises EventOutsideWindow when
    an event's near-offset arrival misses the time window entirely.
    """
    grid = geom.grid()
    offsets = geom.offsets()
    times = geom.times()
    t1, t2 = traveltimes(model, offsets)
    t1n, t2n = traveltimes(model, float(offsets.min()))
    for name, tk in (("first", t1n), ("second", t2n)):
        if not (geom.time_min <= tk <= geom.time_max):
            raise EventOutsideWindow(
                f"{name} event at t={tk:.4g} outside window "
                f"[{geom.time_min:g}, {geom.time_max:g}]")
    r1 = (model.v2 - model.v1) / (model.v2 + model.v1)
    r2 = 0.5 * (1.0 - r1**2)
    nu = geom.wavelet_peak_freq
    panel = (r1 * ricker(times[None, :] - t1[:, None], nu)
             + r2 * ricker(times[None, :] - t2[:, None], nu))
    return GridField(grid, panel)


def wavelet_profile(x_min: float = -4.0, x_max: float = 4.0, n: int = 1601,
                    peak_freq: float = 1.0) -> Signal1D:
    """Ricker wavelet sampled on a uniform 1D grid (centred at 0)."""
    x = np.linspace(x_min, x_max, n)
    return Signal1D(x_min, x_max, ricker(x, peak_freq))


def add_noise(signal, amplitude: float, seed: int):
    """Add zero-mean uniform noise on [-amplitude, amplitude], reproducibly.

    Accepts a GridField or a Signal1D and returns the same type.
    """
    rng = np.random.default_rng(seed)
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    if isinstance(signal, GridField):
        return GridField(signal.grid,
                         signal.values + rng.uniform(-amplitude, amplitude,
                                                     signal.values.shape))
    if isinstance(signal, Signal1D):
        return Signal1D(signal.x_min, signal.x_max,
                        signal.values + rng.uniform(-amplitude, amplitude,
                                                    signal.n))
    raise TypeError(f"unsupported signal type {type(signal)!r}")
