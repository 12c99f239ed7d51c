"""Quadratic Wasserstein misfit for gridded seismic signals.

The 2D distance is computed by solving the Monge-Ampere equation with a
compact monotone finite-difference scheme and Newton's method; the 1D
distance uses exact quantile matching.  Preprocessing (sign splitting, mass
normalization, convex padding, smoothing), a synthetic two-layer seismogram
model, and inversion/registration experiments round out the package.
"""

from .errors import (EventOutsideWindow, GridMismatch, MassMismatchUnresolvable,
                     NoConvergence, SingularSystem, SupportTooLarge,
                     W2MisfitError, ZeroMass)
from .grids import (Grid2D, GridField, field_from_function, read_field_csv,
                    write_field_csv)
from .inversion import misfit, nelder_mead, scan_surface
from .ma_solver import Potential, SolverConfig, SolverReport, solve_monge_ampere
from .preprocess import (DensityPair, PreprocessParams, convexify, embed,
                         lipschitz_bound, mass, normalize_mass,
                         prepare_signed_pair, smooth, split_signs)
from .seismic import (AcquisitionGeometry, LayerModel, add_noise,
                      default_geometry, reference_model, ricker,
                      synthesize_panel, traveltimes, wavelet_profile)
from .transport1d import (Signal1D, l2_1d, shift_signal, signed_w2_1d,
                          sweep_curves, w2_1d)
from .transport2d import (TransportResult, displacement_field,
                          registered_amplitude, w2_from_potential)

__version__ = "0.1.0"
