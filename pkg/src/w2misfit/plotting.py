"""Figure rendering for the CLI report path.

Every function takes already-computed arrays and writes a PNG next to the
delimited output.  Import is lazy so the computational modules stay free of a
matplotlib dependency.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def save_sweep_figure(shifts, l2_vals, w2_vals, path):
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    axes[0].plot(shifts, l2_vals, "b.-")
    axes[0].set_xlabel("shift s")
    axes[0].set_ylabel(r"$L_2^2$")
    axes[1].plot(shifts, w2_vals, "r.-")
    axes[1].set_xlabel("shift s")
    axes[1].set_ylabel(r"$W_2^2(f^+,g^+)+W_2^2(f^-,g^-)$")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_surface_figure(surface, path):
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    extent = [surface.values2[0], surface.values2[-1],
              surface.values1[0], surface.values1[-1]]
    for ax, vals, title in ((axes[0], surface.l2_values, r"$L_2^2$"),
                            (axes[1], surface.w2_values, r"$W_2^2$")):
        im = ax.imshow(vals, origin="lower", aspect="auto", extent=extent)
        ax.set_xlabel(surface.param2)
        ax.set_ylabel(surface.param1)
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_panel_figure(field, path, title="offset-time panel"):
    plt = _plt()
    g = field.grid
    fig, ax = plt.subplots(figsize=(5, 6))
    im = ax.imshow(field.values.T, origin="lower", aspect="auto",
                   extent=[g.x1_min, g.x1_max, g.x2_min, g.x2_max],
                   cmap="seismic",
                   vmin=-np.abs(field.values).max(),
                   vmax=np.abs(field.values).max())
    ax.set_xlabel("offset")
    ax.set_ylabel("time")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_displacement_figure(pair, result, path, stride: int = 2):
    plt = _plt()
    g = pair.f.grid
    xx1, xx2 = g.meshgrid()
    s = (slice(None, None, stride), slice(None, None, stride))
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.contourf(xx1, xx2, pair.f.values, levels=12, cmap="Greys")
    ax.quiver(xx1[s], xx2[s], result.displacement[..., 0][s],
              result.displacement[..., 1][s], color="tab:red",
              angles="xy", scale_units="xy", scale=1.0, width=0.003)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title("displacement  grad u(x) - x")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
