"""Monotone finite-difference solver for the optimal-transport Monge-Ampere problem.

The discrete system couples, at every node of the source rectangle,

* interior:  -min{MA1[u], MA2[u]} = 0, where each MA operator is
  max{Daa, delta} * max{Dbb, delta} + min{Daa, delta} + min{Dbb, delta}
  - f/g(gradient) - c  over the axis-aligned (MA1) or diagonal (MA2) basis,
* boundary:  one-sided Neumann conditions mapping each side of the source
  rectangle onto the matching side of the target rectangle,
* one pinning equation u(fixed_node) = 0.

The scalar c is the additive normalization level of the equation.  It is an
extra unknown alongside the field values; the pinning equation closes the
system and c absorbs the discrete compatibility constant that a pure Neumann
problem cannot determine.  Newton's method with a direct sparse linear solve
handles the resulting piecewise-smooth system; branch choices (min/max,
scheme selection, filter slope) are frozen within each iteration.

An optional filtered scheme blends the monotone operator with a centred
second-order discretization for higher accuracy on smooth problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence, SingularSystem
from .grids import (GridField, d_x1, d_x1x1, d_x2, d_x2x2, d_v, d_vp, d_vv,
                    d_vpvp, interior_d_x1, interior_d_x1x1, interior_d_x1x2,
                    interior_d_x2, interior_d_x2x2, interior_d_v,
                    interior_d_vp, interior_d_vv, interior_d_vpvp)
from .preprocess import DensityPair, lipschitz_bound

SQRT2 = math.sqrt(2.0)

__all__ = ["SolverConfig", "SolverReport", "Potential", "solve_monge_ampere",
           "assemble_system", "ma1_residual", "ma2_residual",
           "compact_residual", "neumann_residual", "filtered_residual",
           "filter_s"]


@dataclass
class SolverConfig:
    delta: float
    epsilon_filter: float
    newton_tol: float = 1e-8
    max_newton_iters: int = 50
    use_filtered: bool = False
    fixed_node: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")

    @classmethod
    def for_pair(cls, pair: DensityPair, **overrides) -> "SolverConfig":
        """Defaults: delta just above the monotonicity bound K*dx/2, filter
        scale sqrt(dx)."""
        dx = pair.f.grid.dx
        kw = dict(delta=max(1.01 * lipschitz_bound(pair) * dx / 2.0, 1e-3),
                  epsilon_filter=math.sqrt(dx))
        kw.update(overrides)
        return cls(**kw)


@dataclass
class SolverReport:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    scheme: str = "monotone"
    boundary_violations: int = 0

    def to_dict(self) -> dict:
        return {"iterations": self.iterations,
                "residual_history": list(self.residual_history),
                "converged": self.converged,
                "scheme": self.scheme,
                "boundary_violations": self.boundary_violations}


@dataclass
class Potential:
    """Discrete convex potential, pinned to zero at u0_node.

    constant is the normalization level subtracted inside every interior
    residual; the solver stores the converged compatibility constant here,
    and it is 0 for hand-built potentials pinned at u0_node.
    """

    u: GridField
    u0_node: tuple[int, int] = (0, 0)
    constant: float = 0.0


class _TargetDensity:
    """Bilinear interpolation of g over Y, clamped to the rectangle."""

    def __init__(self, pair: DensityPair):
        self.g = pair.g
        self.Y = pair.Y
        self.dx = pair.g.grid.dx
        self.violations = 0

    def value_and_grad(self, p1, p2):
        g, Y, dx = self.g, self.Y, self.dx
        p1 = np.asarray(p1, dtype=float)
        p2 = np.asarray(p2, dtype=float)
        out1 = np.maximum(Y.x1_min - p1, p1 - Y.x1_max)
        out2 = np.maximum(Y.x2_min - p2, p2 - Y.x2_max)
        self.violations += int(np.sum(np.maximum(out1, out2) > 2 * dx))
        c1, c2 = Y.clamp(p1, p2)
        s = (c1 - Y.x1_min) / dx
        t = (c2 - Y.x2_min) / dx
        k = np.clip(s.astype(int), 0, g.grid.n1 - 2)
        l = np.clip(t.astype(int), 0, g.grid.n2 - 2)
        s = s - k
        t = t - l
        v = g.values
        v00 = v[k, l]
        v10 = v[k + 1, l]
        v01 = v[k, l + 1]
        v11 = v[k + 1, l + 1]
        val = (v00 * (1 - s) * (1 - t) + v10 * s * (1 - t)
               + v01 * (1 - s) * t + v11 * s * t)
        # clamped coordinates have zero sensitivity
        in1 = (p1 > Y.x1_min) & (p1 < Y.x1_max)
        in2 = (p2 > Y.x2_min) & (p2 < Y.x2_max)
        d1 = ((v10 - v00) * (1 - t) + (v11 - v01) * t) / dx * in1
        d2 = ((v01 - v00) * (1 - s) + (v11 - v10) * s) / dx * in2
        return val, d1, d2


def filter_s(x):
    """Bounded filter: identity on [-1, 1], zero outside (-2, 2), linear taper."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, x,
                    np.where(x >= 2.0, 0.0,
                             np.where(x <= -2.0, 0.0,
                                      np.where(x > 0, -x + 2.0, -x - 2.0))))


def _filter_slope(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, 1.0, np.where(np.abs(x) < 2.0, -1.0, 0.0))


# --- per-node residuals (diagnostic / test surface) ---------------------------


def _g_at(pair: DensityPair, p1: float, p2: float) -> float:
    dens = _TargetDensity(pair)
    val, _, _ = dens.value_and_grad(np.array([p1]), np.array([p2]))
    return float(val[0])


def ma1_residual(u: Potential, pair: DensityPair, cfg: SolverConfig,
                 i: int, j: int) -> float:
    """Axis-aligned Monge-Ampere operator at interior node (i, j)."""
    d = cfg.delta
    A = d_x1x1(u.u, i, j)
    B = d_x2x2(u.u, i, j)
    p1 = d_x1(u.u, i, j)
    p2 = d_x2(u.u, i, j)
    fij = pair.f.values[i, j]
    return (max(A, d) * max(B, d) + min(A, d) + min(B, d)
            - fij / _g_at(pair, p1, p2) - u.constant)


def ma2_residual(u: Potential, pair: DensityPair, cfg: SolverConfig,
                 i: int, j: int) -> float:
    """Diagonal-basis Monge-Ampere operator at interior node (i, j)."""
    d = cfg.delta
    A = d_vv(u.u, i, j)
    B = d_vpvp(u.u, i, j)
    dv = d_v(u.u, i, j)
    dvp = d_vp(u.u, i, j)
    q1 = (dv + dvp) / SQRT2
    q2 = (dv - dvp) / SQRT2
    fij = pair.f.values[i, j]
    return (max(A, d) * max(B, d) + min(A, d) + min(B, d)
            - fij / _g_at(pair, q1, q2) - u.constant)


def compact_residual(u: Potential, pair: DensityPair, cfg: SolverConfig,
                     i: int, j: int) -> float:
    """Compact monotone scheme: -min{MA1, MA2}; ties resolve to MA1."""
    return -min(ma1_residual(u, pair, cfg, i, j),
                ma2_residual(u, pair, cfg, i, j))


def neumann_residual(u: Potential, pair: DensityPair, i: int, j: int) -> float:
    """One-sided Neumann condition at boundary node (i, j); corners combine
    their two side conditions along the inward diagonal."""
    v = u.u.values
    dx = u.u.grid.dx
    n1, n2 = v.shape
    Y = pair.Y
    on_x1 = i == 0 or i == n1 - 1
    on_x2 = j == 0 or j == n2 - 1
    if on_x1 and on_x2:
        s1 = 1 if i == 0 else -1
        s2 = 1 if j == 0 else -1
        y1c = Y.x1_min if s1 > 0 else Y.x1_max
        y2c = Y.x2_min if s2 > 0 else Y.x2_max
        return float((v[i + s1, j + s2] - v[i, j]) / dx - (s1 * y1c + s2 * y2c))
    if i == 0:
        return float((v[1, j] - v[0, j]) / dx - Y.x1_min)
    if i == n1 - 1:
        return float((v[n1 - 1, j] - v[n1 - 2, j]) / dx - Y.x1_max)
    if j == 0:
        return float((v[i, 1] - v[i, 0]) / dx - Y.x2_min)
    if j == n2 - 1:
        return float((v[i, n2 - 1] - v[i, n2 - 2]) / dx - Y.x2_max)
    raise IndexError(f"({i}, {j}) is not a boundary node")


def filtered_residual(u: Potential, pair: DensityPair, cfg: SolverConfig,
                      i: int, j: int) -> float:
    """Monotone residual blended with the centred second-order scheme."""
    fm = compact_residual(u, pair, cfg, i, j)
    v = u.u.values
    dx = u.u.grid.dx
    h11 = d_x1x1(u.u, i, j)
    h22 = d_x2x2(u.u, i, j)
    h12 = (v[i + 1, j + 1] + v[i - 1, j - 1]
           - v[i + 1, j - 1] - v[i - 1, j + 1]) / (4 * dx**2)
    p1 = d_x1(u.u, i, j)
    p2 = d_x2(u.u, i, j)
    fij = pair.f.values[i, j]
    # the +2 delta matches the monotone scheme's min terms in smooth convex
    # regions, so the blend is consistent to second order
    fa = -(h11 * h22 - h12**2 + 2 * cfg.delta
           - fij / _g_at(pair, p1, p2) - u.constant)
    eps = cfg.epsilon_filter
    return fm + eps * float(filter_s((fa - fm) / eps))


# --- vectorized assembly -------------------------------------------------------


class _Assembler:
    def __init__(self, pair: DensityPair, cfg: SolverConfig):
        self.pair = pair
        self.cfg = cfg
        self.grid = pair.f.grid
        self.dens = _TargetDensity(pair)
        n1, n2 = self.grid.n1, self.grid.n2
        fi, fj = cfg.fixed_node
        if not (0 <= fi < n1 and 0 <= fj < n2):
            raise ValueError(f"fixed_node {cfg.fixed_node} outside grid {n1}x{n2}")
        ii, jj = np.meshgrid(np.arange(1, n1 - 1), np.arange(1, n2 - 1),
                             indexing="ij")
        self.int_ids = (ii * n2 + jj).ravel()
        self.f_int = pair.f.values[1:-1, 1:-1].ravel()

    def _interior_monotone(self, u, c):
        """Residual and per-offset Jacobian coefficients of -min{MA1, MA2}."""
        cfg, dx = self.cfg, self.grid.dx
        d = cfg.delta
        f = self.f_int

        A = interior_d_x1x1(u, dx).ravel()
        B = interior_d_x2x2(u, dx).ravel()
        p1 = interior_d_x1(u, dx).ravel()
        p2 = interior_d_x2(u, dx).ravel()
        g1, gd11, gd12 = self.dens.value_and_grad(p1, p2)
        ma1 = (np.maximum(A, d) * np.maximum(B, d) + np.minimum(A, d)
               + np.minimum(B, d) - f / g1 - c)

        Av = interior_d_vv(u, dx).ravel()
        Bv = interior_d_vpvp(u, dx).ravel()
        dv = interior_d_v(u, dx).ravel()
        dvp = interior_d_vp(u, dx).ravel()
        q1 = (dv + dvp) / SQRT2
        q2 = (dv - dvp) / SQRT2
        g2, gd21, gd22 = self.dens.value_and_grad(q1, q2)
        ma2 = (np.maximum(Av, d) * np.maximum(Bv, d) + np.minimum(Av, d)
               + np.minimum(Bv, d) - f / g2 - c)

        use2 = ma2 < ma1
        res = -np.where(use2, ma2, ma1)

        # d(MA1)/d(second difference): max branch at/above delta, min branch below
        wA = np.where(A >= d, np.maximum(B, d), 1.0)
        wB = np.where(B >= d, np.maximum(A, d), 1.0)
        gp1 = f * gd11 / g1**2
        gp2 = f * gd12 / g1**2
        c1 = {
            (0, 0): -2 * wA / dx**2 - 2 * wB / dx**2,
            (1, 0): wA / dx**2 + gp1 / (2 * dx),
            (-1, 0): wA / dx**2 - gp1 / (2 * dx),
            (0, 1): wB / dx**2 + gp2 / (2 * dx),
            (0, -1): wB / dx**2 - gp2 / (2 * dx),
        }
        wAv = np.where(Av >= d, np.maximum(Bv, d), 1.0)
        wBv = np.where(Bv >= d, np.maximum(Av, d), 1.0)
        hp1 = f * gd21 / g2**2
        hp2 = f * gd22 / g2**2
        c2 = {
            (0, 0): -(wAv + wBv) / dx**2,
            (1, 1): wAv / (2 * dx**2) + (hp1 + hp2) / (4 * dx),
            (-1, -1): wAv / (2 * dx**2) - (hp1 + hp2) / (4 * dx),
            (1, -1): wBv / (2 * dx**2) + (hp1 - hp2) / (4 * dx),
            (-1, 1): wBv / (2 * dx**2) - (hp1 - hp2) / (4 * dx),
        }
        zero = np.zeros_like(res)
        coefs = {}
        for off in set(c1) | set(c2):
            a = c1.get(off, zero)
            b = c2.get(off, zero)
            coefs[off] = -np.where(use2, b, a)
        return res, coefs, p1, p2, g1, gp1, gp2

    def _interior_accurate(self, u, c, p1, p2, g1, gp1, gp2):
        """Centred second-order residual (sign-matched to the monotone one)."""
        dx = self.grid.dx
        f = self.f_int
        H11 = interior_d_x1x1(u, dx).ravel()
        H22 = interior_d_x2x2(u, dx).ravel()
        H12 = interior_d_x1x2(u, dx).ravel()
        # +2 delta mirrors the monotone min terms in smooth convex regions
        res = -(H11 * H22 - H12**2 + 2 * self.cfg.delta - f / g1 - c)
        coefs = {
            (0, 0): 2 * (H11 + H22) / dx**2,
            (1, 0): -H22 / dx**2 - gp1 / (2 * dx),
            (-1, 0): -H22 / dx**2 + gp1 / (2 * dx),
            (0, 1): -H11 / dx**2 - gp2 / (2 * dx),
            (0, -1): -H11 / dx**2 + gp2 / (2 * dx),
            (1, 1): H12 / (2 * dx**2),
            (-1, -1): H12 / (2 * dx**2),
            (1, -1): -H12 / (2 * dx**2),
            (-1, 1): -H12 / (2 * dx**2),
        }
        return res, coefs

    def _boundary_conditions(self, u, order):
        """Rows (node_id, residual, [(node_id_col, coef), ...]) for each side;
        order 1 is the monotone one-sided difference, order 2 the second-order
        one used by the filtered scheme.  Corners average their two sides."""
        n1, n2 = u.shape
        dx = self.grid.dx
        Y = self.pair.Y

        def one_sided(vals_idx, sign, target):
            # vals_idx: tuple of flat index arrays (first, second, third node
            # away from the edge, along the inward direction)
            a0, a1, a2 = vals_idx
            uf = u.ravel()
            if order == 1:
                res = sign * (uf[a1] - uf[a0]) / dx - target
                cols = [(a0, -sign / dx), (a1, sign / dx)]
            else:
                res = sign * (-3 * uf[a0] + 4 * uf[a1] - uf[a2]) / (2 * dx) - target
                cols = [(a0, -1.5 * sign / dx), (a1, 2.0 * sign / dx),
                        (a2, -0.5 * sign / dx)]
            return res, cols

        def ids(i, j):
            return (np.asarray(i) * n2 + np.asarray(j)).ravel()

        j_edge = np.arange(1, n2 - 1)
        i_edge = np.arange(1, n1 - 1)
        sides = {
            "left": (ids(0, j_edge), one_sided(
                (ids(0, j_edge), ids(1, j_edge), ids(2, j_edge)), 1.0, Y.x1_min)),
            "right": (ids(n1 - 1, j_edge), one_sided(
                (ids(n1 - 1, j_edge), ids(n1 - 2, j_edge), ids(n1 - 3, j_edge)),
                -1.0, Y.x1_max)),
            "bottom": (ids(i_edge, 0), one_sided(
                (ids(i_edge, 0), ids(i_edge, 1), ids(i_edge, 2)), 1.0, Y.x2_min)),
            "top": (ids(i_edge, n2 - 1), one_sided(
                (ids(i_edge, n2 - 1), ids(i_edge, n2 - 2), ids(i_edge, n2 - 3)),
                -1.0, Y.x2_max)),
        }
        # on max sides the inward difference carries sign -1 so the residual
        # approximates u_x - y_max

        # Corners combine their two side conditions along the inward diagonal
        # (the naive average decouples the corner value at mixed corners):
        # (u(corner + (s1, s2) dx) - u(corner))/dx = s1*y1_corner + s2*y2_corner.
        uf = u.ravel()
        corners = []
        for ci, cj in ((0, 0), (n1 - 1, 0), (0, n2 - 1), (n1 - 1, n2 - 1)):
            s1 = 1 if ci == 0 else -1
            s2 = 1 if cj == 0 else -1
            y1c = Y.x1_min if s1 > 0 else Y.x1_max
            y2c = Y.x2_min if s2 > 0 else Y.x2_max
            target = s1 * y1c + s2 * y2c
            a0 = ids(ci, cj)
            a1 = ids(ci + s1, cj + s2)
            a2 = ids(ci + 2 * s1, cj + 2 * s2)
            if order == 1:
                r = float((uf[a1[0]] - uf[a0[0]]) / dx - target)
                cols = [(a0, -1.0 / dx), (a1, 1.0 / dx)]
            else:
                r = float((-3 * uf[a0[0]] + 4 * uf[a1[0]] - uf[a2[0]]) / (2 * dx)
                          - target)
                cols = [(a0, -1.5 / dx), (a1, 2.0 / dx), (a2, -0.5 / dx)]
            corners.append((a0, r, cols))
        return sides, corners

    def assemble(self, u: np.ndarray, c: float):
        """Residual vector and sparse Jacobian over unknowns [u.flat, c]."""
        cfg = self.cfg
        n1, n2 = u.shape
        N = n1 * n2
        dx = self.grid.dx
        F = np.zeros(N + 1)
        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        vals: list[np.ndarray] = []

        res_m, coefs_m, p1, p2, g1, gp1, gp2 = self._interior_monotone(u, c)
        if cfg.use_filtered:
            res_a, coefs_a = self._interior_accurate(u, c, p1, p2, g1, gp1, gp2)
            eps = cfg.epsilon_filter
            q = (res_a - res_m) / eps
            res_int = res_m + eps * filter_s(q)
            sl = _filter_slope(q)
            zero = np.zeros_like(res_m)
            coefs = {off: (1 - sl) * coefs_m.get(off, zero) + sl * coefs_a.get(off, zero)
                     for off in set(coefs_m) | set(coefs_a)}
        else:
            res_int = res_m
            coefs = coefs_m

        ids = self.int_ids
        F[ids] = res_int
        for (di, dj), cf in coefs.items():
            rows.append(ids)
            cols.append(ids + di * n2 + dj)
            vals.append(cf)
        # normalization-constant column: d(-MA)/dc = +1 on every interior row
        rows.append(ids)
        cols.append(np.full(ids.shape, N))
        vals.append(np.ones(ids.size))

        bc_order = 2 if cfg.use_filtered else 1
        sides, corners = self._boundary_conditions(u, bc_order)
        if cfg.use_filtered:
            # blend first- and second-order boundary conditions with the filter
            sides1, corners1 = self._boundary_conditions(u, 1)
            eps = cfg.epsilon_filter
            blended_sides = {}
            for name in sides:
                bids, (r2, cl2) = sides[name]
                _, (r1, cl1) = sides1[name]
                q = (r2 - r1) / eps
                r = r1 + eps * filter_s(q)
                sl = _filter_slope(q)
                cl = [(idx, (1 - sl) * w) for idx, w in cl1]
                cl += [(idx, sl * w) for idx, w in cl2]
                blended_sides[name] = (bids, (r, cl))
            sides = blended_sides
            blended_corners = []
            for (c2_, c1_) in zip(corners, corners1):
                bid, r2, cl2 = c2_
                _, r1, cl1 = c1_
                q = (r2 - r1) / eps
                r = r1 + eps * float(filter_s(q))
                sl = float(_filter_slope(q))
                cl = [(idx, (1 - sl) * w) for idx, w in cl1]
                cl += [(idx, sl * w) for idx, w in cl2]
                blended_corners.append((bid, r, cl))
            corners = blended_corners

        for bids, (r, cl) in sides.values():
            F[bids] = r
            for idx, w in cl:
                rows.append(bids)
                cols.append(idx)
                vals.append(np.broadcast_to(np.asarray(w, dtype=float),
                                            bids.shape).copy())
        for bid, r, cl in corners:
            F[bid] = r
            for idx, w in cl:
                rows.append(np.broadcast_to(bid, idx.shape).copy())
                cols.append(idx)
                vals.append(np.broadcast_to(np.asarray(w, dtype=float),
                                            idx.shape).copy())

        fi, fj = cfg.fixed_node
        F[N] = u[fi, fj]
        rows.append(np.array([N]))
        cols.append(np.array([fi * n2 + fj]))
        vals.append(np.array([1.0]))

        J = sp.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(N + 1, N + 1)).tocsc()
        return F, J

    def residual_only(self, u: np.ndarray, c: float) -> np.ndarray:
        n1, n2 = u.shape
        N = n1 * n2
        F = np.zeros(N + 1)
        res_m, _, p1, p2, g1, gp1, gp2 = self._interior_monotone(u, c)
        if self.cfg.use_filtered:
            res_a, _ = self._interior_accurate(u, c, p1, p2, g1, gp1, gp2)
            eps = self.cfg.epsilon_filter
            F[self.int_ids] = res_m + eps * filter_s((res_a - res_m) / eps)
            sides2, corners2 = self._boundary_conditions(u, 2)
            sides1, corners1 = self._boundary_conditions(u, 1)
            for name in sides2:
                bids, (r2, _) = sides2[name]
                _, (r1, _) = sides1[name]
                F[bids] = r1 + eps * filter_s((r2 - r1) / eps)
            for (bid, r2, _), (_, r1, _) in zip(corners2, corners1):
                F[bid] = r1 + eps * float(filter_s((r2 - r1) / eps))
        else:
            F[self.int_ids] = res_m
            sides, corners = self._boundary_conditions(u, 1)
            for bids, (r, _) in sides.values():
                F[bids] = r
            for bid, r, _ in corners:
                F[bid] = r
        fi, fj = self.cfg.fixed_node
        F[N] = u[fi, fj]
        return F


def assemble_system(u: Potential, pair: DensityPair, cfg: SolverConfig):
    """Residual vector and sparse Jacobian at the given potential.

    Unknown ordering: the n1*n2 field values (C order), then the
    normalization constant.
    """
    asm = _Assembler(pair, cfg)
    return asm.assemble(u.u.values, u.constant)


def _initial_guess(pair: DensityPair) -> np.ndarray:
    """Exact potential of the pure translation between the two rectangles."""
    X, Y = pair.X, pair.Y
    cx = np.array([(X.x1_min + X.x1_max) / 2, (X.x2_min + X.x2_max) / 2])
    cy = np.array([(Y.x1_min + Y.x1_max) / 2, (Y.x2_min + Y.x2_max) / 2])
    xx1, xx2 = pair.f.grid.meshgrid()
    u = 0.5 * (xx1**2 + xx2**2)
    u += (cy[0] - cx[0]) * xx1 + (cy[1] - cx[1]) * xx2
    return u


def solve_monge_ampere(pair: DensityPair, cfg: SolverConfig | None = None,
                       ) -> tuple[Potential, SolverReport]:
    """Damped Newton solve of the compact monotone scheme (optionally
    followed by the filtered scheme warm-started from the monotone solution)."""
    cfg = cfg or SolverConfig.for_pair(pair)
    fi, fj = cfg.fixed_node
    n1, n2 = pair.f.grid.n1, pair.f.grid.n2
    if not (0 <= fi < n1 and 0 <= fj < n2):
        raise ValueError(f"fixed_node {cfg.fixed_node} outside grid {n1}x{n2}")
    u = _initial_guess(pair)
    u -= u[fi, fj]
    c = 0.0
    report = SolverReport(scheme="filtered" if cfg.use_filtered else "monotone")

    phases = [False] + ([True] if cfg.use_filtered else [])
    for filtered in phases:
        phase_cfg = SolverConfig(delta=cfg.delta, epsilon_filter=cfg.epsilon_filter,
                                 newton_tol=cfg.newton_tol,
                                 max_newton_iters=cfg.max_newton_iters,
                                 use_filtered=filtered, fixed_node=cfg.fixed_node)
        asm = _Assembler(pair, phase_cfg)
        u, c = _newton_loop(asm, u, c, phase_cfg, report)
        report.boundary_violations += asm.dens.violations
    report.converged = bool(report.residual_history
                            and report.residual_history[-1] <= cfg.newton_tol)
    pot = Potential(GridField(pair.f.grid, u), u0_node=cfg.fixed_node, constant=c)
    return pot, report


def _newton_loop(asm: _Assembler, u: np.ndarray, c: float, cfg: SolverConfig,
                 report: SolverReport):
    n1, n2 = u.shape
    N = n1 * n2
    for _ in range(cfg.max_newton_iters):
        F, J = asm.assemble(u, c)
        res = float(np.abs(F).max())
        report.residual_history.append(res)
        if res <= cfg.newton_tol:
            return u, c
        dz = spla.spsolve(J, -F)
        if not np.all(np.isfinite(dz)):
            raise SingularSystem(
                "singular Newton system (delta too small or degenerate pair)")
        du = dz[:N].reshape(n1, n2)
        dc = float(dz[N])
        step = 1.0
        for _halve in range(21):
            F_try = asm.residual_only(u + step * du, c + step * dc)
            if float(np.abs(F_try).max()) < res:
                break
            step *= 0.5
        else:
            raise NoConvergence(
                f"Newton line search stalled at residual {res:.3e}", report)
        u = u + step * du
        c = c + step * dc
        report.iterations += 1
    F = asm.residual_only(u, c)
    res = float(np.abs(F).max())
    report.residual_history.append(res)
    if res <= cfg.newton_tol:
        return u, c
    raise NoConvergence(
        f"no convergence in {cfg.max_newton_iters} iterations "
        f"(residual {res:.3e})", report)
