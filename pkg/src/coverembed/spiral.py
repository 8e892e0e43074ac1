"""
Unit-speed spiral confined to an annulus, and its product map R^n -> R^(2n).

The curve is ``psi(s) = rho(s) (cos theta(s), sin theta(s))`` with sigmoid
radius ``rho(s) = r_in + (r_out - r_in) / (1 + exp(k s))``.  Unit speed forces
``theta'(s) = sqrt(1 - rho'(s)^2) / rho(s)``, which has no closed form; theta is
integrated with an adaptive RK45 solver and cached as a cubic Hermite table
that grows lazily in windows of 64 units of arc length.
"""
from __future__ import annotations

import threading

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import expit

from .errors import SpiralError

__all__ = ["SpiralCurve", "ProductSpiralMap", "make_spiral", "spiral_point",
           "spiral_tangent", "product_spiral_map"]

WINDOW = 64.0
NODES_PER_UNIT = 64
# RK45 runs tighter than the user tolerance so that the Hermite table's
# derivative agrees with the analytic theta' to ~1e-9.
INNER_TOL_FACTOR = 1e-2


class SpiralCurve:
    """
    Bi-infinite unit-speed curve in the annulus ``r_in <= |y| <= r_out``.

    ``theta(0) = 0``, theta increases strictly and rho decreases strictly, so
    the curve is injective.  Reads are pure; growing the theta table is guarded
    by a lock.
    """

    def __init__(self, r_in=1.0, r_out=2.0, k=1.0, tol=1e-10):
        if not 0 < r_in < r_out:
            raise SpiralError(f"need 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}")
        if not k > 0 or not tol > 0:
            raise SpiralError("steepness k and tolerance must be positive")
        self.r_in = float(r_in)
        self.r_out = float(r_out)
        self.k = float(k)
        self.tol = float(tol)
        self.speed_budget = self.k * (self.r_out - self.r_in) / 4.0
        if self.speed_budget >= 1.0:
            raise SpiralError(
                f"speed budget violated: k (r_out - r_in) / 4 = {self.speed_budget:.6g} >= 1"
            )
        self._lock = threading.Lock()
        # (nodes, theta values, spline), replaced as a whole on growth
        self._table = (np.zeros(1), np.zeros(1), None)
        self._extend(-WINDOW, WINDOW)

    def __repr__(self):
        return f"SpiralCurve(r_in={self.r_in}, r_out={self.r_out}, k={self.k}, tol={self.tol})"

    # profile -----------------------------------------------------------
    def rho(self, s):
        return self.r_in + (self.r_out - self.r_in) * expit(-self.k * np.asarray(s, dtype=float))

    def drho(self, s):
        p = expit(-self.k * np.asarray(s, dtype=float))
        return -(self.r_out - self.r_in) * self.k * p * (1.0 - p)

    def d2rho(self, s):
        p = expit(-self.k * np.asarray(s, dtype=float))
        return (self.r_out - self.r_in) * self.k**2 * p * (1.0 - p) * (1.0 - 2.0 * p)

    def radius_gap(self, s, t):
        """``rho(s) - rho(t)`` without the cancellation of subtracting two radii."""
        ks = self.k * np.asarray(s, dtype=float)
        kt = self.k * np.asarray(t, dtype=float)
        right = expit(-ks) - expit(-kt)  # accurate where the sigmoid tail is small
        left = expit(kt) - expit(ks)  # same quantity, accurate for s, t < 0
        return (self.r_out - self.r_in) * np.where((ks < 0) & (kt < 0), left, right)

    def dtheta(self, s):
        return np.sqrt(1.0 - self.drho(s) ** 2) / self.rho(s)

    # theta table ---------------------------------------------------------
    @property
    def table_range(self):
        nodes = self._table[0]
        return float(nodes[0]), float(nodes[-1])

    def _integrate(self, start, theta0, stop):
        nodes = np.linspace(start, stop, int(round(abs(stop - start) * NODES_PER_UNIT)) + 1)
        sol = solve_ivp(
            lambda s, y: self.dtheta(s),
            (start, stop),
            [theta0],
            method="RK45",
            t_eval=nodes,
            rtol=self.tol * INNER_TOL_FACTOR,
            atol=self.tol * INNER_TOL_FACTOR,
        )
        if not sol.success:  # pragma: no cover - RK45 on a bounded smooth rhs
            raise SpiralError(f"theta integration failed: {sol.message}")
        return nodes, sol.y[0]

    def _extend(self, lo, hi):
        with self._lock:
            s, th, _ = self._table
            grown = False
            while s[0] > lo:
                nodes, vals = self._integrate(s[0], th[0], s[0] - WINDOW)
                s = np.concatenate([nodes[:0:-1], s])
                th = np.concatenate([vals[:0:-1], th])
                grown = True
            while s[-1] < hi:
                nodes, vals = self._integrate(s[-1], th[-1], s[-1] + WINDOW)
                s = np.concatenate([s, nodes[1:]])
                th = np.concatenate([th, vals[1:]])
                grown = True
            if grown:
                self._table = (s, th, CubicHermiteSpline(s, th, self.dtheta(s)))

    def _ensure(self, s):
        s = np.asarray(s, dtype=float)
        if s.size == 0:
            return
        lo, hi = float(np.min(s)), float(np.max(s))
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise SpiralError("arc length must be finite")
        nodes = self._table[0]
        if lo < nodes[0] or hi > nodes[-1]:
            self._extend(lo, hi)

    def theta(self, s):
        self._ensure(s)
        out = self._table[2](np.asarray(s, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    # curve -------------------------------------------------------------
    def point(self, s):
        """``psi(s)``, shape ``(..., 2)``."""
        s = np.asarray(s, dtype=float)
        th = self.theta(s)
        r = self.rho(s)
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)

    def tangent(self, s):
        """Analytic ``psi'(s)``, shape ``(..., 2)``."""
        s = np.asarray(s, dtype=float)
        th = self.theta(s)
        r, dr, dth = self.rho(s), self.drho(s), self.dtheta(s)
        c, si = np.cos(th), np.sin(th)
        return np.stack([dr * c - r * dth * si, dr * si + r * dth * c], axis=-1)

    def samples(self, s):
        """Rows ``(s, x, y)`` for CSV export."""
        s = np.asarray(s, dtype=float)
        return np.column_stack([s, self.point(s)])


def make_spiral(r_in=1.0, r_out=2.0, k=1.0, tol=1e-10) -> SpiralCurve:
    return SpiralCurve(r_in, r_out, k, tol)


def spiral_point(curve: SpiralCurve, s):
    return curve.point(s)


def spiral_tangent(curve: SpiralCurve, s):
    return curve.tangent(s)


class ProductSpiralMap:
    """``x -> (psi(sqrt(c) x_1), ..., psi(sqrt(c) x_n))``, pulling back to ``c I``."""

    def __init__(self, curve: SpiralCurve, c: float, n: int):
        if not c > 0:
            raise SpiralError(f"c must be positive, got {c}")
        if n < 1:
            raise SpiralError(f"n must be >= 1, got {n}")
        self.curve = curve
        self.c = float(c)
        self.scale = float(np.sqrt(c))
        self.n = int(n)
        self.D = 2 * self.n

    @property
    def radius_bound(self) -> float:
        return float(np.sqrt(self.n) * self.curve.r_out)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        pts = self.curve.point(self.scale * X)  # (..., n, 2)
        return pts.reshape(X.shape[:-1] + (self.D,))

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        tan = self.scale * self.curve.tangent(self.scale * X)  # (..., n, 2)
        J = np.zeros(X.shape[:-1] + (self.D, self.n))
        for i in range(self.n):
            J[..., 2 * i : 2 * i + 2, i] = tan[..., i, :]
        return J


def product_spiral_map(curve: SpiralCurve, c: float, n: int) -> ProductSpiralMap:
    return ProductSpiralMap(curve, c, n)
