"""
Numerical certification: residual checks and the verification report.

Every check yields a :class:`CheckRecord` whose ``passed`` flag is exactly
``residual < tolerance``.  Probes that certify a lower bound (injectivity,
properness, negative controls on unboundedness) report ``floor - observed``
against a tolerance of 0.
"""
from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .crystal_group import AmbientIsometry, BieberbachElement, compose, translation
from .construct import AmbientMap
from .metric_field import MetricField
from .sampling import Sampler, stream_rng

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "jacobian_fd",
    "pullback_residual",
    "jacobian_fd_residual",
    "equivariance_residual",
    "translation_equivariance_residual",
    "boundedness_check",
    "injectivity_probe",
    "properness_probe",
    "homomorphism_residual",
    "spiral_unit_speed_residual",
    "spiral_annulus_residual",
    "spiral_injectivity_residual",
]

PULLBACK_TOL = 1e-8
FD_PULLBACK_TOL = 1e-6
FD_JACOBIAN_TOL = 1e-6
EQUIVARIANCE_TOL = 1e-9
BOUND_SLACK = 1e-9


@dataclass
class CheckRecord:
    name: str
    samples: int
    seed: int
    residual: float
    tolerance: float
    detail: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "samples": self.samples,
            "seed": self.seed,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
        }
        if self.detail:
            out["detail"] = self.detail
        if include_timing:
            out["wall_time"] = round(self.wall_time, 6)
        return out


@dataclass
class VerificationReport:
    records: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def __getitem__(self, name) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def add(self, name, samples, seed, fn, tolerance, detail=None) -> CheckRecord:
        """Run ``fn`` (returning a residual or ``(residual, detail)``) and record it."""
        t0 = time.perf_counter()
        out = fn()
        elapsed = time.perf_counter() - t0
        extra = dict(detail or {})
        if isinstance(out, tuple):
            out, more = out
            extra.update(more)
        rec = CheckRecord(name, int(samples), int(seed), float(out), float(tolerance), extra, elapsed)
        self.records.append(rec)
        return rec

    def to_dict(self, include_timing: bool = False) -> dict:
        return {
            "passed": self.passed,
            "environment": environment(),
            "config": self.config,
            "checks": [r.to_dict(include_timing) for r in self.records],
            "notes": self.notes,
        }

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(_jsonable(self.to_dict(include_timing)), indent=2) + "\n"

    def summary_lines(self) -> list:
        return [
            f"{'PASS' if r.passed else 'FAIL'}  {r.name:<28s} residual={r.residual:.3e}  tol={r.tolerance:.1e}"
            for r in self.records
        ]


def environment() -> dict:
    return {
        "package": "coverembed",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# --------------------------------------------------------------------------
# Jacobians and pullbacks

def jacobian_fd(f, X, n=None, h=None):
    """
    Central-difference Jacobian of ``f`` at each row of ``X``.

    Default step is ``1e-5 * (1 + |x|_inf)`` per point.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[-1] if n is None else n
    if h is None:
        h = 1e-5 * (1.0 + np.max(np.abs(X), axis=-1))
    h = np.broadcast_to(np.asarray(h, dtype=float), X.shape[:1])
    cols = []
    for i in range(n):
        step = np.zeros_like(X)
        step[:, i] = h
        cols.append((f(X + step) - f(X - step)) / (2.0 * h[:, None]))
    return np.stack(cols, axis=-1)


def pullback_residual(m: AmbientMap, target: MetricField, sampler: Sampler, use_fd: bool = False,
                      stream: str = "pullback") -> float:
    """Largest ``|J^T J - target|_F`` over the sampler's points."""
    if m.n != target.n:
        raise ValueError(f"map is on R^{m.n}, metric on R^{target.n}")
    X = sampler.points(m.n, stream)
    J = jacobian_fd(m, X) if use_fd else m.jacobian(X)
    G = np.einsum("mki,mkj->mij", J, J)
    return float(np.max(np.linalg.norm(G - target(X), axis=(1, 2))))


def jacobian_fd_residual(m: AmbientMap, sampler: Sampler, stream: str = "jacobian") -> float:
    """``max |J - J_fd| / (1 + max |J|)`` over the sampler's points."""
    X = sampler.points(m.n, stream)
    J = m.jacobian(X)
    Jfd = jacobian_fd(m, X)
    scale = 1.0 + np.max(np.abs(J), axis=(1, 2))
    return float(np.max(np.max(np.abs(J - Jfd), axis=(1, 2)) / scale))


# --------------------------------------------------------------------------
# Equivariance

def equivariance_residual(F: AmbientMap, d: BieberbachElement, d_tilde: AmbientIsometry,
                          sampler: Sampler, stream: str = "equivariance") -> float:
    """Largest ``|d~(F(x)) - F(d x)|`` over the sampler's points."""
    X = sampler.points(F.n, stream)
    return float(np.max(np.linalg.norm(d_tilde(F(X)) - F(d(X)), axis=-1)))


def translation_equivariance_residual(F: AmbientMap, sampler: Sampler, shifts, extend) -> float:
    """
    Largest ``|d~_k(F(x)) - F(x + k)|`` over sampled ``x`` and each integer
    shift ``k``, with ``d~_k = extend(translation(k))``.
    """
    X = sampler.points(F.n, "equivariance")
    FX = F(X)
    worst = 0.0
    for k in np.asarray(shifts):
        d_tilde = extend(translation([int(t) for t in k]))
        worst = max(worst, float(np.max(np.linalg.norm(d_tilde(FX) - F(X + k), axis=-1))))
    return worst


def homomorphism_residual(pairs, extend) -> float:
    """
    Largest coefficient mismatch between ``(d1 d2)~`` and ``d1~ ∘ d2~``.

    Coefficients are rational, so the residual is exactly zero when the
    identity holds.
    """
    worst = 0.0
    for d1, d2 in pairs:
        lhs = extend(compose(d1, d2))
        rhs = extend(d1) @ extend(d2)
        worst = max(worst, max(abs(a - b) for ra, rb in zip(lhs.A, rhs.A) for a, b in zip(ra, rb)))
        worst = max(worst, max((abs(a - b) for a, b in zip(lhs.v, rhs.v)), default=0))
        worst = max(worst, abs(lhs.scale - rhs.scale))
    return float(worst)


# --------------------------------------------------------------------------
# Boundedness / injectivity / properness

def boundedness_check(E: AmbientMap, window: float, budget: int, seed: int = 0):
    """Return ``(max |E(x)|, analytic bound)`` for ``x`` uniform in ``[-window, window]^n``."""
    sampler = Sampler(seed=seed, low=-window, high=window, count=budget)
    X = sampler.points(E.n, "boundedness")
    max_norm = float(np.max(np.linalg.norm(E(X), axis=-1)))
    return max_norm, (float(E.radius) if E.radius is not None else float("inf"))


def injectivity_probe(m: AmbientMap, sampler: Sampler, domain_floor: float, image_floor: float,
                      pairs: int = 10_000, explicit=None) -> dict:
    """
    Search sampled pairs with ``|x - y| >= domain_floor`` for the smallest image
    distance.  Half the pairs are independent uniform draws, half are local
    perturbations of length in ``[domain_floor, 1]``.  ``explicit`` may supply
    ``(X, Y)`` directly.
    """
    if explicit is not None:
        X, Y = (np.asarray(a, dtype=float) for a in explicit)
    else:
        rng = stream_rng(sampler.seed, "injectivity")
        half = pairs // 2
        X = rng.uniform(sampler.low, sampler.high, size=(pairs, m.n))
        Y = np.empty_like(X)
        Y[:half] = rng.uniform(sampler.low, sampler.high, size=(half, m.n))
        direction = rng.normal(size=(pairs - half, m.n))
        direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
        Y[half:] = X[half:] + rng.uniform(domain_floor, 1.0, size=(pairs - half, 1)) * direction
    dom = np.linalg.norm(X - Y, axis=-1)
    keep = dom >= domain_floor
    X, Y, dom = X[keep], Y[keep], dom[keep]
    img = np.linalg.norm(m(X) - m(Y), axis=-1)
    i = int(np.argmin(img))
    return {
        "pairs": int(len(X)),
        "min_image_distance": float(img[i]),
        "domain_distance": float(dom[i]),
        "x": X[i].tolist(),
        "y": Y[i].tolist(),
        "passed": bool(img[i] >= image_floor),
    }


def properness_probe(m: AmbientMap, shift_radius: int, sampler: Sampler, count: int = 100) -> dict:
    """
    Smallest ``|Psi(x + k) - Psi(x)|`` over sampled ``x`` and every integer
    ``k`` with ``1 <= |k|_inf <= shift_radius``.  For ``E`` the spiral factor
    is probed; any other map is probed as given.
    """
    if shift_radius < 1:
        raise ValueError("shift_radius must be >= 1")
    psi = m.parts[1] if m.tag == "E" else m
    X = sampler.points(psi.n, "properness", count)
    axis = np.arange(-shift_radius, shift_radius + 1)
    shifts = np.stack(np.meshgrid(*([axis] * psi.n), indexing="ij"), -1).reshape(-1, psi.n)
    shifts = shifts[np.any(shifts != 0, axis=-1)]
    base = psi(X)
    best, arg = np.inf, None
    for k in shifts:
        dist = np.linalg.norm(psi(X + k) - base, axis=-1)
        j = int(np.argmin(dist))
        if dist[j] < best:
            best, arg = float(dist[j]), (X[j].tolist(), k.tolist())
    return {"min_separation": best, "x": arg[0], "k": arg[1], "shifts": int(len(shifts)),
            "samples": int(len(X))}


# --------------------------------------------------------------------------
# Spiral contract

def spiral_unit_speed_residual(curve, lo=-100.0, hi=100.0, count=10_000) -> float:
    s = np.linspace(lo, hi, count)
    return float(np.max(np.abs(np.linalg.norm(curve.tangent(s), axis=-1) - 1.0)))


def spiral_annulus_residual(curve, lo=-100.0, hi=100.0, count=10_000) -> float:
    """How far any sample leaves ``[r_in, r_out]`` (0 when confined)."""
    s = np.linspace(lo, hi, count)
    r = np.linalg.norm(curve.point(s), axis=-1)
    return float(max(0.0, np.max(curve.r_in - r), np.max(r - curve.r_out)))


def spiral_injectivity_residual(curve, lo=-100.0, hi=100.0, count=2000, angle_gap=0.1):
    """
    Quantified injectivity on all sample pairs ``s < s'``.

    Pairs whose angle difference is at least ``angle_gap`` away from a multiple
    of 2 pi must be more than ``0.09 r_in`` apart; the others must satisfy
    ``rho(s) - rho(s') > 0``.  Returns ``(violation, detail)`` where the
    violation is the larger of ``0.09 r_in - distance`` and ``-(rho(s) - rho(s'))``
    over the respective pairs: negative means both conditions hold.
    """
    s = np.linspace(lo, hi, count)
    th = curve.theta(s)
    P = curve.point(s)
    i, j = np.triu_indices(count, k=1)
    dtheta = th[j] - th[i]
    wrap = np.abs(dtheta - 2.0 * np.pi * np.round(dtheta / (2.0 * np.pi)))
    far = wrap >= angle_gap
    dist = np.linalg.norm(P[j] - P[i], axis=-1)
    drop = curve.radius_gap(s[i], s[j])
    floor = 0.09 * curve.r_in
    parts = []
    detail = {"far_pairs": int(far.sum()), "near_pairs": int((~far).sum())}
    if far.any():
        detail["min_far_distance"] = float(dist[far].min())
        parts.append(floor - detail["min_far_distance"])
    if (~far).any():
        detail["min_near_radius_drop"] = float(drop[~far].min())
        parts.append(-detail["min_near_radius_drop"])
    return max(parts), detail
