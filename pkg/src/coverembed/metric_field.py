"""
Lattice-periodic Riemannian metrics on R^n and their split ``g = Q1 + c I``.

A :class:`MetricField` is a vectorised function returning symmetric ``n x n``
matrices.  Only the upper triangle is ever computed; the lower triangle is a
copy, so symmetry is exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exprlang
from .crystal_group import BieberbachElement, translation_generators
from .errors import ExprEvaluationError, MetricError
from .sampling import Sampler

__all__ = [
    "MetricField",
    "MetricSplit",
    "constant_metric",
    "identity_metric",
    "conformal_metric",
    "revolution_metric",
    "expression_metric",
    "eval_metric",
    "smallest_eigenvalues",
    "min_eigenvalue_over_domain",
    "default_resolution",
    "split_metric",
    "check_invariance",
]

CHUNK = 1 << 17


class MetricField:
    """
    Point-dependent SPD matrix field on R^n.

    Parameters
    ----------
    n : int
        Dimension.
    upper : callable
        Maps an ``(m, n)`` array of points to a list of ``n(n+1)/2`` arrays of
        shape ``(m,)``: the upper-triangle entries in row-major order.
    family : str
        ``constant``, ``conformal``, ``revolution``, ``expression`` or
        ``difference``.
    params : dict
        Family parameters, kept for reporting and for oracles that need the
        closed form.
    group : sequence of BieberbachElement
        Generators of the symmetry group the field is declared invariant under.
    """

    def __init__(self, n, upper, family, params=None, group=None):
        self.n = int(n)
        self._upper = upper
        self.family = family
        self.params = dict(params or {})
        self.group = tuple(group) if group is not None else tuple(translation_generators(self.n))

    def __repr__(self):
        return f"MetricField(n={self.n}, family={self.family!r}, params={self.params!r})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[-1] != self.n:
            raise MetricError(f"point has {X.shape[-1]} coordinates, metric is {self.n}-dimensional")
        entries = self._upper(X)
        out = np.empty((X.shape[0], self.n, self.n))
        k = 0
        for i in range(self.n):
            for j in range(i, self.n):
                out[:, i, j] = entries[k]
                out[:, j, i] = entries[k]
                k += 1
        return out[0] if single else out

    @property
    def is_constant(self) -> bool:
        return self.family == "constant" or (
            self.family == "difference" and self.params["base"].is_constant
        )

    def shifted(self, c: float) -> "MetricField":
        """The field ``self - c I``, evaluated lazily."""
        n = self.n
        diag = {i * n - i * (i - 1) // 2 for i in range(n)}  # upper-triangle index of (i, i)

        def upper(X):
            ent = self._upper(X)
            return [e - c if k in diag else e for k, e in enumerate(ent)]

        return MetricField(n, upper, "difference", {"base": self, "c": c}, self.group)

    def with_group(self, group) -> "MetricField":
        return MetricField(self.n, self._upper, self.family, self.params, group)


def _const_entries(G):
    n = G.shape[0]
    return [float(G[i, j]) for i in range(n) for j in range(i, n)]


def constant_metric(G, group=None) -> MetricField:
    G = np.array(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise MetricError("constant metric must be a square matrix")
    if not np.allclose(G, G.T, rtol=0, atol=0):
        raise MetricError("constant metric must be symmetric")
    vals = _const_entries(G)

    def upper(X):
        return [np.full(X.shape[0], v) for v in vals]

    return MetricField(G.shape[0], upper, "constant", {"matrix": G.tolist()}, group)


def identity_metric(n: int, group=None) -> MetricField:
    return constant_metric(np.eye(n), group)


def conformal_metric(f="0.3*sin(2*pi*x1)", n: int = 2, group=None) -> MetricField:
    """``exp(2 f(x)) I`` for a scalar expression ``f``."""
    expr = exprlang.parse(f, n) if isinstance(f, str) else f

    def upper(X):
        factor = np.exp(2.0 * np.broadcast_to(exprlang.evaluate(expr, X), X.shape[:1]))
        zero = np.zeros(X.shape[0])
        out = []
        for i in range(n):
            for j in range(i, n):
                out.append(factor if i == j else zero)
        return out

    return MetricField(n, upper, "conformal", {"f": exprlang.to_text(expr), "f_expr": expr}, group)


def revolution_metric(R: float = 2.0, rho: float = 1.0, group=None) -> MetricField:
    """Induced metric of the torus of revolution with radii ``R > rho > 0``."""
    if not R > rho > 0:
        raise MetricError(f"revolution metric needs R > rho > 0, got R={R}, rho={rho}")
    two_pi = 2.0 * np.pi

    def upper(X):
        g11 = np.full(X.shape[0], (two_pi * rho) ** 2)
        g22 = (two_pi * (R + rho * np.cos(two_pi * X[:, 0]))) ** 2
        return [g11, np.zeros(X.shape[0]), g22]

    return MetricField(2, upper, "revolution", {"R": R, "rho": rho}, group)


def expression_metric(entries, n: int, group=None) -> MetricField:
    """Metric whose upper-triangle entries (row-major) are exprlang texts."""
    exprs = [exprlang.parse(t, n) if isinstance(t, str) else t for t in entries]
    if len(exprs) != n * (n + 1) // 2:
        raise MetricError(f"need {n * (n + 1) // 2} upper-triangle entries for n={n}, got {len(exprs)}")

    def upper(X):
        return [np.broadcast_to(exprlang.evaluate(e, X), X.shape[:1]) for e in exprs]

    return MetricField(
        n, upper, "expression", {"entries": [exprlang.to_text(e) for e in exprs]}, group
    )


def eval_metric(field: MetricField, x) -> np.ndarray:
    return field(x)


def smallest_eigenvalues(mats: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each symmetric matrix in an ``(m, n, n)`` stack."""
    n = mats.shape[-1]
    if n == 1:
        return mats[:, 0, 0].copy()
    if n == 2:
        a, b, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 1]
        return 0.5 * (a + d) - np.hypot(0.5 * (a - d), b)
    return np.linalg.eigvalsh(mats)[:, 0]


def default_resolution(n: int) -> int:
    return {1: 256, 2: 256, 3: 64}.get(n, 16)


def min_eigenvalue_over_domain(field: MetricField, resolution: int | None = None) -> float:
    """
    Minimum smallest-eigenvalue over the grid ``{i/resolution}^n`` of ``[0,1)^n``.

    A non-positive result is returned as is; callers decide what to do with it.
    """
    resolution = default_resolution(field.n) if resolution is None else int(resolution)
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    n = field.n
    if field.is_constant:
        return float(smallest_eigenvalues(field(np.zeros((1, n))))[0])
    total = resolution**n
    best = np.inf
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total))
        X = np.stack(np.unravel_index(idx, (resolution,) * n), axis=-1) / resolution
        best = min(best, float(smallest_eigenvalues(field(X)).min()))
    return best


def check_invariance(field: MetricField, element: BieberbachElement, sampler=None) -> float:
    """Largest ``|A^T g(Ax+v) A - g(x)|_F`` over the sampler's points."""
    if element.n != field.n:
        raise MetricError(f"element acts on R^{element.n}, metric is on R^{field.n}")
    sampler = Sampler(seed=0, low=-2.0, high=2.0, count=1000) if sampler is None else sampler
    X = sampler.points(field.n, "invariance")
    A = element.matrix
    pulled = np.einsum("ki,mkl,lj->mij", A, field(X @ A.T + element.offset), A)
    return float(np.max(np.linalg.norm(pulled - field(X), axis=(1, 2))))


@dataclass(frozen=True)
class MetricSplit:
    """``g = q1 + c I`` with a certified eigenvalue margin for ``q1``."""

    c: float
    q1: MetricField
    margin: float
    resolution: int
    base: MetricField
    min_eigenvalue: float

    @property
    def n(self) -> int:
        return self.base.n


def split_metric(
    field: MetricField,
    fraction: float = 0.5,
    resolution: int | None = None,
    sampler=None,
    invariance_tol: float = 1e-9,
) -> MetricSplit:
    """
    Split off ``c I`` with ``c = fraction * min eigenvalue`` over the grid.

    Raises :class:`MetricError` if the field is not invariant under its
    declared generators or not positive definite on the grid.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    resolution = default_resolution(field.n) if resolution is None else int(resolution)
    for d in field.group:
        try:
            r = check_invariance(field, d, sampler)
        except ExprEvaluationError as exc:
            raise MetricError(f"metric evaluation failed during invariance check: {exc}") from exc
        if not r < invariance_tol:
            raise MetricError(
                f"metric not invariant under declared group (residual {r:.3g} for {d.to_dict()})"
            )
    lam = min_eigenvalue_over_domain(field, resolution)
    if not lam > 0:
        raise MetricError(f"metric not positive definite (grid minimum eigenvalue {lam:.6g})")
    c = fraction * lam
    return MetricSplit(
        c=c,
        q1=field.shifted(c),
        margin=(1.0 - fraction) * lam,
        resolution=resolution,
        base=field,
        min_eigenvalue=lam,
    )
