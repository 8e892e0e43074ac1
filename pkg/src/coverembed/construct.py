"""
Assembly of the maps on the universal cover.

``Phi = u``           the oracle, periodic, pulls back Q1
``Psi``               product spiral, bounded, pulls back c I
``e(x) = sqrt(c) x``  linear, pulls back c I
``E = (Phi, Psi)``    bounded isometric embedding into R^(N + 2n)
``F = (Phi, e)``      equivariant isometric embedding into R^(N + n)

Periodic components are evaluated directly on R^n, so the fractional-part
covering map never introduces a seam; :func:`covering_phi` exists for
reporting only.
"""
from __future__ import annotations

import numpy as np

from .crystal_group import AmbientIsometry, BieberbachElement
from .errors import ExtensionUnavailable, OracleError
from .metric_field import MetricField, MetricSplit, check_invariance, constant_metric
from .oracle import EmbeddingOracle, invariance_residual
from .spiral import SpiralCurve, product_spiral_map

__all__ = [
    "AmbientMap",
    "covering_phi",
    "build_Phi",
    "build_Psi",
    "build_e",
    "pair",
    "build_E",
    "build_F",
    "extend_action",
]

INVARIANCE_TOL = 1e-10


class AmbientMap:
    """
    Smooth map ``R^n -> R^D`` with an analytic Jacobian.

    ``target`` is the metric the pullback is supposed to equal; ``radius`` is an
    upper bound on ``|map(x)|`` or ``None`` for unbounded maps.
    """

    def __init__(self, n, D, func, jac, tag, target=None, radius=None, parts=(), info=None):
        self.n = int(n)
        self.D = int(D)
        self._func = func
        self._jac = jac
        self.tag = tag
        self.target = target
        self.radius = radius
        self.parts = tuple(parts)
        self.info = dict(info or {})

    def __repr__(self):
        return f"AmbientMap({self.tag!r}, n={self.n}, D={self.D})"

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, self.n)
        return self._func(flat).reshape(X.shape[:-1] + (self.D,))

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, self.n)
        return self._jac(flat).reshape(X.shape[:-1] + (self.D, self.n))

    def pullback(self, X):
        J = self.jacobian(X)
        return np.einsum("...ki,...kj->...ij", J, J)


def covering_phi(n: int) -> AmbientMap:
    """``x -> ({x_1}, ..., {x_n})``; its Jacobian is the identity off the lattice seams."""

    def func(X):
        return X - np.floor(X)

    def jac(X):
        return np.broadcast_to(np.eye(n), (X.shape[0], n, n)).copy()

    return AmbientMap(n, n, func, jac, "phi")


def build_Phi(o: EmbeddingOracle) -> AmbientMap:
    if not o.is_certified:
        raise OracleError(f"oracle {o.name!r} has not been verified against a target metric")
    return AmbientMap(o.n, o.N, o, o.jacobian, "Phi", target=o.certified_for,
                      radius=o.radius, info={"oracle": o.name, "N": o.N})


def build_Psi(split: MetricSplit, curve: SpiralCurve) -> AmbientMap:
    n = split.n
    psi = product_spiral_map(curve, split.c, n)
    return AmbientMap(n, psi.D, psi, psi.jacobian, "Psi",
                      target=constant_metric(split.c * np.eye(n)), radius=psi.radius_bound)


def build_e(split: MetricSplit) -> AmbientMap:
    n = split.n
    s = float(np.sqrt(split.c))

    def func(X):
        return s * X

    def jac(X):
        return np.broadcast_to(s * np.eye(n), (X.shape[0], n, n)).copy()

    return AmbientMap(n, n, func, jac, "e", target=constant_metric(split.c * np.eye(n)))


def pair(first: AmbientMap, second: AmbientMap, tag: str, target: MetricField | None = None,
         radius=None) -> AmbientMap:
    """``x -> (first(x), second(x))``: the diagonal map followed by the product."""
    if first.n != second.n:
        raise ValueError(f"dimension mismatch: {first.n} vs {second.n}")

    def func(X):
        return np.concatenate([first(X), second(X)], axis=-1)

    def jac(X):
        return np.concatenate([first.jacobian(X), second.jacobian(X)], axis=-2)

    return AmbientMap(first.n, first.D + second.D, func, jac, tag, target=target,
                      radius=radius, parts=(first, second))


def _check_oracle(split: MetricSplit, o: EmbeddingOracle):
    if o.n != split.n:
        raise OracleError(f"oracle is on R^{o.n}, metric on R^{split.n}")
    if o.certified_for is not split.q1:
        raise OracleError("oracle has not been verified against this split's Q1")


def build_E(split: MetricSplit, o: EmbeddingOracle, curve: SpiralCurve) -> AmbientMap:
    """Bounded isometric embedding ``x -> (Phi(x), Psi(x))`` into R^(N + 2n)."""
    _check_oracle(split, o)
    Phi, Psi = build_Phi(o), build_Psi(split, curve)
    radius = float(np.sqrt(o.radius**2 + split.n * curve.r_out**2))
    E = pair(Phi, Psi, "E", target=split.base, radius=radius)
    E.info.update(N=o.N, c=split.c, r_out=curve.r_out)
    return E


def build_F(split: MetricSplit, o: EmbeddingOracle) -> AmbientMap:
    """Equivariant isometric embedding ``x -> (Phi(x), sqrt(c) x)`` into R^(N + n)."""
    _check_oracle(split, o)
    F = pair(build_Phi(o), build_e(split), "F", target=split.base)
    F.info.update(N=o.N, c=split.c)
    return F


def extend_action(d: BieberbachElement, split: MetricSplit, o: EmbeddingOracle,
                  sampler=None) -> AmbientIsometry:
    """
    Extension ``d~`` of ``d`` to R^(N + n): identity on the oracle block and
    ``y -> A y + sqrt(c) v`` on the last ``n`` coordinates.

    Lattice translations always extend.  Any other element extends only if
    both Q1 and the oracle are numerically invariant under it; otherwise
    :class:`ExtensionUnavailable` is raised.
    """
    _check_oracle(split, o)
    if d.n != split.n:
        raise ExtensionUnavailable(f"element acts on R^{d.n}, cover is R^{split.n}")
    if not d.is_translation:
        r_metric = check_invariance(split.q1, d, sampler)
        r_oracle = invariance_residual(o, d, sampler)
        if not (r_metric < 1e-9 and r_oracle < INVARIANCE_TOL):
            raise ExtensionUnavailable(
                f"extension unavailable for this element: oracle residual {r_oracle:.3g}, "
                f"Q1 residual {r_metric:.3g}"
            )
    return AmbientIsometry(o.N, d.A, d.v, float(np.sqrt(split.c)))
