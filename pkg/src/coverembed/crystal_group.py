"""
Rigid motions ``x -> A x + v`` of R^n compatible with the cubic lattice Z^n.

Group algebra (composition, inverse, conjugation) is exact: the holonomy part
is an integer signed-permutation matrix and translations are stored as
``fractions.Fraction``.  Floating point only enters when an element acts on
points.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import GroupError

__all__ = [
    "BieberbachElement",
    "AmbientIsometry",
    "make_element",
    "identity",
    "translation",
    "compose",
    "inverse",
    "act",
    "induced_action",
    "named_group",
    "translation_generators",
]


def _to_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    # binary floats convert exactly
    return Fraction(float(value))


@dataclass(frozen=True)
class BieberbachElement:
    """Rigid motion with integer orthogonal holonomy ``A`` and translation ``v``."""

    A: tuple  # tuple of row tuples of ints
    v: tuple  # tuple of Fractions

    @property
    def n(self) -> int:
        return len(self.v)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.A, dtype=float)

    @property
    def offset(self) -> np.ndarray:
        return np.array([float(t) for t in self.v])

    @property
    def is_translation(self) -> bool:
        """True for lattice translations: ``A = I`` and ``v`` integral."""
        return self.has_trivial_holonomy and all(t.denominator == 1 for t in self.v)

    @property
    def has_trivial_holonomy(self) -> bool:
        return all(
            self.A[i][j] == (1 if i == j else 0)
            for i in range(self.n)
            for j in range(self.n)
        )

    def __call__(self, x):
        return act(self, x)

    def __matmul__(self, other):
        return compose(self, other)

    def to_dict(self) -> dict:
        return {
            "A": [list(row) for row in self.A],
            "v": [str(t) if t.denominator != 1 else int(t) for t in self.v],
        }


def make_element(A, v) -> BieberbachElement:
    """
    Validate and build an element.

    ``A`` must be a square integer matrix with ``A^T A = I`` (a signed
    permutation); ``v`` may hold ints, Fractions, decimal strings or floats.
    """
    try:
        arr = np.array(A, dtype=object)
    except Exception as exc:
        raise GroupError(f"cannot read holonomy matrix: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise GroupError("not a lattice-compatible isometry: A must be square")
    n = arr.shape[0]
    rows = []
    for row in arr:
        out = []
        for a in row:
            fa = _to_fraction(a)
            if fa.denominator != 1:
                raise GroupError(
                    "not a lattice-compatible isometry: A must have integer entries"
                )
            out.append(int(fa))
        rows.append(tuple(out))
    M = np.array(rows, dtype=np.int64)
    if not np.array_equal(M.T @ M, np.eye(n, dtype=np.int64)):
        raise GroupError("not a lattice-compatible isometry: A is not orthogonal")
    vec = tuple(_to_fraction(t) for t in np.ravel(np.array(v, dtype=object)))
    if len(vec) != n:
        raise GroupError(f"translation has {len(vec)} components, expected {n}")
    return BieberbachElement(tuple(rows), vec)


def identity(n: int) -> BieberbachElement:
    return make_element(np.eye(n, dtype=int), [0] * n)


def translation(k) -> BieberbachElement:
    k = list(k)
    return make_element(np.eye(len(k), dtype=int), k)


def _matvec(A, v):
    return tuple(sum(A[i][j] * v[j] for j in range(len(v))) for i in range(len(A)))


def _check_dims(*elements):
    dims = {d.n for d in elements}
    if len(dims) != 1:
        raise GroupError(f"dimension mismatch: {sorted(dims)}")


def compose(d1: BieberbachElement, d2: BieberbachElement) -> BieberbachElement:
    """``d1 ∘ d2``: first apply ``d2``, then ``d1``."""
    _check_dims(d1, d2)
    n = d1.n
    A = tuple(
        tuple(sum(d1.A[i][k] * d2.A[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )
    Av2 = _matvec(d1.A, d2.v)
    v = tuple(a + b for a, b in zip(Av2, d1.v))
    return BieberbachElement(A, v)


def inverse(d: BieberbachElement) -> BieberbachElement:
    n = d.n
    At = tuple(tuple(d.A[j][i] for j in range(n)) for i in range(n))
    v = tuple(-t for t in _matvec(At, d.v))
    return BieberbachElement(At, v)


def act(d: BieberbachElement, x) -> np.ndarray:
    """Apply ``d`` to one point ``(n,)`` or a batch ``(m, n)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d.n:
        raise GroupError(f"dimension mismatch: point has {x.shape[-1]} coords, element {d.n}")
    return x @ d.matrix.T + d.offset


@dataclass(frozen=True)
class AmbientIsometry:
    """
    Isometry of R^(N+n) fixing the first ``N`` coordinates and acting on the
    last ``n`` by ``y -> A y + scale * v``.

    ``scale`` is kept apart from the rational ``v`` so that composition of
    extensions with a common scale is exact.
    """

    N: int
    A: tuple
    v: tuple
    scale: float

    @property
    def n(self) -> int:
        return len(self.v)

    @property
    def D(self) -> int:
        return self.N + self.n

    @property
    def active(self) -> BieberbachElement:
        return BieberbachElement(self.A, self.v)

    def affine(self):
        """Full ``(D, D)`` linear part and ``(D,)`` offset as float arrays."""
        L = np.eye(self.D)
        L[self.N:, self.N:] = np.array(self.A, dtype=float)
        b = np.zeros(self.D)
        b[self.N:] = self.scale * np.array([float(t) for t in self.v])
        return L, b

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.D:
            raise GroupError(f"dimension mismatch: point has {y.shape[-1]} coords, isometry {self.D}")
        out = np.array(y, copy=True)
        tail = y[..., self.N:]
        out[..., self.N:] = tail @ np.array(self.A, dtype=float).T + self.scale * np.array(
            [float(t) for t in self.v]
        )
        return out

    def __matmul__(self, other: "AmbientIsometry") -> "AmbientIsometry":
        if (self.N, self.n) != (other.N, other.n) or self.scale != other.scale:
            raise GroupError("cannot compose ambient isometries with different shapes or scales")
        d = compose(self.active, other.active)
        return AmbientIsometry(self.N, d.A, d.v, self.scale)


def induced_action(d: BieberbachElement, c: float) -> AmbientIsometry:
    """
    The action on R^n transported through ``e(x) = sqrt(c) x``:
    ``y -> A y + sqrt(c) v``, returned with a passive block of size 0.
    """
    if not c > 0:
        raise GroupError(f"c must be positive, got {c}")
    return AmbientIsometry(0, d.A, d.v, float(np.sqrt(c)))


def translation_generators(n: int) -> list:
    return [translation(np.eye(n, dtype=int)[i]) for i in range(n)]


def named_group(name: str) -> list:
    """
    Generators of a built-in group.

    ``torus-n`` is Z^n; ``pg`` adds the glide ``(x, y) -> (x + 1/2, -y)``;
    ``pgg`` is generated by the two perpendicular glides through ``(1/4, 1/4)``.
    """
    if name.startswith("torus-"):
        try:
            n = int(name.split("-", 1)[1])
        except ValueError:
            raise GroupError(f"unknown group {name!r}") from None
        if n < 1:
            raise GroupError(f"unknown group {name!r}")
        return translation_generators(n)
    half = Fraction(1, 2)
    if name == "pg":
        return translation_generators(2) + [make_element([[1, 0], [0, -1]], [half, 0])]
    if name == "pgg":
        return translation_generators(2) + [
            make_element([[1, 0], [0, -1]], [half, half]),
            make_element([[-1, 0], [0, 1]], [half, half]),
        ]
    raise GroupError(f"unknown group {name!r}")


def group_dimension(generators) -> int:
    _check_dims(*generators)
    return generators[0].n
