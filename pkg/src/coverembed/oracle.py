"""
Explicit isometric embeddings ``u`` of the torus ``(T^n, Q1)`` into R^N.

Every oracle is a lattice-periodic map with an analytic Jacobian.  Before a
construction accepts one it must be *certified*: its pullback
``J_u^T J_u`` is compared with the target metric at sample points and the
oracle is rejected if the residual is not below tolerance.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import nnls

from . import exprlang
from .crystal_group import BieberbachElement
from .errors import OracleError
from .metric_field import MetricField
from .sampling import Sampler, unit_grid

__all__ = [
    "EmbeddingOracle",
    "clifford_diagonal_oracle",
    "default_candidates",
    "integer_decomposition",
    "clifford_general_oracle",
    "revolution_oracle",
    "warped_oracle",
    "warped_oracle_for",
    "expression_oracle",
    "pullback",
    "verify_oracle",
    "certify",
    "invariance_residual",
    "periodicity_residual",
]

TWO_PI = 2.0 * np.pi
DECOMPOSITION_TOL = 1e-10
CERTIFY_TOL = 1e-8


def _frac(t):
    return t - np.floor(t)


class EmbeddingOracle:
    """
    Periodic map ``u: R^n -> R^N`` with analytic Jacobian.

    ``radius`` bounds ``|u(x)|`` for every ``x``; ``certified_for`` is the metric
    the oracle has been verified against (``None`` until :func:`certify`).
    """

    def __init__(self, n, N, func, jac, radius, name, params=None,
                 certified_for=None, residual=None):
        self.n = int(n)
        self.N = int(N)
        self._func = func
        self._jac = jac
        self.radius = float(radius)
        self.name = name
        self.params = dict(params or {})
        self.certified_for = certified_for
        self.residual = residual

    def __repr__(self):
        return f"EmbeddingOracle({self.name!r}, n={self.n}, N={self.N}, radius={self.radius:.6g})"

    def _points(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n:
            raise OracleError(f"oracle is defined on R^{self.n}, got points in R^{X.shape[-1]}")
        return X

    def __call__(self, X):
        X = self._points(X)
        flat = X.reshape(-1, self.n)
        return self._func(flat).reshape(X.shape[:-1] + (self.N,))

    def jacobian(self, X):
        X = self._points(X)
        flat = X.reshape(-1, self.n)
        return self._jac(flat).reshape(X.shape[:-1] + (self.N, self.n))

    @property
    def is_certified(self) -> bool:
        return self.certified_for is not None

    def with_certificate(self, metric, residual) -> "EmbeddingOracle":
        return EmbeddingOracle(self.n, self.N, self._func, self._jac, self.radius,
                               self.name, self.params, metric, residual)


def pullback(o: EmbeddingOracle, X) -> np.ndarray:
    J = o.jacobian(X)
    return np.einsum("...ki,...kj->...ij", J, J)


# --------------------------------------------------------------------------
# Clifford-type oracles

def clifford_general_oracle(decomposition) -> EmbeddingOracle:
    """
    Flat torus from ``G = sum_k c_k a_k a_k^T``: one circle of radius
    ``sqrt(c_k) / 2 pi`` per term, traversed with integer frequency ``a_k``.
    """
    terms = [(float(c), tuple(int(t) for t in a)) for c, a in decomposition if c > 0]
    if not terms:
        raise OracleError("decomposition has no positive terms")
    n = len(terms[0][1])
    coef = np.array([c for c, _ in terms])
    freq = np.array([a for _, a in terms], dtype=float)  # (m, n)
    radii = np.sqrt(coef) / TWO_PI
    m = len(terms)

    def func(X):
        phase = TWO_PI * _frac(X @ freq.T)  # (p, m)
        out = np.empty((X.shape[0], 2 * m))
        out[:, 0::2] = radii * np.cos(phase)
        out[:, 1::2] = radii * np.sin(phase)
        return out

    def jac(X):
        phase = TWO_PI * _frac(X @ freq.T)
        scale = radii * TWO_PI  # = sqrt(c_k)
        J = np.empty((X.shape[0], 2 * m, n))
        J[:, 0::2, :] = (-scale * np.sin(phase))[:, :, None] * freq[None]
        J[:, 1::2, :] = (scale * np.cos(phase))[:, :, None] * freq[None]
        return J

    return EmbeddingOracle(
        n, 2 * m, func, jac, np.sqrt(coef.sum()) / TWO_PI, "clifford",
        {"terms": [[c, list(a)] for c, a in terms]},
    )


def clifford_diagonal_oracle(g_diag) -> EmbeddingOracle:
    """Product of circles for the constant metric ``diag(g_diag)``; N = 2n."""
    g = [float(v) for v in np.ravel(g_diag)]
    if not g or min(g) <= 0:
        raise OracleError(f"diagonal entries must be positive, got {g}")
    n = len(g)
    eye = np.eye(n, dtype=int)
    return clifford_general_oracle([(g[j], eye[j]) for j in range(n)])


def default_candidates(n: int) -> list:
    """``{e_i} ∪ {e_i + e_j, e_i - e_j : i < j}``."""
    eye = np.eye(n, dtype=int)
    out = [tuple(int(t) for t in eye[i]) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        out.append(tuple(int(t) for t in eye[i] + eye[j]))
        out.append(tuple(int(t) for t in eye[i] - eye[j]))
    return out


def _enlarged_candidates(n: int, bound: int = 2) -> list:
    out = []
    for a in itertools.product(range(-bound, bound + 1), repeat=n):
        nz = [t for t in a if t != 0]
        if nz and nz[0] > 0:
            out.append(tuple(a))
    return out


def _reconstruct(terms, n):
    G = np.zeros((n, n))
    for c, a in terms:
        a = np.array(a, dtype=float)
        G += c * np.outer(a, a)
    return G


def _dominant_solution(G):
    # one of e_i +/- e_j per off-diagonal entry, diagonal soaks up the rest
    n = G.shape[0]
    eye = np.eye(n, dtype=int)
    terms = []
    diag = np.diag(G).copy()
    for i, j in itertools.combinations(range(n), 2):
        g = G[i, j]
        if g != 0:
            terms.append((float(abs(g)), tuple(int(t) for t in eye[i] + int(np.sign(g)) * eye[j])))
            diag[i] -= abs(g)
            diag[j] -= abs(g)
    if np.any(diag < 0):
        return None
    return [(float(diag[i]), tuple(int(t) for t in eye[i])) for i in range(n)] + terms


def _nnls_solution(G, candidates):
    n = G.shape[0]
    iu = np.triu_indices(n)
    A = np.column_stack([np.outer(a, a)[iu] for a in np.array(candidates, dtype=float)])
    coef, _ = nnls(A, G[iu], maxiter=100 * A.shape[1])
    return [(float(c), tuple(int(t) for t in a)) for c, a in zip(coef, candidates)]


def integer_decomposition(G, candidate_set=None, tol: float = DECOMPOSITION_TOL) -> list:
    """
    Write a constant SPD matrix as ``sum_k c_k a_k a_k^T`` with ``c_k >= 0`` and
    integer ``a_k`` from ``candidate_set``.

    Diagonally dominant ``G`` over the default set is solved exactly; anything
    else goes through nonnegative least squares.  With the default set, a
    failed attempt is retried once over all integer vectors with entries in
    ``[-2, 2]``.  Returns ``[(c_k, a_k), ...]`` with zero terms dropped.
    """
    G = np.array(G, dtype=float)
    n = G.shape[0]
    if G.shape != (n, n) or not np.array_equal(G, G.T):
        raise OracleError("G must be a symmetric square matrix")
    use_default = candidate_set is None
    cands = default_candidates(n) if use_default else [tuple(int(t) for t in a) for a in candidate_set]
    if not cands:
        raise OracleError("not representable over candidate set; enlarge set (candidate set is empty)")
    attempts = [cands] + ([_enlarged_candidates(n)] if use_default else [])
    best = np.inf
    for attempt, cset in enumerate(attempts):
        terms = _dominant_solution(G) if (use_default and attempt == 0) else None
        if terms is None:
            terms = _nnls_solution(G, cset)
        top = max((c for c, _ in terms), default=0.0)
        terms = [(c, a) for c, a in terms if c > 1e-14 * top]
        resid = float(np.linalg.norm(G - _reconstruct(terms, n)))
        if resid < tol:
            return terms
        best = min(best, resid)
    raise OracleError(
        f"not representable over candidate set; enlarge set (residual {best:.3g}, "
        "retry with entries in [-2, 2] exhausted)" if use_default else
        f"not representable over candidate set; enlarge set (residual {best:.3g})"
    )


# --------------------------------------------------------------------------
# Surfaces of revolution and warped tori (n = 2)

def revolution_oracle(R: float = 2.0, rho: float = 1.0) -> EmbeddingOracle:
    """Standard torus of revolution in R^3; pulls back the ``revolution`` family."""
    if not R > rho > 0:
        raise OracleError(f"torus of revolution needs R > rho > 0 (self-intersects otherwise), got R={R}, rho={rho}")

    def func(X):
        a, b = TWO_PI * _frac(X[:, 0]), TWO_PI * _frac(X[:, 1])
        w = R + rho * np.cos(a)
        return np.column_stack([w * np.cos(b), w * np.sin(b), rho * np.sin(a)])

    def jac(X):
        a, b = TWO_PI * _frac(X[:, 0]), TWO_PI * _frac(X[:, 1])
        w = R + rho * np.cos(a)
        J = np.zeros((X.shape[0], 3, 2))
        J[:, 0, 0] = -TWO_PI * rho * np.sin(a) * np.cos(b)
        J[:, 1, 0] = -TWO_PI * rho * np.sin(a) * np.sin(b)
        J[:, 2, 0] = TWO_PI * rho * np.cos(a)
        J[:, 0, 1] = -TWO_PI * w * np.sin(b)
        J[:, 1, 1] = TWO_PI * w * np.cos(b)
        return J

    return EmbeddingOracle(2, 3, func, jac, R + rho, "revolution", {"R": R, "rho": rho})


def warped_oracle(p, h, dh, h_max=None, safety=0.5, grid=4096) -> EmbeddingOracle:
    """
    Isometric immersion of ``p(x1) dx1^2 + h(x1) dx2^2`` into R^4.

    ``p``, ``h`` and ``dh = h'`` are vectorised 1-periodic callables.  The x2
    direction becomes a circle of radius ``r = sqrt(h) / (2 pi m)`` wound ``m``
    times, with ``m`` the smallest integer keeping ``r'^2 <= safety * p``; the
    leftover ``sigma^2 = p - r'^2`` is absorbed by a round circle parametrised
    proportionally to ``S(x1) = int_0^x1 sigma``.  ``S - L x1`` is periodic and
    is evaluated from its Fourier series.
    """
    t = np.arange(grid) / grid
    pv, hv, dhv = p(t), h(t), dh(t)
    if np.any(pv <= 0) or np.any(hv <= 0):
        raise OracleError("warped oracle needs p > 0 and h > 0")
    need = np.max(dhv**2 / (16.0 * np.pi**2 * hv * pv))
    m = max(1, int(np.ceil(np.sqrt(need / safety))))

    def rprime(hh, dd):
        return dd / (4.0 * np.pi * m * np.sqrt(hh))

    sigma = np.sqrt(pv - rprime(hv, dhv) ** 2)
    fc = np.fft.rfft(sigma) / grid
    L = float(fc[0].real)
    ks = np.arange(1, len(fc))
    keep = np.abs(fc[1:]) > 1e-15 * L
    last = int(ks[keep].max()) if np.any(keep) else 0
    if last >= grid // 2 - 1:
        raise OracleError("sigma is not resolved by the Fourier grid; increase grid")
    ks = ks[:last]
    # P(t) = sum_k 2 Re(sigma_k e^{2 pi i k t} / (2 pi i k))
    pcoef = 2.0 * fc[1:last + 1] / (2j * np.pi * ks)
    ring = L / TWO_PI
    if h_max is None:
        h_max = float(hv.max()) * (1.0 + 1e-6)
    radius = float(np.sqrt(h_max / (TWO_PI * m) ** 2 + ring**2))

    def alpha(t1):
        tf = _frac(t1)
        P = np.real(np.exp(2j * np.pi * np.outer(tf, ks)) @ pcoef) if last else 0.0
        return TWO_PI * (tf + P / L)

    def func(X):
        t1 = X[:, 0]
        r = np.sqrt(h(t1)) / (TWO_PI * m)
        beta = TWO_PI * m * _frac(X[:, 1])
        al = alpha(t1)
        return np.column_stack([r * np.cos(beta), r * np.sin(beta),
                                ring * np.cos(al), ring * np.sin(al)])

    def jac(X):
        t1 = X[:, 0]
        hh = h(t1)
        r = np.sqrt(hh) / (TWO_PI * m)
        dr = rprime(hh, dh(t1))
        sig = np.sqrt(p(t1) - dr**2)
        beta = TWO_PI * m * _frac(X[:, 1])
        al = alpha(t1)
        J = np.zeros((X.shape[0], 4, 2))
        J[:, 0, 0] = dr * np.cos(beta)
        J[:, 1, 0] = dr * np.sin(beta)
        J[:, 0, 1] = -TWO_PI * m * r * np.sin(beta)
        J[:, 1, 1] = TWO_PI * m * r * np.cos(beta)
        J[:, 2, 0] = -sig * np.sin(al)
        J[:, 3, 0] = sig * np.cos(al)
        return J

    return EmbeddingOracle(2, 4, func, jac, radius, "warped",
                           {"winding": m, "ring_length": L, "modes": last})


def warped_oracle_for(q1: MetricField, **kwargs) -> EmbeddingOracle:
    """
    Warped oracle for a ``revolution`` or ``conformal`` metric (optionally with
    a constant ``c I`` removed) whose coefficients depend on ``x1`` only.
    """
    c = 0.0
    base = q1
    if q1.family == "difference":
        c = float(q1.params["c"])
        base = q1.params["base"]
    if base.n != 2:
        raise OracleError("warped oracle is only available for n = 2")
    if base.family == "revolution":
        R, rho = base.params["R"], base.params["rho"]

        def p(t):
            return np.full(np.shape(t), (TWO_PI * rho) ** 2 - c)

        def h(t):
            return (TWO_PI * (R + rho * np.cos(TWO_PI * t))) ** 2 - c

        def dh(t):
            return -2.0 * TWO_PI**3 * rho * (R + rho * np.cos(TWO_PI * t)) * np.sin(TWO_PI * t)

        return warped_oracle(p, h, dh, h_max=(TWO_PI * (R + rho)) ** 2 - c, **kwargs)
    if base.family == "conformal":
        f = base.params["f_expr"]
        if 2 in exprlang.variables(f):
            raise OracleError("warped oracle needs a conformal factor depending on x1 only")
        df = exprlang.differentiate(f, 1)

        def _at(e, t):
            t = np.asarray(t, dtype=float)
            return np.broadcast_to(exprlang.evaluate(e, np.column_stack([t, np.zeros_like(t)])), t.shape)

        def h(t):
            return np.exp(2.0 * _at(f, t)) - c

        def dh(t):
            return 2.0 * _at(df, t) * np.exp(2.0 * _at(f, t))

        return warped_oracle(h, h, dh, **kwargs)
    raise OracleError(f"no warped oracle for metric family {base.family!r}")


# --------------------------------------------------------------------------
# User-supplied components

def periodicity_residual(o: EmbeddingOracle, sampler=None) -> float:
    """Largest ``|u(x + e_i) - u(x)|`` over samples and unit vectors."""
    sampler = Sampler(seed=0, low=-2.0, high=2.0, count=1000) if sampler is None else sampler
    X = sampler.points(o.n, "periodicity")
    base = o(X)
    worst = 0.0
    for i in range(o.n):
        shifted = X.copy()
        shifted[:, i] += 1.0
        worst = max(worst, float(np.max(np.linalg.norm(o(shifted) - base, axis=-1))))
    return worst


def expression_oracle(components, target_metric: MetricField | None = None, n: int | None = None,
                      sampler=None, periodicity_tol: float = 1e-10,
                      tol: float = CERTIFY_TOL, radius_resolution: int | None = None) -> EmbeddingOracle:
    """
    Oracle from exprlang component texts.

    Components must be lattice periodic (checked at 1000 sample pairs).  When
    ``target_metric`` is given the oracle is certified against it and
    returned certified.  The radius is a dense-grid estimate of ``max |u|``.
    """
    if n is None:
        if target_metric is None:
            raise OracleError("need n or a target metric")
        n = target_metric.n
    exprs = [exprlang.parse(t, n) if isinstance(t, str) else t for t in components]
    if not exprs:
        raise OracleError("expression oracle needs at least one component")
    derivs = [[exprlang.differentiate(e, i + 1) for i in range(n)] for e in exprs]
    N = len(exprs)

    def func(X):
        return np.column_stack([np.broadcast_to(exprlang.evaluate(e, X), X.shape[:1]) for e in exprs])

    def jac(X):
        J = np.empty((X.shape[0], N, n))
        for k in range(N):
            for i in range(n):
                J[:, k, i] = exprlang.evaluate(derivs[k][i], X)
        return J

    res = radius_resolution or {1: 4096, 2: 128, 3: 32}.get(n, 8)
    grid_pts = unit_grid(n, res)
    radius = float(np.max(np.linalg.norm(func(grid_pts), axis=-1))) * (1.0 + 1e-6)
    o = EmbeddingOracle(n, N, func, jac, radius, "expression",
                        {"components": [exprlang.to_text(e) for e in exprs]})
    per = periodicity_residual(o, sampler)
    if not per < periodicity_tol:
        raise OracleError(f"oracle components are not lattice periodic (residual {per:.3g})")
    if target_metric is not None:
        o = certify(o, target_metric, sampler, tol)
    return o


# --------------------------------------------------------------------------
# Verification

def verify_oracle(o: EmbeddingOracle, q1: MetricField, sampler=None) -> float:
    """Largest ``|J_u^T J_u - q1|_F`` over the sampler's points."""
    if o.n != q1.n:
        raise OracleError(f"oracle is on R^{o.n}, metric on R^{q1.n}")
    sampler = Sampler(seed=0, low=0.0, high=1.0, count=1000) if sampler is None else sampler
    X = sampler.points(o.n, "oracle-pullback")
    return float(np.max(np.linalg.norm(pullback(o, X) - q1(X), axis=(1, 2))))


def certify(o: EmbeddingOracle, q1: MetricField, sampler=None, tol: float = CERTIFY_TOL) -> EmbeddingOracle:
    """Return ``o`` marked as verified for ``q1``; raise if the pullback is off."""
    r = verify_oracle(o, q1, sampler)
    if not r < tol:
        raise OracleError(
            f"oracle {o.name!r} is not isometric for the target metric "
            f"(pullback residual {r:.6g} >= {tol:g})"
        )
    return o.with_certificate(q1, r)


def invariance_residual(o: EmbeddingOracle, d: BieberbachElement, sampler=None) -> float:
    """Largest ``|u(d x) - u(x)|`` over the sampler's points."""
    sampler = Sampler(seed=0, low=-2.0, high=2.0, count=1000) if sampler is None else sampler
    X = sampler.points(o.n, "oracle-invariance")
    return float(np.max(np.linalg.norm(o(d(X)) - o(X), axis=-1)))
