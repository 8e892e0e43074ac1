"""
Orchestration: config -> split -> oracle -> E, F -> verification report.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import RunConfig, config_hash, effective, parse_config
from .construct import AmbientMap, build_E, build_F, build_Phi, build_Psi, extend_action
from .crystal_group import BieberbachElement, compose, make_element, named_group, translation
from .errors import ExtensionUnavailable, OracleError
from .metric_field import (
    MetricField,
    MetricSplit,
    check_invariance,
    conformal_metric,
    constant_metric,
    expression_metric,
    identity_metric,
    min_eigenvalue_over_domain,
    revolution_metric,
    split_metric,
)
from .oracle import (
    EmbeddingOracle,
    certify,
    clifford_diagonal_oracle,
    clifford_general_oracle,
    expression_oracle,
    integer_decomposition,
    periodicity_residual,
    revolution_oracle,
    verify_oracle,
    warped_oracle_for,
)
from .sampling import Sampler
from .spiral import SpiralCurve, make_spiral
from . import verify as V

__all__ = ["Pipeline", "with_overrides", "build_field", "build_group", "build_oracle",
           "build_pipeline", "run_suite"]

SPLIT_EXACT_TOL = 1e-12
PERIODICITY_TOL = 1e-10
HOMOMORPHISM_TOL = 1e-15
CONTROL_TOL = 1e-8


@dataclass
class Pipeline:
    cfg: RunConfig
    field: MetricField
    split: MetricSplit
    curve: SpiralCurve
    oracle: EmbeddingOracle
    E: AmbientMap
    F: AmbientMap

    @property
    def n(self) -> int:
        return self.cfg.n

    def map(self, which: str) -> AmbientMap:
        if which not in ("E", "F"):
            raise ValueError(f"map must be 'E' or 'F', got {which!r}")
        return self.E if which == "E" else self.F


def with_overrides(cfg: RunConfig, seed=None, samples=None) -> RunConfig:
    """Re-validate ``cfg`` with command-line overrides folded into ``verify``."""
    if seed is None and samples is None:
        return cfg
    data = effective(cfg)
    if seed is not None:
        data["verify"]["seed"] = int(seed)
    if samples is not None:
        data["verify"]["samples"] = int(samples)
    return parse_config(data)


def build_group(cfg: RunConfig) -> list:
    g = cfg.group
    if g.name is not None:
        return named_group(g.name)
    return [make_element(s.A, [Fraction(t) if isinstance(t, str) else t for t in s.v])
            for s in g.generators]


def build_field(cfg: RunConfig) -> MetricField:
    m, n = cfg.metric, cfg.n
    group = build_group(cfg)
    if m.family == "identity":
        return identity_metric(n, group)
    if m.family == "constant":
        return constant_metric(m.matrix, group)
    if m.family == "conformal":
        return conformal_metric(m.f, n, group)
    if m.family == "revolution":
        return revolution_metric(m.R, m.rho, group)
    return expression_metric(m.entries, n, group)


def build_oracle(cfg: RunConfig, split: MetricSplit, sampler: Sampler | None = None) -> EmbeddingOracle:
    """Construct the configured oracle and certify it against ``split.q1``."""
    ocfg, q1 = cfg.oracle, split.q1
    if ocfg.name in ("clifford", "clifford-general"):
        if not q1.is_constant:
            raise OracleError(f"oracle {ocfg.name!r} needs a constant metric, got family {split.base.family!r}")
        G = q1(np.zeros(cfg.n))
        if ocfg.name == "clifford" and np.count_nonzero(G - np.diag(np.diag(G))) == 0:
            o = clifford_diagonal_oracle(np.diag(G))
        else:
            cands = [tuple(a) for a in ocfg.candidates] if ocfg.candidates else None
            o = clifford_general_oracle(integer_decomposition(G, cands))
    elif ocfg.name == "revolution":
        o = revolution_oracle(ocfg.R, ocfg.rho)
    elif ocfg.name == "warped":
        o = warped_oracle_for(q1)
    else:
        o = expression_oracle(ocfg.components, n=cfg.n, sampler=sampler)
    return certify(o, q1, sampler, cfg.verify.pullback_tol)


def build_pipeline(cfg: RunConfig, seed=None, samples=None) -> Pipeline:
    cfg = with_overrides(cfg, seed, samples)
    v = cfg.verify
    field = build_field(cfg)
    split = split_metric(field, cfg.split.fraction, cfg.split.resolution,
                         Sampler(v.seed, -2.0, 2.0, v.samples))
    s = cfg.spiral
    curve = make_spiral(s.r_in, s.r_out, s.k, s.tol)
    o = build_oracle(cfg, split, Sampler(v.seed, 0.0, 1.0, v.samples))
    return Pipeline(cfg, field, split, curve, o, build_E(split, o, curve), build_F(split, o))


# --------------------------------------------------------------------------

def _split_identity(p: Pipeline, sampler: Sampler) -> float:
    X = sampler.points(p.n, "split")
    recon = p.split.q1(X) + p.split.c * np.eye(p.n)
    return float(np.max(np.linalg.norm(recon - p.field(X), axis=(1, 2))))


def _margin_gap(p: Pipeline):
    lam = min_eigenvalue_over_domain(p.split.q1, p.split.resolution)
    return p.split.margin - lam, {"q1_min_eigenvalue": lam, "margin": p.split.margin,
                                  "grid": f"{p.split.resolution}^{p.n}"}


def _extensions(p: Pipeline, sampler: Sampler):
    """Extend every declared generator; returns (extended, refused)."""
    ok, refused = [], []
    for d in p.field.group:
        try:
            extend_action(d, p.split, p.oracle, sampler)
            ok.append(d)
        except ExtensionUnavailable as exc:
            refused.append({"element": d.to_dict(), "reason": str(exc)})
    return ok, refused


def _homomorphism_pairs(p: Pipeline, gens, sampler: Sampler, count: int = 20):
    ks = sampler.integers(p.n, 10, "homomorphism", 2 * count)
    elems = [translation([int(t) for t in k]) for k in ks] + list(gens)
    pairs = [(elems[2 * i], elems[2 * i + 1]) for i in range(count)]
    pairs += [(a, b) for a in gens for b in elems[: 2 * count : 4]]
    pairs += [(a, b) for a in gens for b in gens]
    return pairs


def run_suite(p: Pipeline) -> V.VerificationReport:
    """Run every check in a fixed order; the report is a pure function of the config."""
    cfg, v, n = p.cfg, p.cfg.verify, p.n
    seed, count = v.seed, v.samples
    win = Sampler(seed, -v.window, v.window, count)
    unit = Sampler(seed, 0.0, 1.0, count)
    split, o, E, F, curve = p.split, p.oracle, p.E, p.F, p.curve
    rep = V.VerificationReport(config=effective(cfg))

    def extend(d):
        return extend_action(d, split, o, win)

    # metric and split
    rep.add("metric.invariance", count, seed,
            lambda: max(check_invariance(p.field, d, win) for d in p.field.group), 1e-9)
    rep.add("split.identity", count, seed, lambda: _split_identity(p, win), SPLIT_EXACT_TOL)
    rep.add("split.margin", p.split.resolution**n, seed, lambda: _margin_gap(p), SPLIT_EXACT_TOL)

    # oracle
    rep.add("oracle.pullback", count, seed, lambda: verify_oracle(o, split.q1, win), v.pullback_tol)
    rep.add("oracle.periodicity", count, seed, lambda: periodicity_residual(o, win), PERIODICITY_TOL)

    # isometry
    for m in (E, F):
        rep.add(f"{m.tag}.pullback", count, seed,
                lambda m=m: V.pullback_residual(m, split.base, win), v.pullback_tol)
        rep.add(f"{m.tag}.pullback_fd", count, seed,
                lambda m=m: V.pullback_residual(m, split.base, win, use_fd=True), v.fd_tol)
        rep.add(f"{m.tag}.jacobian_fd", count, seed,
                lambda m=m: V.jacobian_fd_residual(m, win), V.FD_JACOBIAN_TOL)
    rep.add("dimensions", 1, seed,
            lambda: abs(E.D - (o.N + 2 * n)) + abs(F.D - (o.N + n)),
            0.5, {"N": o.N, "D_E": E.D, "D_F": F.D})

    # boundedness, injectivity, properness of E
    def bounded():
        mx, bound = V.boundedness_check(E, v.bound_window, v.bound_samples, seed)
        return mx - bound, {"max_norm": mx, "bound": bound, "window": v.bound_window}

    rep.add("E.bounded", v.bound_samples, seed, bounded, V.BOUND_SLACK)

    def injective():
        r = V.injectivity_probe(E, win, v.domain_floor, v.image_floor, v.injectivity_pairs)
        return v.image_floor - r["min_image_distance"], r

    rep.add("E.injectivity", v.injectivity_pairs, seed, injective, 0.0)

    def proper():
        r = V.properness_probe(E, v.shift_radius, win, v.properness_samples)
        return -r["min_separation"], r

    rep.add("E.properness", v.properness_samples, seed, proper, 0.0)

    # spiral contract
    rep.add("spiral.unit_speed", 10_000, seed, lambda: V.spiral_unit_speed_residual(curve), 1e-8)
    rep.add("spiral.annulus", 10_000, seed, lambda: V.spiral_annulus_residual(curve), 1e-12)
    rep.add("spiral.injectivity", 2000, seed, lambda: V.spiral_injectivity_residual(curve), 0.0)
    Psi = build_Psi(split, curve)
    rep.add("Psi.pullback", count, seed, lambda: V.pullback_residual(Psi, Psi.target, win), v.pullback_tol)

    # equivariance of F
    shifts = win.integers(n, 10, "shifts", v.translations)
    rep.add("F.translation_equivariance", count * v.translations, seed,
            lambda: V.translation_equivariance_residual(F, win, shifts, extend), v.equivariance_tol)
    gens, refused = _extensions(p, win)
    extra = [d for d in gens if not d.is_translation]
    if extra:
        rep.add("F.holonomy_equivariance", count, seed,
                lambda: max(V.equivariance_residual(F, d, extend(d), win) for d in extra),
                v.equivariance_tol)
    rep.add("extension.homomorphism", 0, seed,
            lambda: V.homomorphism_residual(_homomorphism_pairs(p, gens, win), extend),
            HOMOMORPHISM_TOL)

    # negative controls: each must show the predicted failure signature
    Phi = build_Phi(o)

    def wrong_target():
        r = V.pullback_residual(Phi, split.base, win)
        predicted = split.c * np.sqrt(n)
        return abs(r - predicted), {"observed": r, "predicted": predicted}

    rep.add("control.wrong_target", count, seed, wrong_target, CONTROL_TOL)

    def phi_not_injective():
        X = win.points(n, "control-injectivity")
        Y = X.copy()
        Y[:, 0] += 1.0
        r = V.injectivity_probe(Phi, win, 0.5, v.image_floor, explicit=(X, Y))
        return r["min_image_distance"], {"probe_passed": r["passed"]}

    rep.add("control.phi_injectivity", count, seed, phi_not_injective, CONTROL_TOL)

    def f_unbounded():
        w = max(v.window, 10.0 * curve.r_out / np.sqrt(split.c))
        mx, _ = V.boundedness_check(F, w, v.bound_samples, seed)
        return E.radius - mx, {"window": w, "F_max_norm": mx, "E_bound": E.radius}

    rep.add("control.F_unbounded", v.bound_samples, seed, f_unbounded, 0.0)

    rep.notes = {
        "config_hash": config_hash(cfg),
        "c": split.c,
        "margin": split.margin,
        "min_eigenvalue": split.min_eigenvalue,
        "oracle": o.name,
        "N": o.N,
        "R_Phi": o.radius,
        "E_bound": E.radius,
        "extension_refused": refused,
    }
    return rep
