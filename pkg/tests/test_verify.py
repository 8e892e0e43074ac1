import math

import numpy as np
import pytest

from coverembed import build_E, build_F, build_Phi, certify, clifford_diagonal_oracle, identity_metric, make_spiral, split_metric, translation
from coverembed.crystal_group import identity
from coverembed.construct import extend_action
from coverembed.sampling import Sampler
from coverembed.verify import (
    CheckRecord,
    VerificationReport,
    boundedness_check,
    equivariance_residual,
    homomorphism_residual,
    injectivity_probe,
    jacobian_fd,
    properness_probe,
    pullback_residual,
    translation_equivariance_residual,
)

# regression floors from a brute-force scan (200k pairs / 1000 points x 440 shifts, two seeds)
INJECTIVITY_FLOOR = 0.098
PROPERNESS_FLOOR = 0.057


@pytest.fixture(scope="module")
def maps():
    field = identity_metric(2)
    split = split_metric(field)
    o = certify(clifford_diagonal_oracle([split.c, split.c]), split.q1)
    curve = make_spiral()
    return field, split, o, build_E(split, o, curve), build_F(split, o), curve


def test_pullback_analytic(maps):
    field, _, _, E, _, _ = maps
    assert pullback_residual(E, field, Sampler(0, -5, 5, 1000)) < 1e-10


def test_pullback_fd(maps):
    field, _, _, E, _, _ = maps
    assert pullback_residual(E, field, Sampler(0, -5, 5, 1000), use_fd=True) < 1e-6


def test_wrong_target_signature(maps):
    field, split, o, *_ = maps
    r = pullback_residual(build_Phi(o), field, Sampler(0, -5, 5, 1000))
    assert r == pytest.approx(split.c * math.sqrt(2), abs=1e-12)


def test_fd_step_default():
    f = lambda X: np.column_stack([np.sin(X[:, 0]) * X[:, 1]])
    X = np.array([[0.3, 2.0], [-40.0, 1.0]])
    J = jacobian_fd(f, X)
    exact = np.array([[[np.cos(0.3) * 2.0, np.sin(0.3)]], [[np.cos(-40.0), np.sin(-40.0)]]])
    assert np.max(np.abs(J - exact)) < 1e-7


def test_equivariance_translation_and_identity(maps):
    _, split, o, _, F, _ = maps
    s = Sampler(1, -5, 5, 1000)
    d = translation([3, -2])
    assert equivariance_residual(F, d, extend_action(d, split, o), s) < 1e-9
    assert equivariance_residual(F, identity(2), extend_action(identity(2), split, o), s) == 0.0


def test_translation_equivariance_batch(maps):
    _, split, o, _, F, _ = maps
    s = Sampler(2, -5, 5, 1000)
    shifts = s.integers(2, 10, "shifts", 100)
    assert translation_equivariance_residual(F, s, shifts, lambda d: extend_action(d, split, o)) < 1e-9


def test_homomorphism_exact(maps):
    _, split, o, *_ = maps
    pairs = [(translation([1, 2]), translation([-3, 5])), (identity(2), translation([0, 1]))]
    assert homomorphism_residual(pairs, lambda d: extend_action(d, split, o)) == 0.0


def test_boundedness(maps):
    _, _, _, E, F, curve = maps
    mx, bound = boundedness_check(E, 1000.0, 10_000)
    assert mx <= bound + 1e-9
    small, _ = boundedness_check(E, 0.1, 100)
    assert small <= bound


def test_F_grows_with_window(maps):
    _, split, o, E, F, curve = maps
    w = 10 * curve.r_out / math.sqrt(split.c)
    mx, bound = boundedness_check(F, w, 10_000)
    assert bound == math.inf
    assert mx > E.radius
    # e-block dominates: |F| ~ sqrt(c) * window * sqrt(n) at the corners
    assert 0.9 * math.sqrt(split.c) * w * math.sqrt(2) < mx <= math.sqrt(split.c) * w * math.sqrt(2) + o.radius


def test_injectivity_E(maps):
    E = maps[3]
    r = injectivity_probe(E, Sampler(0, -5, 5), 0.1, 1e-4, 10_000)
    assert r["passed"]
    assert r["min_image_distance"] >= INJECTIVITY_FLOOR
    assert r["domain_distance"] >= 0.1


def test_phi_not_injective(maps):
    o = maps[2]
    Phi = build_Phi(o)
    X = Sampler(0, -5, 5, 100).points(2)
    r = injectivity_probe(Phi, Sampler(0), 0.5, 1e-4, explicit=(X, X + [1.0, 0.0]))
    assert not r["passed"]
    assert r["min_image_distance"] < 1e-12


def test_psi_separates_far_shifts(maps):
    E = maps[3]
    Psi = E.parts[1]
    X = Sampler(0, -5, 5, 200).points(2)
    r = injectivity_probe(Psi, Sampler(0), 0.5, 1e-4, explicit=(X, X + [10.0, 0.0]))
    assert r["passed"] and r["min_image_distance"] > 0


def test_properness_default(maps):
    E = maps[3]
    r = properness_probe(E, 10, Sampler(0, -5, 5), 100)
    assert r["min_separation"] >= PROPERNESS_FLOOR
    assert r["shifts"] == 21**2 - 1


def test_properness_two_point(maps):
    _, split, _, E, _, curve = maps
    Psi = E.parts[1]
    two_point = np.linalg.norm(curve.point(math.sqrt(split.c)) - curve.point(0.0))
    assert np.linalg.norm(Psi([1.0, 0.0]) - Psi([0.0, 0.0])) == pytest.approx(two_point, rel=1e-14)
    r = properness_probe(E, 1, Sampler(0, 0.0, 0.0, 1), 1)
    assert 0 < r["min_separation"] <= two_point


def test_properness_rejects_radius_zero(maps):
    with pytest.raises(ValueError):
        properness_probe(maps[3], 0, Sampler(0))


def test_properness_n1_matches_spiral():
    split = split_metric(identity_metric(1))
    o = certify(clifford_diagonal_oracle([split.c]), split.q1)
    curve = make_spiral()
    E = build_E(split, o, curve)
    s = Sampler(3, -5, 5, 100)
    r = properness_probe(E, 10, s, 100)
    x = s.points(1, "properness", 100)[:, 0]
    sc = math.sqrt(split.c)
    direct = min(
        np.min(np.linalg.norm(curve.point(sc * (x + k)) - curve.point(sc * x), axis=-1))
        for k in range(-10, 11) if k
    )
    assert r["min_separation"] == direct


def test_record_pass_rule():
    assert CheckRecord("a", 1, 0, 0.5, 1.0).passed
    assert not CheckRecord("a", 1, 0, 1.0, 1.0).passed
    assert not CheckRecord("a", 1, 0, float("nan"), 1.0).passed


def test_report_json_is_stable():
    rep = VerificationReport(config={"k": 1})
    rep.add("x", 3, 0, lambda: (np.float64(0.25), {"arr": np.arange(2)}), 1.0)
    text = rep.to_json()
    assert text.endswith("\n")
    assert '"wall_time"' not in text
    assert '"wall_time"' in rep.to_json(include_timing=True)
    assert rep["x"].detail["arr"].tolist() == [0, 1]
    assert rep.passed
