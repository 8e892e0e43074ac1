from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverembed import act, compose, induced_action, inverse, make_element, named_group, translation
from coverembed.crystal_group import AmbientIsometry, identity
from coverembed.errors import GroupError

HALF = Fraction(1, 2)
GLIDE = make_element([[1, 0], [0, -1]], [HALF, 0])


def test_translation_is_valid():
    d = make_element(np.eye(2, dtype=int), [1, 0])
    assert d.is_translation


def test_glide_is_valid():
    assert not GLIDE.is_translation
    assert GLIDE.v == (HALF, Fraction(0))


def test_float_offset_converts_exactly():
    assert make_element([[1, 0], [0, -1]], [0.5, 0]) == GLIDE


def test_shear_rejected():
    with pytest.raises(GroupError, match="not a lattice-compatible isometry"):
        make_element([[1, 1], [0, 1]], [0, 0])


def test_non_integer_rejected():
    s = 2**-0.5
    with pytest.raises(GroupError, match="not a lattice-compatible isometry"):
        make_element([[s, -s], [s, s]], [0, 0])


def test_glide_squared_is_lattice_translation():
    sq = compose(GLIDE, GLIDE)
    assert sq == translation([1, 0])
    assert sq.is_translation


def test_inverse():
    assert compose(GLIDE, inverse(GLIDE)) == identity(2)
    assert compose(inverse(GLIDE), GLIDE) == identity(2)


def test_act():
    assert np.array_equal(act(translation([1, 0]), [0.3, 0.7]), np.array([1.3, 0.7]))


def test_induced_translation():
    t = induced_action(translation([1, 0]), 0.25)
    assert np.allclose(t([0.0, 0.0]), [0.5, 0.0], atol=0)


def test_induced_identity():
    t = induced_action(identity(2), 0.25)
    y = np.random.default_rng(0).normal(size=(10, 2))
    assert np.array_equal(t(y), y)


def test_induced_glide_intertwines_linear_map():
    c = 0.25
    de = induced_action(GLIDE, c)
    x = np.array([0.3, 0.7])
    lhs = de(np.sqrt(c) * x)
    rhs = np.sqrt(c) * GLIDE(x)
    assert np.allclose(lhs, [0.4, -0.35], atol=1e-15)
    assert np.array_equal(lhs, rhs)


def test_ambient_composition_needs_common_scale():
    a = AmbientIsometry(2, GLIDE.A, GLIDE.v, 0.5)
    b = AmbientIsometry(2, GLIDE.A, GLIDE.v, 0.25)
    with pytest.raises(GroupError):
        a @ b


def test_named_groups():
    assert len(named_group("torus-3")) == 3
    assert len(named_group("pg")) == 3
    assert len(named_group("pgg")) == 4
    with pytest.raises(GroupError):
        named_group("p4m")


@pytest.mark.parametrize("name", ["torus-2", "torus-3", "pg", "pgg"])
def test_translation_lattice_is_normal(name):
    gens = named_group(name)
    n = gens[0].n
    for d in gens:
        for k in itertools.product([-1, 0, 1, 2], repeat=n):
            conj = compose(compose(d, translation(k)), inverse(d))
            assert conj.is_translation


def _signed_permutations(n):
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product([1, -1], repeat=n):
            A = np.zeros((n, n), dtype=int)
            for i, j in enumerate(perm):
                A[i, j] = signs[i]
            yield A


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_group_axioms(data):
    n = data.draw(st.integers(1, 3))
    perms = list(_signed_permutations(n))
    vec = st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=8), min_size=n, max_size=n)
    a, b, c = (make_element(data.draw(st.sampled_from(perms)), data.draw(vec)) for _ in range(3))
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
    assert compose(a, inverse(a)) == identity(n)
    x = np.array(data.draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n)))
    assert np.allclose(act(compose(a, b), x), act(a, act(b, x)), atol=1e-12)
    # the induced action is a homomorphism, exactly on coefficients
    s = 0.7
    assert induced_action(a, s) @ induced_action(b, s) == induced_action(compose(a, b), s)
