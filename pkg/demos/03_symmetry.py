"""
Deck transformations and their extensions to the ambient space of F.

Lattice translations always extend.  A glide extends only when the oracle is
invariant under it; the Clifford oracle is not, so the extension is refused.
A half-period translation with a frequency-doubled oracle does extend.
"""
import math
from fractions import Fraction

import numpy as np

from coverembed import (build_F, certify, clifford_diagonal_oracle, compose, expression_oracle,
                        extend_action, identity_metric, make_element, named_group, split_metric,
                        translation)
from coverembed.errors import ExtensionUnavailable
from coverembed.sampling import Sampler
from coverembed.verify import equivariance_residual

pts = Sampler(seed=1, low=-5, high=5, count=1000)

## translations
split = split_metric(identity_metric(2, named_group("pg")))
o = certify(clifford_diagonal_oracle([split.c, split.c]), split.q1)
F = build_F(split, o)
for k in ([1, 0], [0, 1], [-7, 3]):
    d = translation(k)
    print(k, equivariance_residual(F, d, extend_action(d, split, o), pts))

## the glide of pg
glide = named_group("pg")[2]
try:
    extend_action(glide, split, o)
except ExtensionUnavailable as exc:
    print("glide:", exc)

## half-period translation with an invariant oracle
half = make_element(np.eye(2, dtype=int), [Fraction(1, 2), 0])
gens = [translation([1, 0]), translation([0, 1]), half]
split = split_metric(identity_metric(2, gens))
a = math.sqrt(split.c) / (4 * math.pi)
b = math.sqrt(split.c) / (2 * math.pi)
o = expression_oracle([f"{a!r}*cos(4*pi*x1)", f"{a!r}*sin(4*pi*x1)",
                       f"{b!r}*cos(2*pi*x2)", f"{b!r}*sin(2*pi*x2)"], split.q1)
F = build_F(split, o)
d = extend_action(half, split, o)
print("half translation:", equivariance_residual(F, half, d, pts))
print("(half o half)~ == half~ o half~:", extend_action(compose(half, half), split, o) == d @ d)
