"""
Flat torus walkthrough: split the metric, pick a Clifford oracle, build the
bounded map E and the equivariant map F, and look at their pullbacks.
"""
import numpy as np

from coverembed import (build_E, build_F, certify, clifford_general_oracle, constant_metric,
                        integer_decomposition, make_spiral, split_metric)
from coverembed.sampling import Sampler
from coverembed.verify import boundedness_check, pullback_residual

## A constant metric with an off-diagonal term
g = constant_metric([[5, 2], [2, 5]])
split = split_metric(g)
print("c      =", split.c)
print("margin =", split.margin)
print("Q1(0)  =\n", split.q1(np.zeros(2)))

## Q1 as a positive combination of integer rank-one terms
terms = integer_decomposition(split.q1(np.zeros(2)))
for coef, a in terms:
    print(f"  {coef:.6g} * {a} {a}^T")

oracle = certify(clifford_general_oracle(terms), split.q1)
print("oracle:", oracle, "residual", oracle.residual)

## The two embeddings
E = build_E(split, oracle, make_spiral())
F = build_F(split, oracle)
print("D_E =", E.D, "= N + 2n")
print("D_F =", F.D, "= N + n")

window = Sampler(seed=0, low=-5, high=5, count=1000)
print("E pullback residual:", pullback_residual(E, g, window))
print("F pullback residual:", pullback_residual(F, g, window))

## E stays in a ball, F does not
for w in (1.0, 100.0, 1000.0):
    mx_E, bound = boundedness_check(E, w, 5000)
    mx_F, _ = boundedness_check(F, w, 5000)
    print(f"window {w:7.1f}: max|E| = {mx_E:.4f} (bound {bound:.4f}), max|F| = {mx_F:.1f}")
