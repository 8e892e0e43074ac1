"""
The torus of revolution metric.

The surface of revolution in R^3 realises g itself, but the construction
needs an embedding of Q1 = g - cI.  That gap is exactly c I, so the residual
is c * sqrt(2) at every point.  The warped oracle in R^4 is built for Q1
directly and closes the gap.
"""
import math

import numpy as np

from coverembed import (build_E, certify, expression_metric, make_spiral, revolution_metric,
                        revolution_oracle, split_metric, verify_oracle, warped_oracle_for)
from coverembed.sampling import Sampler
from coverembed.verify import pullback_residual

g = revolution_metric(R=2, rho=1)
split = split_metric(g)
print("c =", split.c, " (= 2 pi^2 =", 2 * math.pi**2, ")")

rev = revolution_oracle(2, 1)
print("N=3 oracle vs g :", verify_oracle(rev, g))
print("N=3 oracle vs Q1:", verify_oracle(rev, split.q1), " c*sqrt(2) =", split.c * math.sqrt(2))

## warped oracle for Q1
w = certify(warped_oracle_for(split.q1), split.q1)
print("warped:", w, w.params["winding"], "windings, residual", w.residual)
E = build_E(split, w, make_spiral())
print("E pullback residual on [-5,5]^2:", pullback_residual(E, g, Sampler(0, -5, 5, 1000)))

## a metric whose Q1 *is* the revolution metric
shifted = expression_metric(["(2*pi)^2 + 4*pi^2", "0", "(2*pi*(2 + cos(2*pi*x1)))^2 + 4*pi^2"], 2)
s2 = split_metric(shifted)
o2 = certify(rev, s2.q1)
E2 = build_E(s2, o2, make_spiral())
print("shifted metric: c =", s2.c, " D_E =", E2.D,
      " residual", pullback_residual(E2, shifted, Sampler(0, -5, 5, 1000)))
