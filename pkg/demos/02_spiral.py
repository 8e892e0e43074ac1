"""
The unit-speed spiral between two circles and the product map built from it.
Writes spiral.csv (columns s, x, y) for plotting.
"""
import numpy as np

from coverembed import make_spiral, product_spiral_map
from coverembed.export import spiral_csv
from coverembed.verify import spiral_annulus_residual, spiral_injectivity_residual, spiral_unit_speed_residual

curve = make_spiral(r_in=1.0, r_out=2.0, k=1.0)

s = np.array([-50.0, -5.0, 0.0, 5.0, 50.0])
print("s      radius      theta")
for si, p, th in zip(s, curve.point(s), curve.theta(s)):
    print(f"{si:6.1f} {np.linalg.norm(p):.10f} {th:10.4f}")

print("unit speed residual:", spiral_unit_speed_residual(curve))
print("annulus residual:   ", spiral_annulus_residual(curve))
violation, detail = spiral_injectivity_residual(curve)
print("injectivity:", violation < 0, detail)

## scaled product: pulls back c * I
psi = product_spiral_map(curve, c=0.25, n=2)
J = psi.jacobian(np.array([0.3, -1.2]))
print("J^T J =\n", J.T @ J)

with open("spiral.csv", "w") as fh:
    fh.write(spiral_csv(curve, -30, 30, 3001))
print("wrote spiral.csv")
