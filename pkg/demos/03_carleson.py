"""Carleson measures from a function: |f|^2 (1-|z|^2)^p dA.

The N_p norm squared is comparable to the largest tube mass divided by
r^p. Polynomials give measures whose ratio vanishes at small radii, which
is how the little space shows up numerically.
"""

import numpy as np

from npball import Polynomial, carleson_constant, carleson_transform, norm_np, tube_measure

f = Polynomial({(0,): 1.0, (1,): -1.0, (2,): 0.5j}, n=1)
p = 1.0
rep = carleson_constant(f, p)
nsq = norm_np(f, p).value ** 2
print(f"sup mass / r^p = {rep.sup_quotient:.6f}, ||f||^2 = {nsq:.6f}, ratio {rep.sup_quotient / nsq:.3f}")
print("verdict:", rep.verdict)
print(rep.to_csv().splitlines()[0])
for line in rep.to_csv().splitlines()[1:6]:
    print(line)

# a tube of radius 2 covers the whole disc
xi = np.array([1.0 + 0j])
print("tube r=2:", tube_measure(f, p, 2.0, xi), "  r=0.5:", tube_measure(f, p, 0.5, xi))

one = Polynomial.constant(1.0)
for j in (1, 4, 7, 10):
    t = 1 - 2.0**-j
    print(f"transform at t=1-2^-{j}: {carleson_transform(one, p, 1.0, np.array([t + 0j])):.3e}")
