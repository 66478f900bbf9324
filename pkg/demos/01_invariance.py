"""Mobius invariance of N_p, checked by hand.

The N_p norm is a supremum over base points a of a weighted integral of
|f|^2 against (1 - |phi_a|^2)^p. Composing with an automorphism and
multiplying by the right Jacobian factor should not change it. We pick
one polynomial and watch the residual stay at quadrature noise level.
"""

import numpy as np

from npball import Automorphism, Polynomial, QuadSpec, isometry_residual, norm_np
from npball.norms import SearchSpec

f = Polynomial({(0,): 1.0, (1,): 2.0, (3,): 1.0}, n=1)  # 1 + 2z + z^3
spec = QuadSpec(backend="quadrature", radial_nodes=64, angular_nodes=256)

for p in (0.5, 1.0):
    est = norm_np(f, p)
    print(f"p={p}: ||f||_p = {est.value:.10f}, sup attained near a = {np.round(est.argmax, 4)}")

# the residual compares I_f(a) for f and for its weighted composition
for a in (0.3, 0.5 + 0.2j, -0.7j):
    res = isometry_residual(f, Automorphism.involution([a]), 1.0, spec)
    print(f"a = {a!s:>10}: isometry residual {res:.2e}")

# a coarse search can only under-estimate: seeds may raise the value, never lower it
coarse = norm_np(f, 1.0, SearchSpec(levels=(0.0, 0.5, 0.9), directions=4, refine_starts=0))
print(f"coarse search {coarse.value:.10f} <= default {norm_np(f, 1.0).value:.10f}")
