"""
Conditioning and linear images
==============================

Conditional laws keep the elliptical shape but pick up a generator that
depends on the conditioning value.  Linear images inherit the marginal
generator.
"""

import numpy as np
from scipy import stats

from glzeta.model import LocationScale, preset
from glzeta.radial import random_source, sample
from glzeta.structure import conditional, linear_transform

p = preset("logistic")
ls = LocationScale([0.0, 0.0, 0.0], [[1.0, 0.4, 0.2], [0.4, 1.0, 0.3], [0.2, 0.3, 1.0]])

###############################################################################
# Condition the first coordinate on the other two.

for x2 in ([0.0, 0.0], [1.0, -1.0], [2.5, 2.5]):
    spec = conditional(p, ls, 1, x2)
    t = np.array([0.0, 1.0, 2.0])
    print(f"x2={x2}: mean {spec.mu_cond[0]:+.3f}, scale {spec.sigma_cond[0, 0]:.3f}, "
          f"q2 {spec.q2:.3f}, generator {np.round(spec.generator(t), 5)}")

###############################################################################
# Project onto a single direction and compare with simulated draws.

B = np.array([[1.0, -0.5, 2.0]])
proj = linear_transform(p, ls, B, [0.3])
y = (sample(p, ls, 100_000, random_source(3)) @ B.T).ravel() + 0.3
print("K-S against the projected law:", stats.kstest(y, proj.cdf))
