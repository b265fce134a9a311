"""
Moments, characteristic functions and local dependence
======================================================

Closed-form moments checked against simulation, three series for the
characteristic generator, and the local dependence surface of a
bivariate law.
"""

import math

import numpy as np

from glzeta.analysis import (CfRepresentation, characteristic_generator, local_dependence,
                             mean_cov, product_moment)
from glzeta.model import GLParams, LocationScale, preset
from glzeta.radial import random_source, sample

###############################################################################
# Covariance is E(R^2)/n times Sigma.  A million draws agree.

p = preset("logistic")
ls = LocationScale([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
x = sample(p, ls, 10 ** 6, random_source(1))
print("theory:\n", mean_cov(p, ls).covariance)
print("sample:\n", np.cov(x.T))
print("E(Z1^2 Z2^2):", product_moment(p, 2, (2, 2)))

###############################################################################
# The characteristic generator as three differently weighted series.  They
# agree where they converge; the heavy-tailed Laplace member is a reminder
# that the series has a finite reach.

q = GLParams(N=2, a=1.2, b=0.8, r=1.5)
for u2 in (0.1, 0.5, 1.0, 4.0):
    vals = [characteristic_generator(q, 2, u2, rep) for rep in CfRepresentation
            if not rep.value.startswith("transformed")]
    quad = characteristic_generator(q, 2, u2, "quadrature")
    print(f"u2={u2:<4} series {vals[0]:.12f} spread {max(vals) - min(vals):.1e} quadrature {quad:.12f}")

###############################################################################
# Local dependence H(x, y) for rho = 0.5.

xs = np.linspace(-3, 3, 7)
table = local_dependence(p, 0.5, xs[None, :], xs[:, None])
np.set_printoptions(precision=3, suppress=True)
print(table)
print("H is symmetric:", math.isclose(local_dependence(p, 0.5, 1, 2), local_dependence(p, 0.5, 2, 1)))
