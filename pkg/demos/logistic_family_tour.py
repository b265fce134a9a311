"""
A tour of the generalized logistic family
=========================================

Densities, normalizing constants and the way marginals drift away from
the family they came from.
"""

import numpy as np

from glzeta.model import GLParams, LocationScale, normalizing_constant, pdf, preset
from glzeta.structure import consistency_defect, marginal_generator, native_generator

###############################################################################
# Named members of the family are just parameter points.

for name in ("normal", "logistic", "laplace"):
    print(f"{name:>10}: {preset(name)}")
print(f"{'kotz':>10}: {preset('kotz', N=2, a=1.0, s1=1.0)}")

###############################################################################
# The constant C_n comes from a zeta-type series; quadrature of the generator
# gives the same number by an unrelated route.

p = GLParams(N=2, a=1.5, b=0.7, r=0.3)
for n in (1, 2, 3):
    series = normalizing_constant(p, n, "series")
    quad = normalizing_constant(p, n, "quadrature")
    print(f"n={n}  series {series:.15f}  quadrature {quad:.15f}")

###############################################################################
# The bivariate logistic density at the centre is (2/pi) * 1/4.

ls = LocationScale([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
xs = np.linspace(-3, 3, 7)
grid = np.array([[pdf(preset("logistic"), ls, [x, y]) for x in xs] for y in xs])
np.set_printoptions(precision=4, suppress=True)
print(grid)

###############################################################################
# Integrating one coordinate out of a normal gives a normal again.  For the
# logistic it does not: the ratio of the marginal generator to the native
# one is not constant.

logistic = preset("logistic")
g_marg = marginal_generator(logistic, 3, 1)
g_native = native_generator(logistic, 1)
u = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
print("marginal / native:", g_marg(u) / g_native(u))

grid_points = [0.25, 0.5, 1.0, 2.0, 4.0]
print("defect, normal  :", consistency_defect(preset("normal"), 3, grid_points))
print("defect, logistic:", consistency_defect(logistic, 3, grid_points))
