"""Generalized elliptical logistic (GL) distributions.

The generator ``g(t) = t^(N-1) exp(-a t^s1) / (1 + exp(-b t^s2))^(2r)``
defines elliptical laws whose normalizing constants, moments and
characteristic functions are ratios of generalized Hurwitz-Lerch zeta
values.  Submodules:

``special``    the zeta function and the quadrature it is checked against
``model``      parameters, presets, normalizing constants and densities
``radial``     exact sampling through the stochastic representation
``structure``  marginal, conditional and linearly transformed laws
``analysis``   moments, characteristic functions and local dependence
``inference``  likelihood fitting, AIC and Kolmogorov-Smirnov tests
``cli``        the ``glzeta`` command
"""

__version__ = "0.1.0"

from .errors import FitError, GLConvergenceError, GLDomainError
from .model import (GLParams, LocationScale, Preset, cdf_univariate, log_normalizing_constant,
                    log_pdf, normalizing_constant, pdf, preset)
from .special import phi_star, phi_star_integral
from .radial import random_source, sample
from .structure import conditional, consistency_defect, linear_transform, marginal_generator
from .analysis import (characteristic_function, characteristic_generator, local_dependence,
                       mean_cov, product_moment, radial_moment, transformed_cf)
from .inference import FitConfig, carbon_fiber_dataset, fit, ks_test, load_dataset

__all__ = [
    "FitError", "GLConvergenceError", "GLDomainError",
    "GLParams", "LocationScale", "Preset", "preset",
    "pdf", "log_pdf", "cdf_univariate", "normalizing_constant", "log_normalizing_constant",
    "phi_star", "phi_star_integral",
    "random_source", "sample",
    "conditional", "consistency_defect", "linear_transform", "marginal_generator",
    "characteristic_function", "characteristic_generator", "local_dependence",
    "mean_cov", "product_moment", "radial_moment", "transformed_cf",
    "FitConfig", "carbon_fiber_dataset", "fit", "ks_test", "load_dataset",
]
