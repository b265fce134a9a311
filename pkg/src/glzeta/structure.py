"""Marginals, conditionals and linear images of GL laws.

None of these derived laws is a GL law at the new dimension: integrating
out coordinates changes the *shape* of the generator, not just a
dimension index.  :func:`consistency_defect` turns that into a number.

Generators are carried unnormalized in :class:`GeneratorFunction`; the
constant that makes them a density in a target dimension is attached only
when a density is evaluated.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import GLConvergenceError, GLDomainError
from .model import (GLParams, LocationScale, log_density_generator, log_normalizing_constant,
                    radial_scale)
from .special import (QuadratureConfig, cumulative_integral, integrate_interval, integrate_semi_infinite,
                      phi_star)

__all__ = [
    "Provenance",
    "GeneratorFunction",
    "Partition",
    "ConditionalSpec",
    "TransformedSpec",
    "native_generator",
    "marginal_generator",
    "generator_step_down",
    "stepped_generator",
    "consistency_defect",
    "conditional",
    "linear_transform",
]

_CFG = QuadratureConfig(relative_tolerance=1e-12, absolute_tolerance=1e-300,
                        max_subdivisions=4000)

#: point count above which TransformedSpec.cdf switches to a tabulated integral
CDF_TABLE_THRESHOLD = 2048

STEP_DOWN_CONVENTION = (
    "derivative recursion evaluated as -g'(u) without the 1/pi factor; "
    "generators are compared up to a positive constant")


class Provenance(str, enum.Enum):
    GL_NATIVE = "gl-native"
    MARGINAL_SERIES = "marginal-series"
    MARGINAL_QUADRATURE = "marginal-quadrature"
    CONDITIONAL = "conditional"
    TRANSFORMED = "transformed"
    STEP_INTEGRATE = "step-integrate"
    STEP_DIFFERENTIATE = "step-differentiate"


class GeneratorFunction:
    """An unnormalized density generator with a record of where it came from.

    Parameters
    ----------
    rule : callable
        Maps an array of ``t >= 0`` to generator values (same shape).
    provenance : Provenance
    origin : dict
        Parameters, source dimension and target dimension.
    log_constants : dict, optional
        Known ``log C_m`` values keyed by target dimension ``m``.  Missing
        entries are computed by quadrature on first use.
    """

    def __init__(self, rule: Callable, provenance: Provenance, origin: dict,
                 log_constants: dict | None = None, notes: str = ""):
        self._rule = rule
        self.provenance = Provenance(provenance)
        self.origin = dict(origin)
        self.notes = notes
        self._log_constants = dict(log_constants or {})

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise GLDomainError("generator argument must be non-negative")
        out = np.asarray(self._rule(np.atleast_1d(arr)), dtype=float).reshape(np.shape(arr))
        return float(out) if out.ndim == 0 else out

    def mass(self, m: int) -> float:
        """``int_0^inf t^(m/2 - 1) g(t) dt``."""
        scale = self.origin.get("scale", 1.0)

        def integrand(y):
            t = scale * y
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = np.asarray(self._rule(t.ravel()), dtype=float).reshape(t.shape)
                return np.where(vals > 0, np.exp((0.5 * m - 1.0) * np.log(t)) * vals, 0.0) * scale

        return integrate_semi_infinite(integrand, _CFG)

    def log_constant(self, m: int) -> float:
        """``log C_m`` making ``C_m g(q)`` a density on ``R^m``."""
        m = int(m)
        if m not in self._log_constants:
            self._log_constants[m] = (math.lgamma(0.5 * m) - 0.5 * m * math.log(math.pi)
                                      - math.log(self.mass(m)))
        return self._log_constants[m]

    def __repr__(self):
        return f"GeneratorFunction({self.provenance.value}, {self.origin})"


def native_generator(params: GLParams, n: int) -> GeneratorFunction:
    """The GL generator itself, tagged for dimension ``n``."""
    n = params.check_dimension(n)
    return GeneratorFunction(
        lambda t: np.exp(log_density_generator(params, t)),
        Provenance.GL_NATIVE,
        {"params": params, "n": n, "m": n, "scale": radial_scale(params)},
        {n: log_normalizing_constant(params, n)},
    )


# ---------------------------------------------------------------------------
# marginal generators


def _series_applicable(params: GLParams) -> bool:
    return (params.s1 == 1.0 and params.s2 == 1.0
            and params.N >= 1 and float(params.N).is_integer())


def _check_series(params: GLParams):
    if not _series_applicable(params):
        raise GLDomainError("the series form needs s1 = s2 = 1 and integer N >= 1")


def _shifted_generator_series(params: GLParams, k: float, u: float) -> float:
    """``int_0^inf y^(k-1) g(y + u) dy`` for ``s = 1`` and integer ``N``."""
    total = 0.0
    n_minus = int(params.N) - 1
    ab = params.a / params.b
    z = -math.exp(-params.b * u)
    for j in range(n_minus + 1):
        if u == 0.0 and j < n_minus:
            continue
        log_w = (math.lgamma(n_minus + 1) - math.lgamma(j + 1) - math.lgamma(n_minus - j + 1)
                 + math.lgamma(k + j) - (k + j) * math.log(params.b) - params.a * u)
        if n_minus - j:
            log_w += (n_minus - j) * math.log(u)
        total += math.exp(log_w) * phi_star(z, k + j, ab, 2.0 * params.r)
    return total


def _shifted_generator_quadrature(params: GLParams, k: float, u: float,
                                  cfg: QuadratureConfig = _CFG) -> float:
    """``int_0^inf y^(k-1) g(y + u) dy`` by quadrature."""
    c = radial_scale(params)

    def integrand(w):
        y = c * w
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.exp((k - 1.0) * np.log(y) + log_density_generator(params, y + u)) * c

    return integrate_semi_infinite(integrand, cfg)


def _vector_rule(scalar_rule):
    def rule(t):
        t = np.asarray(t, dtype=float)
        return np.array([scalar_rule(float(x)) for x in t.ravel()]).reshape(t.shape)
    return rule


@lru_cache(maxsize=256)
def marginal_generator(params: GLParams, n: int, m: int, method: str = "quadrature") -> GeneratorFunction:
    """Generator of the first ``m`` coordinates of an ``n``-dimensional GL law.

    ``ghat_m(u) = int_0^inf y^((n-m)/2 - 1) g(y + u) dy``.

    Parameters
    ----------
    method : {"quadrature", "series"}
        ``"series"`` expands the logistic factor and needs ``s1 = s2 = 1``
        with integer ``N >= 1``; it is a finite sum over ``j < N`` of
        ``Phi*_{2r}(-exp(-b u), (n-m)/2 + j, a/b)`` terms.

    Returns
    -------
    GeneratorFunction
        With the normalizing constant for dimension ``m`` attached in
        closed form, ``C_m = C_n pi^((n-m)/2) / Gamma((n-m)/2)``.
    """
    n = params.check_dimension(n)
    if isinstance(m, bool) or int(m) != m or not 1 <= m < n:
        raise GLDomainError(f"need 1 <= m < n, got m={m}, n={n}")
    m = int(m)
    k = 0.5 * (n - m)
    if method == "series":
        _check_series(params)
        scalar = lambda u: _shifted_generator_series(params, k, u)  # noqa: E731
        tag = Provenance.MARGINAL_SERIES
    elif method == "quadrature":
        scalar = lambda u: _shifted_generator_quadrature(params, k, u)  # noqa: E731
        tag = Provenance.MARGINAL_QUADRATURE
    else:
        raise GLDomainError(f"unknown method {method!r}")
    log_cm = (log_normalizing_constant(params, n) + k * math.log(math.pi) - math.lgamma(k))
    return GeneratorFunction(_vector_rule(scalar), tag,
                             {"params": params, "n": n, "m": m, "scale": radial_scale(params)},
                             {m: log_cm})


# ---------------------------------------------------------------------------
# step-down recursions


def _evaluate(g, u):
    return float(g(u)) if isinstance(g, GeneratorFunction) else float(g(u))


def generator_step_down(g, direction: str, u: float) -> float:
    """Move a generator two dimensions down (integrate) or up (differentiate).

    ``"integrate"`` returns ``int_u^inf g(w) dw``.  ``"differentiate"``
    returns ``-g'(u)`` from central differences at relative step 1e-6 (with
    a floor of 1e-6 absolute) and one Richardson extrapolation.  The
    constant ``1/pi`` of the classical recursion is not applied; see
    :data:`STEP_DOWN_CONVENTION`.
    """
    u = float(u)
    if not u > 0:
        raise GLDomainError(f"step-down point must be positive, got {u}")
    if direction == "integrate":
        return integrate_semi_infinite(
            lambda w: np.asarray(g(w), dtype=float), _CFG, lower=u)
    if direction != "differentiate":
        raise GLDomainError(f"unknown direction {direction!r}")
    h = 1e-6 * max(u, 1.0)
    h = min(h, 0.25 * u)

    def central(step):
        return (_evaluate(g, u + step) - _evaluate(g, u - step)) / (2.0 * step)

    coarse, fine = central(2.0 * h), central(h)
    value = -(4.0 * fine - coarse) / 3.0
    if not math.isfinite(value):
        raise GLConvergenceError(f"derivative of the generator is not finite at u={u}")
    return value


def stepped_generator(g, direction: str) -> GeneratorFunction:
    """Wrap :func:`generator_step_down` as a new :class:`GeneratorFunction`."""
    tag = Provenance.STEP_INTEGRATE if direction == "integrate" else Provenance.STEP_DIFFERENTIATE
    origin = dict(getattr(g, "origin", {}))
    return GeneratorFunction(_vector_rule(lambda u: generator_step_down(g, direction, u)),
                             tag, origin, notes=STEP_DOWN_CONVENTION)


# ---------------------------------------------------------------------------
# consistency


def consistency_defect(params: GLParams, n: int, grid) -> float:
    """Largest relative gap between the true and the GL generator one dimension down.

    Both sides are normalized to densities on ``R^(n-1)``: the generator of
    the first ``n - 1`` coordinates of the ``n``-dimensional law, and the GL
    generator used directly at dimension ``n - 1``.  The result is 0 exactly
    when the family is dimension coherent on ``grid``.
    """
    n = params.check_dimension(n)
    if n < 2:
        raise GLDomainError("the consistency defect needs n >= 2")
    params.check_dimension(n - 1)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0):
        raise GLDomainError("grid must be a non-empty list of positive values")
    marg = marginal_generator(params, n, n - 1, "quadrature")
    lhs = np.exp(marg.log_constant(n - 1)) * marg(grid)
    rhs = np.exp(log_normalizing_constant(params, n - 1)
                 + log_density_generator(params, grid))
    return float(np.max(np.abs(lhs - rhs) / rhs))


# ---------------------------------------------------------------------------
# conditionals


@dataclass(frozen=True, eq=False)
class Partition:
    """Head/tail split of ``(mu, Sigma)`` after the first ``m`` coordinates."""

    m: int
    mu1: np.ndarray
    mu2: np.ndarray
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray

    @classmethod
    def split(cls, ls: LocationScale, m: int) -> "Partition":
        n = ls.n
        if isinstance(m, bool) or int(m) != m or not 1 <= m < n:
            raise GLDomainError(f"need 1 <= m < n, got m={m}, n={n}")
        m = int(m)
        s = ls.sigma
        part = cls(m, ls.mu[:m], ls.mu[m:], s[:m, :m], s[:m, m:], s[m:, :m], s[m:, m:])
        try:
            np.linalg.cholesky(part.s22)
        except np.linalg.LinAlgError:
            raise GLDomainError("Sigma22 is not positive definite") from None
        return part


@dataclass(frozen=True, eq=False)
class ConditionalSpec:
    """Law of the head block given the tail block.

    The density is ``C_m |Sigma_cond|^{-1/2} generator(Q)`` with
    ``C_m = Gamma(m/2) / pi^(m/2)``, because ``generator`` is already
    divided by ``int_0^inf t^(m/2-1) g(t + q2) dt``.
    """

    mu_cond: np.ndarray
    sigma_cond: np.ndarray
    generator: GeneratorFunction
    q2: float
    ls: LocationScale = field(repr=False)

    @property
    def m(self) -> int:
        return self.mu_cond.shape[0]

    def log_pdf(self, x1):
        q = np.asarray(self.ls.quadratic_form(x1))
        m = self.m
        log_c = math.lgamma(0.5 * m) - 0.5 * m * math.log(math.pi)
        with np.errstate(divide="ignore"):
            out = log_c - 0.5 * self.ls.log_det_sigma + np.log(self.generator(q))
        return float(out) if np.ndim(out) == 0 else out

    def pdf(self, x1):
        return np.exp(self.log_pdf(x1))


def conditional(params: GLParams, ls: LocationScale, part, x2, method: str = "quadrature") -> ConditionalSpec:
    """Conditional law of ``X1`` given ``X2 = x2``.

    Location and scale follow the usual block formulas.  The generator is
    ``g(t + q2) / D`` with ``D = int_0^inf t^(m/2-1) g(t + q2) dt`` where
    ``q2 = (x2 - mu2)^T Sigma22^{-1} (x2 - mu2)``.  ``D`` comes from
    quadrature by default; ``method="series"`` uses the finite zeta sum
    available for ``s1 = s2 = 1`` and integer ``N``.
    """
    n = params.check_dimension(ls.n)
    if not isinstance(part, Partition):
        part = Partition.split(ls, part)
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x2.shape != part.mu2.shape:
        raise GLDomainError(f"x2 must have length {part.mu2.size}")
    f22 = np.linalg.cholesky(part.s22)
    d = np.linalg.solve(f22, x2 - part.mu2)
    q2 = float(d @ d)
    w = np.linalg.solve(part.s22, part.s21).T  # Sigma12 Sigma22^{-1}
    mu_cond = part.mu1 + w @ (x2 - part.mu2)
    sigma_cond = part.s11 - w @ part.s21
    sigma_cond = 0.5 * (sigma_cond + sigma_cond.T)
    m = part.m
    if method == "series":
        _check_series(params)
        denom = _shifted_generator_series(params, 0.5 * m, q2)
    elif method == "quadrature":
        denom = _shifted_generator_quadrature(params, 0.5 * m, q2)
    else:
        raise GLDomainError(f"unknown method {method!r}")
    if not (denom > 0 and math.isfinite(denom)):
        raise GLConvergenceError(f"conditional normalizer is {denom!r}")
    log_denom = math.log(denom)

    def rule(t):
        with np.errstate(divide="ignore"):
            return np.exp(log_density_generator(params, np.asarray(t) + q2) - log_denom)

    gen = GeneratorFunction(rule, Provenance.CONDITIONAL,
                            {"params": params, "n": n, "m": m, "q2": q2,
                             "scale": radial_scale(params)},
                            {m: math.lgamma(0.5 * m) - 0.5 * m * math.log(math.pi)})
    try:
        inner = LocationScale(mu_cond, sigma_cond)
    except GLDomainError:
        raise GLDomainError("conditional scale matrix is not positive definite") from None
    return ConditionalSpec(inner.mu, inner.sigma, gen, q2, inner)


# ---------------------------------------------------------------------------
# linear transforms


@dataclass(frozen=True, eq=False)
class TransformedSpec:
    """Law of ``Y = B X + b``: elliptical with a marginal-type generator."""

    mu_t: np.ndarray
    sigma_t: np.ndarray
    generator: GeneratorFunction
    ls: LocationScale = field(repr=False)

    @property
    def m(self) -> int:
        return self.mu_t.shape[0]

    def log_pdf(self, y):
        q = np.asarray(self.ls.quadratic_form(y))
        with np.errstate(divide="ignore"):
            out = (self.generator.log_constant(self.m) - 0.5 * self.ls.log_det_sigma
                   + np.log(self.generator(q)))
        return float(out) if np.ndim(out) == 0 else out

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    def cdf(self, y):
        """CDF of a one-dimensional image, by quadrature of the generator.

        Up to :data:`CDF_TABLE_THRESHOLD` points are integrated exactly,
        gap by gap.  Larger inputs (K-S tests on big samples) integrate once
        on a fine lattice and evaluate a cubic Hermite interpolant whose
        slopes are the exact density, which keeps the error around 1e-9 for
        smooth generators.  Generators with a pole at the origin always take
        the exact route.
        """
        if self.m != 1:
            raise GLDomainError("cdf is only defined for one-dimensional images")
        c = math.exp(self.generator.log_constant(1))
        sd = math.sqrt(self.sigma_t[0, 0])
        y = np.asarray(y, dtype=float)
        z = ((y - self.mu_t[0]) / sd).ravel()
        mag = np.abs(z)
        finite = np.isfinite(mag)
        half = np.full(z.shape, 0.5)
        cfg = QuadratureConfig(1e-10, 1e-14, 2000)

        def density(w):
            return self.generator(w * w)

        table = None
        if np.count_nonzero(finite) > CDF_TABLE_THRESHOLD:
            top = float(mag[finite].max())
            knots = np.linspace(0.0, min(top, 20.0), 1025)
            if top > 20.0:
                knots = np.unique(np.concatenate([knots, np.geomspace(20.0, top, 65)]))
            slopes = density(knots)
            if np.all(np.isfinite(slopes)):
                table = CubicHermiteSpline(knots, cumulative_integral(density, knots, cfg), slopes)
        if table is not None:
            half[finite] = c * table(mag[finite])
        else:
            idx = np.flatnonzero(finite)
            order = idx[np.argsort(mag[idx])]
            half[order] = c * cumulative_integral(density, np.concatenate([[0.0], mag[order]]), cfg)[1:]
        out = 0.5 + np.sign(z) * np.clip(half, 0.0, 0.5)
        out = np.clip(out, 0.0, 1.0).reshape(y.shape)
        return float(out) if out.ndim == 0 else out


def linear_transform(params: GLParams, ls: LocationScale, B, b=None, method: str | None = None) -> TransformedSpec:
    """Law of ``Y = B X + b`` for a full-row-rank ``m x n`` matrix ``B``.

    ``Y`` is elliptical with location ``B mu + b``, scale ``B Sigma B^T``
    and the generator of an ``m``-dimensional marginal of ``X``.  For
    ``m = n`` that is the original generator.
    """
    n = params.check_dimension(ls.n)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.ndim != 2 or B.shape[1] != n:
        raise GLDomainError(f"B must have {n} columns")
    m = B.shape[0]
    if m > n or np.linalg.matrix_rank(B) != m:
        raise GLDomainError("B must have full row rank m <= n")
    b = np.zeros(m) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (m,):
        raise GLDomainError(f"b must have length {m}")
    if m == n:
        gen = native_generator(params, n)
    else:
        if method is None:
            method = "series" if _series_applicable(params) else "quadrature"
        gen = marginal_generator(params, n, m, method)
    inner = LocationScale(B @ ls.mu + b, B @ ls.sigma @ B.T)
    return TransformedSpec(inner.mu, inner.sigma, gen, inner)
