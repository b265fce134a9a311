"""Moments, characteristic functions and local dependence.

Every quantity here is a ratio of generalized Hurwitz-Lerch zeta values.
The radial moments

    E(R^p) = Gamma(alpha_p) Phi*(-1, alpha_p, a/b)
             / (b^(p/(2s)) Gamma(alpha_0) Phi*(-1, alpha_0, a/b)),
    alpha_p = (N + n/2 + p/2 - 1) / s,

drive the covariance, the product moments and the power series of the
characteristic generator.  The characteristic generator series is offered
in three algebraically equal coefficient forms (Beta-weighted,
Gamma-ratio and Pochhammer) so each can check the others, plus direct
quadrature against the Bessel kernel of the uniform sphere.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import jv

from .errors import GLConvergenceError, GLDomainError
from .model import (GLParams, LocationScale, generator_moment, log_density_generator,
                    log_normalizing_constant)
from .special import QuadratureConfig, integrate_interval, integrate_semi_infinite, phi_star
from .structure import TransformedSpec, marginal_generator

__all__ = [
    "CfRepresentation",
    "CfSeriesTerms",
    "MomentReport",
    "radial_moment",
    "mean_cov",
    "product_moment",
    "moment_report",
    "cf_series_terms",
    "characteristic_generator",
    "characteristic_function",
    "transformed_generator",
    "transformed_cf",
    "local_dependence",
    "local_dependence_parts",
]

CF_RTOL = 1e-14
CF_MAX_TERMS = 500
_ROUNDOFF_LIMIT = 1e-10


class CfRepresentation(str, enum.Enum):
    """Coefficient forms of the characteristic-generator power series."""

    BETA = "beta"
    GAMMA_RATIO = "gamma-ratio"
    POCHHAMMER = "pochhammer"
    TRANSFORMED_BETA = "transformed-beta"
    TRANSFORMED_GAMMA_RATIO = "transformed-gamma-ratio"
    TRANSFORMED_POCHHAMMER = "transformed-pochhammer"


@dataclass(frozen=True)
class CfSeriesTerms:
    """Coefficients ``c_j`` of ``phi(u) = sum_j c_j u^j`` as used at one ``u``.

    ``c_0 == 1`` always.  ``truncation`` is the number of terms summed and
    ``tail_bound`` a geometric bound on what was left out.
    """

    coefficients: np.ndarray = field(repr=False)
    representation: CfRepresentation
    truncation: int
    tail_bound: float
    value: float


@dataclass
class MomentReport:
    mean: np.ndarray
    covariance: np.ndarray
    radial_moments: dict = field(default_factory=dict)
    product_moments: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "radial_moments": {str(k): v for k, v in self.radial_moments.items()},
            "product_moments": [{"orders": list(k), "value": v}
                                for k, v in self.product_moments.items()],
        }


# ---------------------------------------------------------------------------
# moments


def _alpha(params: GLParams, n: int, p: float) -> float:
    return (params.N + 0.5 * n + 0.5 * p - 1.0) / params.s


def _log_zeta(params: GLParams, s_arg: float) -> float:
    value = phi_star(-1.0, s_arg, params.a / params.b, 2.0 * params.r)
    if not (value > 0 and math.isfinite(value)):
        raise GLConvergenceError(f"zeta value {value!r} is unusable for a log ratio")
    return math.log(value)


def _log_radial_moment(params: GLParams, n: int, p: float) -> float:
    a_p, a_0 = _alpha(params, n, p), _alpha(params, n, 0.0)
    return (math.lgamma(a_p) + _log_zeta(params, a_p) - 0.5 * p / params.s * math.log(params.b)
            - math.lgamma(a_0) - _log_zeta(params, a_0))


def radial_moment(params: GLParams, n: int, p: float, method: str = "series") -> float:
    """``E(R^p)`` for the radius of the ``n``-dimensional law.

    Parameters
    ----------
    method : {"series", "quadrature"}
        The zeta ratio (needs ``s1 == s2``) or a direct ratio of generator
        integrals.
    """
    n = params.check_dimension(n)
    p = float(p)
    if not (p >= 0 and math.isfinite(p)):
        raise GLDomainError(f"moment order must be finite and >= 0, got {p}")
    if p == 0:
        return 1.0
    if method == "series":
        params.s  # noqa: B018  (raises unless s1 == s2)
        return math.exp(_log_radial_moment(params, n, p))
    if method == "quadrature":
        return (generator_moment(params, 0.5 * (n + p) - 1.0)
                / generator_moment(params, 0.5 * n - 1.0))
    raise GLDomainError(f"unknown method {method!r}")


def mean_cov(params: GLParams, ls: LocationScale) -> MomentReport:
    """Mean ``mu`` and covariance ``E(R^2) Sigma / n``."""
    n = ls.n
    er2 = radial_moment(params, n, 2.0)
    return MomentReport(mean=ls.mu.copy(), covariance=er2 / n * ls.sigma,
                        radial_moments={2.0: er2})


def product_moment(params: GLParams, n: int, m_vec: Sequence[int]) -> float:
    """``E(prod Z_i^{m_i})`` for ``Z = Sigma^{-1/2}(X - mu)``.

    Zero if any order is odd.  Otherwise with ``m_i = 2 l_i`` and
    ``l = sum l_i`` the value is
    ``E(R^{2l}) / (n/2)^{[l]} * prod (2 l_i)! / (4^{l_i} l_i!)``.
    """
    n = params.check_dimension(n)
    orders = [int(v) for v in m_vec]
    if len(orders) != n or any(o < 0 or o != v for o, v in zip(orders, m_vec)):
        raise GLDomainError(f"m_vec must hold {n} non-negative integers")
    if any(o % 2 for o in orders):
        return 0.0
    half = [o // 2 for o in orders]
    total = sum(half)
    if total == 0:
        return 1.0
    log_u = -(math.lgamma(0.5 * n + total) - math.lgamma(0.5 * n))
    for l_i in half:
        log_u += math.lgamma(2 * l_i + 1) - l_i * math.log(4.0) - math.lgamma(l_i + 1)
    return math.exp(log_u) * radial_moment(params, n, 2.0 * total)


def moment_report(params: GLParams, ls: LocationScale, powers=(1.0, 2.0, 4.0),
                  products: Sequence[Sequence[int]] = ()) -> MomentReport:
    report = mean_cov(params, ls)
    for p in powers:
        report.radial_moments[float(p)] = radial_moment(params, ls.n, p)
    for orders in products:
        report.product_moments[tuple(int(o) for o in orders)] = product_moment(params, ls.n, orders)
    return report


# ---------------------------------------------------------------------------
# power-series summation


def _sum_alternating(log_coef: Callable[[int], float], u: float, representation) -> CfSeriesTerms:
    """Sum ``sum_j (-1)^j exp(log_coef(j)) u^j`` with the adaptive stop rule."""
    if u == 0.0:
        return CfSeriesTerms(np.array([1.0]), representation, 1, 0.0, 1.0)
    log_u = math.log(u)
    coefs, partial, abs_sum = [], 0.0, 0.0
    prev_mag = None
    for j in range(CF_MAX_TERMS):
        lc = log_coef(j)
        coef = (-1.0) ** j * math.exp(lc)
        mag = math.exp(lc + j * log_u)
        if not math.isfinite(mag):
            raise GLConvergenceError(
                f"characteristic series overflowed at term {j} for u={u}; "
                "use the quadrature form", estimate=partial)
        coefs.append(coef)
        partial += (-1.0) ** j * mag
        abs_sum += mag
        ratio = mag / prev_mag if prev_mag else math.inf
        prev_mag = mag
        if j > 0 and mag < CF_RTOL * abs(partial) and ratio < 1.0:
            tail = mag * ratio / (1.0 - ratio)
            if abs_sum * 2.2e-16 > _ROUNDOFF_LIMIT:
                raise GLConvergenceError(
                    f"characteristic series lost accuracy to cancellation at u={u}; "
                    "use the quadrature form", estimate=partial, error=abs_sum * 2.2e-16)
            return CfSeriesTerms(np.array(coefs), representation, j + 1, tail, partial)
    raise GLConvergenceError(
        f"characteristic series did not settle in {CF_MAX_TERMS} terms at u={u}; "
        "the power series is outside its reliable range, use the quadrature form",
        estimate=partial)


class _ZetaCache:
    """Memo for ``log Phi*_{2r}(-1, ., a/b)`` across one series evaluation."""

    def __init__(self, params: GLParams):
        self.params = params
        self.values: dict = {}

    def __call__(self, s_arg: float) -> float:
        if s_arg not in self.values:
            self.values[s_arg] = _log_zeta(self.params, s_arg)
        return self.values[s_arg]


def _log_coefficients(params: GLParams, n: int, representation: CfRepresentation):
    s = params.s
    log_b = math.log(params.b)
    zeta = _ZetaCache(params)
    a0 = _alpha(params, n, 0.0)
    lg_a0 = math.lgamma(a0)
    half = 0.5 * n

    def alpha_k(k):
        return (half + k + params.N - 1.0) / s

    if representation is CfRepresentation.BETA:
        if n < 2:
            raise GLDomainError("the Beta-weighted form needs n > 1")

        def log_q(x):
            ax = alpha_k(x)
            return (math.lgamma(ax) - ax * log_b + math.lgamma(0.5 * (n - 1))
                    + math.lgamma(x + 0.5) - math.lgamma(0.5 * (n - 1) + x + 0.5))

        lq0 = log_q(0)

        def coef(j):
            return log_q(j) - lq0 + zeta(alpha_k(j)) - zeta(a0) - math.lgamma(2 * j + 1)
        return coef

    if representation is CfRepresentation.GAMMA_RATIO:
        def coef(k):
            log_gamma_k = (math.lgamma(half) - 0.5 * math.log(math.pi) - k / s * log_b
                           + math.lgamma(k + 0.5) + math.lgamma(alpha_k(k))
                           - math.lgamma(k + half) - lg_a0)
            return log_gamma_k + zeta(alpha_k(k)) - zeta(a0) - math.lgamma(2 * k + 1)
        return coef

    if representation is CfRepresentation.POCHHAMMER:
        def coef(k):
            return (math.lgamma(alpha_k(k)) - lg_a0 - k / s * log_b - k * math.log(4.0)
                    - (math.lgamma(half + k) - math.lgamma(half)) - math.lgamma(k + 1)
                    + zeta(alpha_k(k)) - zeta(a0))
        return coef
    raise GLDomainError(f"{representation.value} is not a representation of the native generator")


def cf_series_terms(params: GLParams, n: int, u2: float,
                    representation=CfRepresentation.BETA) -> CfSeriesTerms:
    """Evaluate the characteristic-generator power series at ``u2``.

    Raises
    ------
    GLConvergenceError
        When the terms grow, overflow, or cancel beyond double precision;
        the quadrature form still applies there.
    """
    n = params.check_dimension(n)
    u2 = float(u2)
    if not (u2 >= 0 and math.isfinite(u2)):
        raise GLDomainError(f"u2 must be finite and >= 0, got {u2}")
    rep = CfRepresentation(representation)
    return _sum_alternating(_log_coefficients(params, n, rep), u2, rep)


def _sphere_kernel(n: int, x):
    """Characteristic generator of the uniform law on the sphere in ``R^n``."""
    x = np.asarray(x, dtype=float)
    if n == 1:
        return np.cos(np.sqrt(x))
    nu = 0.5 * n - 1.0
    root = np.sqrt(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = math.gamma(0.5 * n) * (0.5 * root) ** (-nu) * jv(nu, root)
    return np.where(x < 1e-300, 1.0, out)


def _oscillatory_semi_infinite(f, period, cfg=QuadratureConfig(1e-12, 1e-16, 2000),
                               max_panels=200000):
    """``int_0^inf f`` for an oscillating, decaying ``f`` by summing panels of width ``period``.

    Stops once three consecutive panel contributions are negligible next to
    the running total and the integrand envelope is spent.
    """
    total, quiet, lo = 0.0, 0, 0.0
    scale = 0.0
    for _ in range(max_panels):
        piece = integrate_interval(f, lo, lo + period, cfg)
        total += piece
        scale = max(scale, abs(piece))
        lo += period
        quiet = quiet + 1 if abs(piece) <= 1e-17 * max(scale, 1e-300) else 0
        if quiet >= 3:
            return total
    raise GLConvergenceError("oscillatory integral did not settle", estimate=total)


def _quadrature_generator(params: GLParams, n: int, u2: float) -> float:
    """``E Omega_n(u2 R^2)`` integrated over the radius density."""
    if u2 == 0.0:
        return 1.0
    z = 0.5 * generator_moment(params, 0.5 * n - 1.0)
    omega = math.sqrt(u2)

    def integrand(v):
        with np.errstate(divide="ignore", invalid="ignore"):
            log_w = log_density_generator(params, v * v)
            if n != 1:
                log_w = log_w + (n - 1) * np.log(v)
            return _sphere_kernel(n, u2 * v * v) * np.exp(log_w)

    period = min(math.pi / omega, 8.0 * math.sqrt(params.a ** (-1.0 / params.s1)))
    return _oscillatory_semi_infinite(integrand, period) / z


def characteristic_generator(params: GLParams, n: int, u2: float, method=None) -> float:
    """Characteristic generator ``phi(u2)`` of the ``n``-dimensional law.

    ``method`` is one of :class:`CfRepresentation`'s native forms or
    ``"quadrature"``.  The default is the Beta-weighted series for
    ``n > 1`` and quadrature for ``n = 1``.
    """
    n = params.check_dimension(n)
    u2 = float(u2)
    if not (u2 >= 0 and math.isfinite(u2)):
        raise GLDomainError(f"u2 must be finite and >= 0, got {u2}")
    if u2 == 0.0:
        return 1.0
    if method is None:
        method = "quadrature" if n == 1 else CfRepresentation.BETA
    if method == "quadrature":
        return _quadrature_generator(params, n, u2)
    return cf_series_terms(params, n, u2, method).value


def characteristic_function(params: GLParams, ls: LocationScale, t, method=None) -> complex:
    """``psi(t) = exp(i t^T mu) phi(t^T Sigma t)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (ls.n,):
        raise GLDomainError(f"t must have length {ls.n}")
    u2 = float(t @ ls.sigma @ t)
    phase = float(t @ ls.mu)
    return complex(np.exp(1j * phase) * characteristic_generator(params, ls.n, max(u2, 0.0), method))


# ---------------------------------------------------------------------------
# transformed laws


def _check_transform_params(params: GLParams):
    if not (params.s1 == 1.0 and params.s2 == 1.0 and params.N >= 1
            and float(params.N).is_integer()):
        raise GLDomainError("transformed characteristic functions need s1 = s2 = 1 and integer N >= 1")


def _log_marginal_moment(params: GLParams, n: int, m: int, omega: int, zeta: _ZetaCache) -> float:
    """``log int_0^inf t^(m/2 + omega - 1) ghat_m(t) dt`` via the collapsed triple sum."""
    k = 0.5 * (n - m)
    big_n = int(params.N)
    shift = 0.5 * n + big_n - 1 + omega
    inner = 0.0
    for j in range(big_n):
        inner += math.exp(math.lgamma(big_n) - math.lgamma(j + 1) - math.lgamma(big_n - j)
                          + math.lgamma(k + j) + math.lgamma(0.5 * m + omega + big_n - j - 1))
    return math.log(inner) - shift * math.log(params.b) + zeta(shift)


def _transformed_log_coefficients(params: GLParams, n: int, m: int, representation):
    zeta = _ZetaCache(params)
    lm0 = _log_marginal_moment(params, n, m, 0, zeta)
    half = 0.5 * m

    def ratio(w):
        return _log_marginal_moment(params, n, m, w, zeta) - lm0

    if representation is CfRepresentation.TRANSFORMED_BETA:
        if m < 2:
            raise GLDomainError("the Beta-weighted transformed form needs m > 1")

        def coef(w):
            return (math.lgamma(w + 0.5) - math.lgamma(0.5 * (m - 1) + w + 0.5)
                    - math.lgamma(0.5) + math.lgamma(half) + ratio(w) - math.lgamma(2 * w + 1))
        return coef
    if representation is CfRepresentation.TRANSFORMED_GAMMA_RATIO:
        def coef(w):
            return (math.lgamma(half) + math.lgamma(w + 0.5) - 0.5 * math.log(math.pi)
                    - math.lgamma(half + w) + ratio(w) - math.lgamma(2 * w + 1))
        return coef
    if representation is CfRepresentation.TRANSFORMED_POCHHAMMER:
        def coef(w):
            return (ratio(w) - w * math.log(4.0) - (math.lgamma(half + w) - math.lgamma(half))
                    - math.lgamma(w + 1))
        return coef
    raise GLDomainError(f"{representation} is not a transformed-law representation")


def transformed_generator(params: GLParams, n: int, m: int, u2: float, method=None) -> float:
    """Characteristic generator of an ``m``-dimensional linear image of the ``n``-dimensional law.

    For ``m = 1`` the default is oscillatory quadrature of the marginal
    generator; for ``m > 1`` it is the Beta-weighted triple series in
    which the inner zeta sum has been collapsed.
    """
    n = params.check_dimension(n)
    _check_transform_params(params)
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= n:
        raise GLDomainError(f"need 1 <= m <= n, got m={m}")
    m = int(m)
    u2 = float(u2)
    if not (u2 >= 0 and math.isfinite(u2)):
        raise GLDomainError(f"u2 must be finite and >= 0, got {u2}")
    if u2 == 0.0:
        return 1.0
    if m == n:
        return characteristic_generator(params, n, u2, method)
    if method is None:
        method = "quadrature" if m == 1 else CfRepresentation.TRANSFORMED_BETA
    if method == "quadrature":
        gen = marginal_generator(params, n, m, "series")
        log_c = gen.log_constant(m)
        omega = math.sqrt(u2)

        def integrand(v):
            v = np.asarray(v, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                radial = np.exp(log_c + (m - 1) * np.log(v)) * gen(v * v) if m > 1 else \
                    math.exp(log_c) * gen(v * v)
            return _sphere_kernel(m, u2 * v * v) * radial

        surface = 2.0 * math.pi ** (0.5 * m) / math.gamma(0.5 * m)
        period = min(math.pi / omega, 8.0 / math.sqrt(params.a))
        return surface * _oscillatory_semi_infinite(integrand, period,
                                                    QuadratureConfig(1e-11, 1e-15, 2000))
    rep = CfRepresentation(method)
    return _sum_alternating(_transformed_log_coefficients(params, n, m, rep), u2, rep).value


def transformed_cf(spec: TransformedSpec, params: GLParams, n: int, m: int, t, method=None) -> complex:
    """Characteristic function of ``Y = B X + b`` at ``t`` in ``R^m``."""
    if spec.m != m:
        raise GLDomainError(f"spec describes an {spec.m}-dimensional law, not {m}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (m,):
        raise GLDomainError(f"t must have length {m}")
    u2 = float(t @ spec.sigma_t @ t)
    phase = float(t @ spec.mu_t)
    return complex(np.exp(1j * phase) * transformed_generator(params, n, m, max(u2, 0.0), method))


# ---------------------------------------------------------------------------
# local dependence


@dataclass(frozen=True)
class LocalDependenceParts:
    covariance: float
    variance: float
    i_hat: float
    c_marginal: float


def _check_dependence(params: GLParams, rho: float):
    _check_transform_params(params)
    params.check_dimension(2)
    if not -1.0 < rho < 1.0:
        raise GLDomainError(f"rho must lie in (-1, 1), got {rho}")


def local_dependence_parts(params: GLParams, rho: float, method: str = "series") -> LocalDependenceParts:
    """Covariance, variance and the integral ``I = int_0^inf t^2 ghat_1(t^2) dt``.

    The bivariate law has ``mu = 0`` and unit-diagonal ``Sigma`` with
    off-diagonal ``rho``.  The variance is ``2 C I`` where ``C`` is the
    constant of the one-dimensional marginal generator, which equals the
    bivariate ``C_2``.

    ``method="series"`` computes ``I`` as a double sum whose inner
    alternating sum is a single zeta value; ``"quadrature"`` integrates
    the marginal generator directly.
    """
    _check_dependence(params, rho)
    big_n = int(params.N)
    ab = params.a / params.b
    cov = (big_n / (2.0 * params.b)
           * phi_star(-1.0, big_n + 1.0, ab, 2.0 * params.r)
           / phi_star(-1.0, float(big_n), ab, 2.0 * params.r)) * rho
    c_marg = math.exp(log_normalizing_constant(params, 2))
    if method == "series":
        inner = 0.5 * phi_star(-1.0, big_n + 1.0, ab, 2.0 * params.r)
        outer = 0.0
        for j in range(big_n):
            outer += math.exp(math.lgamma(big_n) - math.lgamma(j + 1) - math.lgamma(big_n - j)
                              + math.lgamma(0.5 + j) + math.lgamma(big_n - j + 0.5)
                              - (big_n + 1) * math.log(params.b))
        i_hat = outer * inner
    elif method == "quadrature":
        gen = marginal_generator(params, 2, 1, "series")
        i_hat = integrate_semi_infinite(lambda t: t * t * gen(t * t),
                                        QuadratureConfig(1e-11, 1e-15, 2000))
    else:
        raise GLDomainError(f"unknown method {method!r}")
    return LocalDependenceParts(cov, 2.0 * c_marg * i_hat, i_hat, c_marg)


def local_dependence(params: GLParams, rho: float, x, y, method: str = "series"):
    """Local dependence ``H(x, y)`` of the standardized bivariate law.

    ``H = (Cov + rho^2 x y) / (sqrt(Var + rho^2 y^2) sqrt(Var + rho^2 x^2))``
    using ``E(Y | X = x) = rho x`` and ``E(X | Y = y) = rho y``.
    """
    parts = local_dependence_parts(params, rho, method)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = rho * rho
    out = ((parts.covariance + r2 * x * y)
           / (np.sqrt(parts.variance + r2 * y * y) * np.sqrt(parts.variance + r2 * x * x)))
    return float(out) if np.ndim(out) == 0 else out
