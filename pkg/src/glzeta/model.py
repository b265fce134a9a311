"""The GL generator family and its densities.

A GL law on R^n has density

    f(x) = C_n |Sigma|^{-1/2} g((x - mu)^T Sigma^{-1} (x - mu))

with the six-parameter generator

    g(t) = t^(N-1) exp(-a t^s1) / (1 + exp(-b t^s2))^(2r).

``C_n`` has a closed form in terms of ``Phi*_{2r}(-1, ., a/b)`` whenever
``s1 == s2``; a quadrature route is always available and acts as its check.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.linalg import solve_triangular

from .errors import GLDomainError
from .special import (QuadratureConfig, cumulative_integral, integrate_interval, integrate_semi_infinite,
                      phi_star)

__all__ = [
    "GLParams",
    "LocationScale",
    "Method",
    "Preset",
    "preset",
    "density_generator",
    "log_density_generator",
    "normalizing_constant",
    "log_normalizing_constant",
    "log_pdf",
    "pdf",
    "univariate_log_pdf",
    "cdf_univariate",
]

_TIGHT = QuadratureConfig(relative_tolerance=1e-13, absolute_tolerance=1e-300,
                          max_subdivisions=4000)


class Method(str, enum.Enum):
    SERIES = "series"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class GLParams:
    """Generator parameters ``(N, a, b, s1, s2, r)``.

    ``2N + n > 2`` depends on the ambient dimension ``n`` and is therefore
    checked where a dimension is supplied (see :meth:`check_dimension`).
    """

    N: float
    a: float
    b: float = 1.0
    s1: float = 1.0
    s2: float = 1.0
    r: float = 0.0

    def __post_init__(self):
        for name in ("N", "a", "b", "s1", "s2", "r"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise GLDomainError(f"{name} must be a real number, got {value!r}")
            object.__setattr__(self, name, float(value))
            if not math.isfinite(getattr(self, name)):
                raise GLDomainError(f"{name} must be finite, got {value!r}")
        for name in ("a", "b", "s1", "s2"):
            if getattr(self, name) <= 0:
                raise GLDomainError(f"{name} must be positive, got {getattr(self, name)}")
        if self.r < 0:
            raise GLDomainError(f"r must be non-negative, got {self.r}")

    @property
    def common_exponent(self) -> bool:
        return self.s1 == self.s2

    @property
    def s(self) -> float:
        """The shared exponent when ``s1 == s2``."""
        if not self.common_exponent:
            raise GLDomainError("this operation needs s1 == s2")
        return self.s1

    def check_dimension(self, n: int) -> int:
        n = _dimension(n)
        if not 2.0 * self.N + n > 2.0:
            raise GLDomainError(f"2N + n > 2 fails for N={self.N}, n={n}")
        return n

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GLParams":
        """Build from a flat mapping; a key ``s`` sets both exponents."""
        data = dict(data)
        unknown = set(data) - {"N", "a", "b", "s1", "s2", "s", "r"}
        if unknown:
            raise GLDomainError(f"unknown parameter(s): {sorted(unknown)}")
        if "s" in data:
            s = data.pop("s")
            data.setdefault("s1", s)
            data.setdefault("s2", s)
        if "N" not in data or "a" not in data:
            raise GLDomainError("parameters N and a are required")
        return cls(**data)

    def with_values(self, **changes) -> "GLParams":
        if "s" in changes:
            s = changes.pop("s")
            changes["s1"] = changes["s2"] = s
        return replace(self, **changes)


def _dimension(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise GLDomainError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


class Preset(str, enum.Enum):
    GENERALIZED_LOGISTIC = "generalized-logistic"
    NORMAL = "normal"
    EXPONENTIAL_POWER = "exponential-power"
    LAPLACE = "laplace"
    KOTZ = "kotz"
    LOGISTIC = "logistic"
    GL_TYPE_I = "gl-type-i"
    GL_TYPE_III = "gl-type-iii"
    GL_TYPE_IV = "gl-type-iv"


_PRESET_ARGS = {
    Preset.GENERALIZED_LOGISTIC: ("a", "b", "r"),
    Preset.NORMAL: (),
    Preset.EXPONENTIAL_POWER: ("a", "s1"),
    Preset.LAPLACE: (),
    Preset.KOTZ: ("N", "a", "s1"),
    Preset.LOGISTIC: (),
    Preset.GL_TYPE_I: ("r",),
    Preset.GL_TYPE_III: ("a",),
    Preset.GL_TYPE_IV: ("a", "p"),
}


def preset(name, /, **kwargs) -> GLParams:
    """Parameters of a named special case of the GL family.

    Examples
    --------
    >>> preset("normal")
    GLParams(N=1.0, a=0.5, b=1.0, s1=1.0, s2=1.0, r=0.0)
    >>> preset("gl-type-iv", a=1, p=1).r
    1.0
    """
    try:
        p = Preset(name)
    except ValueError:
        raise GLDomainError(f"unknown preset {name!r}; choose from "
                            f"{[q.value for q in Preset]}") from None
    expected = _PRESET_ARGS[p]
    extra = set(kwargs) - set(expected)
    missing = set(expected) - set(kwargs)
    if extra or missing:
        raise GLDomainError(f"preset {p.value} takes arguments {list(expected)}")
    k = {key: float(v) for key, v in kwargs.items()}
    if p is Preset.GENERALIZED_LOGISTIC:
        return GLParams(N=1, a=k["a"], b=k["b"], r=k["r"])
    if p is Preset.NORMAL:
        return GLParams(N=1, a=0.5)
    if p is Preset.EXPONENTIAL_POWER:
        return GLParams(N=1, a=k["a"], s1=k["s1"], s2=k["s1"])
    if p is Preset.LAPLACE:
        return GLParams(N=1, a=math.sqrt(2.0), s1=0.5, s2=0.5)
    if p is Preset.KOTZ:
        return GLParams(N=k["N"], a=k["a"], s1=k["s1"], s2=k["s1"])
    if p is Preset.LOGISTIC:
        return GLParams(N=1, a=1, b=1, r=1)
    if p is Preset.GL_TYPE_I:
        return GLParams(N=1, a=1, b=1, r=k["r"])
    if p is Preset.GL_TYPE_III:
        return GLParams(N=1, a=k["a"], b=1, r=k["a"])
    if k["p"] <= 0:
        raise GLDomainError(f"GL type IV needs p > 0, got {k['p']}")
    return GLParams(N=1, a=k["a"], b=1, r=(k["p"] + k["a"]) / 2.0)


# ---------------------------------------------------------------------------
# generator


def log_density_generator(params: GLParams, t):
    """``log g(t)`` for array ``t >= 0``; no domain checks.

    ``log1p(exp(-b t^s2))`` is used for the logistic factor so that huge
    ``b t^s2`` simply drops the factor instead of overflowing.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        out = -params.a * t ** params.s1
        if params.N != 1.0:
            out = out + (params.N - 1.0) * np.log(t)
        if params.r != 0.0:
            out = out - 2.0 * params.r * np.log1p(np.exp(-params.b * t ** params.s2))
    return out


def density_generator(params: GLParams, t):
    """Generator ``g(t)``.

    Raises
    ------
    GLDomainError
        For ``t < 0`` or, when ``N < 1``, at the pole ``t = 0``.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise GLDomainError("generator argument must be finite and non-negative")
    if params.N < 1 and np.any(arr == 0):
        raise GLDomainError("generator has a pole at t = 0 when N < 1")
    out = np.exp(log_density_generator(params, arr))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# normalizing constants


def _coerce_method(method, params):
    if method is None:
        return Method.SERIES if params.common_exponent else Method.QUADRATURE
    try:
        return Method(method)
    except ValueError:
        raise GLDomainError(f"unknown method {method!r}") from None


def radial_scale(params: GLParams) -> float:
    """Rough location of the generator's mass on the t axis, used to rescale quadratures."""
    return params.a ** (-1.0 / params.s1)


def generator_moment(params: GLParams, power: float, cfg: QuadratureConfig = _TIGHT) -> float:
    """``int_0^inf x^power g(x) dx`` by quadrature."""
    c = radial_scale(params)

    def integrand(y):
        x = c * y
        with np.errstate(divide="ignore", under="ignore"):
            return np.exp(power * np.log(x) + log_density_generator(params, x)) * c

    return integrate_semi_infinite(integrand, cfg)


@lru_cache(maxsize=4096)
def _log_cn(params: GLParams, n: int, method: Method) -> float:
    half = 0.5 * n
    if method is Method.SERIES:
        s = params.s
        alpha = (params.N + half - 1.0) / s
        zeta = phi_star(-1.0, alpha, params.a / params.b, 2.0 * params.r)
        return (math.lgamma(half) + alpha * math.log(params.b) + math.log(s)
                - math.lgamma(alpha) - half * math.log(math.pi) - math.log(zeta))
    integral = generator_moment(params, half - 1.0)
    return math.lgamma(half) - half * math.log(math.pi) - math.log(integral)


def log_normalizing_constant(params: GLParams, n: int, method=None) -> float:
    n = params.check_dimension(n)
    return _log_cn(params, n, _coerce_method(method, params))


def normalizing_constant(params: GLParams, n: int, method=None) -> float:
    """Normalizing constant ``C_n`` of the ``n``-dimensional density.

    Parameters
    ----------
    params : GLParams
    n : int
        Ambient dimension; ``2N + n > 2`` is required.
    method : {"series", "quadrature"}, optional
        ``"series"`` uses the zeta closed form and needs ``s1 == s2``;
        ``"quadrature"`` integrates ``x^(n/2-1) g(x)`` directly.  By default
        the series is used whenever it applies.

    Returns
    -------
    float
    """
    return math.exp(log_normalizing_constant(params, n, method))


# ---------------------------------------------------------------------------
# location and scale


class LocationScale:
    """Location ``mu`` and positive-definite scale ``Sigma`` with a Cholesky factor.

    ``sigma_factor`` is the lower-triangular ``L`` with ``Sigma = L L^T``.
    The matrix ``A`` of the stochastic representation is ``L^T``.
    """

    __slots__ = ("mu", "sigma", "sigma_factor", "sigma_inv", "log_det_sigma")

    def __init__(self, mu, sigma):
        mu = np.atleast_1d(np.asarray(mu, dtype=float)).copy()
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float)).copy()
        n = mu.shape[0]
        if mu.ndim != 1 or sigma.shape != (n, n):
            raise GLDomainError(f"mu has length {n} but sigma has shape {sigma.shape}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise GLDomainError("mu and sigma must be finite")
        if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=0.0):
            raise GLDomainError("sigma must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        try:
            factor = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise GLDomainError("sigma must be positive definite") from None
        inv_factor = solve_triangular(factor, np.eye(n), lower=True)
        for arr in (mu, sigma, factor):
            arr.setflags(write=False)
        sigma_inv = inv_factor.T @ inv_factor
        sigma_inv.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "sigma_factor", factor)
        object.__setattr__(self, "sigma_inv", sigma_inv)
        object.__setattr__(self, "log_det_sigma", float(2.0 * np.sum(np.log(np.diag(factor)))))

    def __setattr__(self, name, value):
        raise AttributeError("LocationScale is immutable")

    @classmethod
    def standard(cls, n: int) -> "LocationScale":
        return cls(np.zeros(n), np.eye(n))

    @classmethod
    def univariate(cls, mu: float, sigma2: float) -> "LocationScale":
        if not sigma2 > 0:
            raise GLDomainError(f"sigma2 must be positive, got {sigma2}")
        return cls([mu], [[sigma2]])

    @property
    def n(self) -> int:
        return self.mu.shape[0]

    def quadratic_form(self, x):
        """``(x - mu)^T Sigma^{-1} (x - mu)`` for a point or a stack of rows."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        rows = np.atleast_2d(x)
        if rows.shape[-1] != self.n:
            raise GLDomainError(f"point has dimension {rows.shape[-1]}, expected {self.n}")
        z = solve_triangular(self.sigma_factor, (rows - self.mu).T, lower=True)
        q = np.sum(z * z, axis=0)
        return float(q[0]) if single else q

    def __repr__(self):
        return f"LocationScale(mu={self.mu.tolist()}, sigma={self.sigma.tolist()})"


# ---------------------------------------------------------------------------
# densities


def log_pdf(params: GLParams, ls: LocationScale, x, method=None):
    """Log density at ``x`` (one point or rows of points).

    At ``q = 0`` with ``N < 1`` the generator has a pole and ``+inf`` would
    be the honest value; ``-inf`` is returned instead as a pole flag, so a
    likelihood that touches the pole is rejected rather than rewarded.
    """
    n = params.check_dimension(ls.n)
    log_c = log_normalizing_constant(params, n, method)
    q = np.asarray(ls.quadratic_form(x))
    out = log_c - 0.5 * ls.log_det_sigma + log_density_generator(params, q)
    if params.N < 1:
        out = np.where(q == 0, -np.inf, out)
    return float(out) if out.ndim == 0 else out


def pdf(params: GLParams, ls: LocationScale, x, method=None):
    return np.exp(log_pdf(params, ls, x, method))


def univariate_log_pdf(params: GLParams, mu: float, sigma2: float, x, method=None):
    """Vectorized log density of the one-dimensional law with scale ``sigma2``."""
    if not sigma2 > 0:
        raise GLDomainError(f"sigma2 must be positive, got {sigma2}")
    log_c = log_normalizing_constant(params, 1, method)
    x = np.asarray(x, dtype=float)
    q = (x - mu) ** 2 / sigma2
    out = log_c - 0.5 * math.log(sigma2) + log_density_generator(params, q)
    if params.N < 1:
        out = np.where(q == 0, -np.inf, out)
    return out


def cdf_univariate(params: GLParams, mu: float, sigma2: float, x,
                   cfg: QuadratureConfig = QuadratureConfig(1e-12, 1e-15, 4000)):
    """CDF of the one-dimensional law at ``x`` (scalar or array).

    By symmetry ``F(x) = 1/2 + sign(z) C_1 int_0^|z| g(w^2) dw`` with
    ``z = (x - mu) / sqrt(sigma2)``.  Array input is handled by sorting the
    ``|z|`` values and integrating across consecutive gaps.
    """
    if not sigma2 > 0:
        raise GLDomainError(f"sigma2 must be positive, got {sigma2}")
    c1 = normalizing_constant(params, 1)
    x = np.asarray(x, dtype=float)
    z = (x - mu) / math.sqrt(sigma2)
    flat = z.ravel()
    mag = np.abs(flat)
    order = np.argsort(mag)

    def integrand(w):
        with np.errstate(divide="ignore"):
            return np.exp(log_density_generator(params, w * w))

    finite = np.isfinite(mag[order])
    half_mass = np.full_like(mag, 0.5)
    knots = np.concatenate([[0.0], mag[order][finite]])
    half_mass[order[finite]] = c1 * cumulative_integral(integrand, knots, cfg)[1:]
    out = np.clip(0.5 + np.sign(flat) * np.minimum(half_mass, 0.5), 0.0, 1.0)
    out = out.reshape(z.shape)
    return float(out) if out.ndim == 0 else out
