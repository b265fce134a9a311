"""Special functions and quadrature used by every density formula.

The generalized Hurwitz-Lerch zeta function

    Phi*_v(z, s, a) = 1/Gamma(v) * sum_{n>=0} Gamma(v+n)/n! * z**n / (n+a)**s

has two evaluation routes here: :func:`phi_star` sums the series (with
convergence acceleration where plain truncation is hopeless) and
:func:`phi_star_integral` evaluates the Laplace-type integral

    Phi*_v(z, s, a) = 1/Gamma(s) * int_0^inf t**(s-1) e**(-a t) / (1 - z e**(-t))**v dt.

The integral is the independent oracle for the series.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln, polygamma

from .errors import GLConvergenceError, GLDomainError

__all__ = [
    "QuadratureConfig",
    "ZetaArgs",
    "log_gamma",
    "beta",
    "log_beta",
    "phi_star",
    "phi_star_integral",
    "integrate_interval",
    "integrate_semi_infinite",
]

SERIES_RTOL = 1e-15
SERIES_MAX_TERMS = 1_000_000
_BLOCK = 256
_LEVIN_MAX_ORDER = 60

_GL_LO_X, _GL_LO_W = np.polynomial.legendre.leggauss(10)
_GL_HI_X, _GL_HI_W = np.polynomial.legendre.leggauss(20)
_NODES = np.concatenate([_GL_LO_X, _GL_HI_X])


@dataclass(frozen=True)
class QuadratureConfig:
    relative_tolerance: float = 1e-10
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise GLDomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) < 1:
            raise GLDomainError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class ZetaArgs:
    """Arguments ``(z, s, a, v)`` of ``Phi*_v(z, s, a)`` restricted to reals."""

    z: float
    s: float
    a: float
    v: float

    def __post_init__(self):
        z, s, a, v = self.z, self.s, self.a, self.v
        if not all(math.isfinite(x) for x in (z, s, a, v)):
            raise GLDomainError(f"non-finite zeta argument in {self}")
        if not -1.0 <= z <= 1.0:
            raise GLDomainError(f"|z| must be <= 1, got z={z}")
        if a <= 0:
            raise GLDomainError(f"a must be positive, got a={a}")
        if v < 0:
            raise GLDomainError(f"v must be non-negative, got v={v}")
        if z == 1.0 and not s > v:
            # terms behave like n^(v-1-s), so the series converges iff s > v
            raise GLDomainError(f"z=1 requires s > v, got s={s}, v={v}")
        if z == -1.0 and v > 0 and not s > 0:
            raise GLDomainError(f"z=-1 requires s > 0, got s={s}")


def log_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise GLDomainError(f"log_gamma requires finite x > 0, got {x}")
    return math.lgamma(x)


def log_beta(x, y):
    return log_gamma(x) + log_gamma(y) - log_gamma(x + y)


def beta(x, y):
    """Beta function ``B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)``."""
    return math.exp(log_beta(x, y))


# ---------------------------------------------------------------------------
# quadrature


def _as_vectorized(f):
    def g(x):
        out = f(x)
        out = np.asarray(out, dtype=float)
        if out.shape != x.shape:
            out = np.array([float(f(xi)) for xi in x.ravel()]).reshape(x.shape)
        return out

    return g


def _panels(f, lo, hi):
    """Return (coarse, fine) Gauss-Legendre estimates on each panel."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = f(x)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise GLConvergenceError(f"integrand is not finite at x={bad!r}")
    k = len(_GL_LO_X)
    coarse = half * (y[:, :k] @ _GL_LO_W)
    fine = half * (y[:, k:] @ _GL_HI_W)
    return coarse, fine


def integrate_interval(f: Callable, lo: float, hi: float,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                       initial_panels: int = 4) -> float:
    """Adaptive integral of a vectorized ``f`` over the finite interval ``[lo, hi]``.

    Panels are bisected until the summed error estimate drops below
    ``max(absolute_tolerance, relative_tolerance * |integral|)``.  Integrable
    endpoint singularities are resolved purely by refinement.

    Raises
    ------
    GLConvergenceError
        If the tolerance is not met within ``cfg.max_subdivisions`` panels.
    """
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate_interval(f, hi, lo, cfg, initial_panels)
    f = _as_vectorized(f)
    edges = np.linspace(lo, hi, initial_panels + 1)
    los, his = edges[:-1], edges[1:]
    coarse, fine = _panels(f, los, his)
    errs = np.abs(fine - coarse)
    heap = [(-e, a, b, v) for e, a, b, v in zip(errs, los, his, fine)]
    heapq.heapify(heap)
    total = float(np.sum(fine))
    err = float(np.sum(errs))
    width = hi - lo
    while True:
        budget = max(cfg.absolute_tolerance, cfg.relative_tolerance * abs(total))
        if err <= budget:
            return total
        if len(heap) >= cfg.max_subdivisions:
            raise GLConvergenceError(
                f"quadrature did not reach tolerance within {cfg.max_subdivisions} panels",
                estimate=total, error=err)
        # split every panel whose error exceeds its width share of the budget
        chosen = []
        rest = []
        while heap and len(chosen) < 64:
            item = heapq.heappop(heap)
            if -item[0] > budget * (item[2] - item[1]) / width or not chosen:
                chosen.append(item)
            else:
                rest.append(item)
                break
        for item in rest:
            heapq.heappush(heap, item)
        a = np.array([c[1] for c in chosen])
        b = np.array([c[2] for c in chosen])
        m = 0.5 * (a + b)
        new_lo = np.concatenate([a, m])
        new_hi = np.concatenate([m, b])
        coarse, fine = _panels(f, new_lo, new_hi)
        new_err = np.abs(fine - coarse)
        for c in chosen:
            total -= c[3]
            err += c[0]
        total += float(np.sum(fine))
        err += float(np.sum(new_err))
        for e, a_, b_, v in zip(new_err, new_lo, new_hi, fine):
            heapq.heappush(heap, (-e, a_, b_, v))


def cumulative_integral(f: Callable, knots, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Running integrals ``int_{knots[0]}^{knots[i]} f`` at increasing ``knots``.

    Every gap is first tried with one vectorized Gauss-Legendre pair.  Gaps
    whose error estimate is too large are redone by :func:`integrate_interval`.
    This is what makes CDFs at many sample points affordable.
    """
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or np.any(np.diff(knots) < 0):
        raise GLDomainError("knots must be a non-decreasing one-dimensional array")
    if knots.size < 2:
        return np.zeros(knots.size)
    f = _as_vectorized(f)
    lo, hi = knots[:-1], knots[1:]
    live = hi > lo
    pieces = np.zeros(lo.size)
    if np.any(live):
        with np.errstate(all="ignore"):
            mid = 0.5 * (lo[live] + hi[live])
            half = 0.5 * (hi[live] - lo[live])
            y = f(mid[:, None] + half[:, None] * _NODES[None, :])
        k = len(_GL_LO_X)
        coarse = half * (y[:, :k] @ _GL_LO_W)
        fine = half * (y[:, k:] @ _GL_HI_W)
        ok = np.isfinite(fine) & np.isfinite(coarse)
        ok &= np.abs(fine - coarse) <= np.maximum(cfg.absolute_tolerance, cfg.relative_tolerance * np.abs(fine))
        vals = np.where(ok, fine, 0.0)
        idx = np.flatnonzero(live)
        for j in np.flatnonzero(~ok):
            vals[j] = integrate_interval(f, lo[idx[j]], hi[idx[j]], cfg)
        pieces[live] = vals
    return np.concatenate([[0.0], np.cumsum(pieces)])


def integrate_semi_infinite(f: Callable, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                            lower: float = 0.0) -> float:
    """Integral of a vectorized ``f`` over ``(lower, inf)``.

    Uses ``t = lower + x / (1 - x)`` to map onto ``(0, 1)`` and then
    :func:`integrate_interval`.
    """
    f = _as_vectorized(f)

    def mapped(x):
        one_minus = 1.0 - x
        t = lower + x / one_minus
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            y = f(t) / (one_minus * one_minus)
        # the map sends x -> 1 to t = inf where the integrand has decayed
        y = np.where(np.isinf(t), 0.0, y)
        return y

    return integrate_interval(mapped, 0.0, 1.0, cfg, initial_panels=8)


# ---------------------------------------------------------------------------
# generalized Hurwitz-Lerch zeta


def _log_coefficients(v, start, count):
    """log of Gamma(v+n) / (Gamma(v) n!) for n = start .. start+count-1.

    Built from the ratio recurrence so Gamma(v) itself is never formed.
    """
    n = np.arange(start, start + count, dtype=float)
    if start == 0:
        steps = np.log((v + n[:-1]) / (n[:-1] + 1.0))
        out = np.empty(count)
        out[0] = 0.0
        out[1:] = np.cumsum(steps)
        return out
    return gammaln(v + n) - gammaln(v) - gammaln(n + 1.0)


def _series_terms(z, s, a, v, start, count):
    n = np.arange(start, start + count, dtype=float)
    log_mag = _log_coefficients(v, start, count) - s * np.log(n + a)
    if z == 0:
        out = np.zeros(count)
        if start == 0:
            out[0] = math.exp(log_mag[0])
        return out
    log_mag = log_mag + n * math.log(abs(z))
    sign = np.where((n % 2 == 1) & (z < 0), -1.0, 1.0)
    with np.errstate(under="ignore"):
        return sign * np.exp(log_mag)


def _plain_sum(terms, partial, rtol):
    """Accumulate ``terms`` onto ``partial``.

    Returns (new_partial, converged) where convergence means three
    consecutive terms each fell below ``rtol`` times the running sum.
    """
    sums = partial + np.cumsum(terms)
    small = np.abs(terms) < rtol * np.abs(sums)
    run = 0
    for i, flag in enumerate(small):
        run = run + 1 if flag else 0
        if run >= 3:
            return float(sums[i]), True
    return float(sums[-1]), False


def _levin_t(terms):
    """Levin t-transform of the series with the given leading terms.

    Returns the accelerated value.  Works for alternating series including
    the Abel-summable divergent ones met at ``z = -1``.
    """
    partial = np.cumsum(terms)
    best, best_diff, prev = None, math.inf, None
    k_max = min(len(terms) - 1, _LEVIN_MAX_ORDER)
    log_fact = gammaln(np.arange(k_max + 2) + 1.0)
    rising = 0
    for k in range(1, k_max + 1):
        j = np.arange(k + 1, dtype=float)
        binom = np.exp(log_fact[k] - log_fact[:k + 1] - log_fact[k::-1])
        c = np.where(j % 2 == 1, -1.0, 1.0) * binom * ((1.0 + j) / (1.0 + k)) ** (k - 1)
        w = terms[:k + 1]
        value = float(np.sum(c * partial[:k + 1] / w) / np.sum(c / w))
        if prev is not None:
            diff = abs(value - prev)
            if diff < best_diff:
                best, best_diff, rising = value, diff, 0
            else:
                rising += 1
            if diff <= 1e-15 * abs(value) or (best_diff < 1e-11 * abs(best) and rising >= 4):
                break
        prev = value
    if best is None or not best_diff <= 1e-8 * abs(best):
        raise GLConvergenceError("Levin acceleration did not settle",
                                 estimate=best if best is not None else math.nan,
                                 error=best_diff)
    return best


def _log_term_derivatives(s, a, v, x):
    """First three derivatives of log(term) in the continuous index x."""
    d1 = polygamma(0, v + x) - polygamma(0, x + 1.0) - s / (x + a)
    d2 = polygamma(1, v + x) - polygamma(1, x + 1.0) + s / (x + a) ** 2
    d3 = polygamma(2, v + x) - polygamma(2, x + 1.0) - 2.0 * s / (x + a) ** 3
    return float(d1), float(d2), float(d3)


def _log_gamma_ratio(x, v):
    """``log Gamma(x + v) - log Gamma(x + 1)`` without cancellation at large ``x``.

    Beyond ``x = 1e4`` the difference of the Stirling series is used:
    ``(v - 1) log x + sum_k (-1)^k (B_k(v) - B_k(1)) / (k (k - 1) x^(k-1))``
    with Bernoulli polynomials up to degree 5.
    """
    x = np.asarray(x, dtype=float)
    small = x < 1e4
    out = np.empty_like(x)
    out[small] = gammaln(x[small] + v) - gammaln(x[small] + 1.0)
    big = x[~small]
    b2 = v * v - v
    b3 = v ** 3 - 1.5 * v * v + 0.5 * v
    b4 = v ** 4 - 2 * v ** 3 + v * v
    b5 = v ** 5 - 2.5 * v ** 4 + 5.0 / 3.0 * v ** 3 - v / 6.0
    inv = 1.0 / big
    out[~small] = ((v - 1.0) * np.log(big)
                   + inv * (b2 / 2.0 + inv * (-b3 / 6.0 + inv * (b4 / 12.0 - inv * b5 / 20.0))))
    return out


def _euler_maclaurin_tail(s, a, v, start, cfg):
    """sum_{n >= start} of the z = 1 terms via Euler-Maclaurin."""
    lg_v = gammaln(v)

    def log_term(x):
        return _log_gamma_ratio(x, v) - lg_v - s * np.log(x + a)

    f0 = math.exp(float(log_term(np.array(start, dtype=float))))
    # x = start e^w turns the algebraic tail x^(v-1-s) into exp(-(s - v) w)
    log_start = math.log(start)
    def integrand(w):
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(log_term(start * np.exp(w)) + log_start + w)
        # start e^w overflows only far into the exponentially small tail
        return np.where(np.isfinite(out), out, 0.0)

    integral = integrate_semi_infinite(integrand, cfg)
    d1, d2, d3 = _log_term_derivatives(s, a, v, float(start))
    f1 = f0 * d1
    f3 = f0 * (d1 ** 3 + 3 * d1 * d2 + d3)
    return integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0


def _coerce(z, s, a, v):
    if isinstance(z, ZetaArgs):
        return z
    if s is None or a is None or v is None:
        raise TypeError("pass a ZetaArgs or all four of z, s, a, v")
    return ZetaArgs(float(z), float(s), float(a), float(v))


def phi_star(z, s=None, a=None, v=None, rtol: float = SERIES_RTOL) -> float:
    """Generalized Hurwitz-Lerch zeta ``Phi*_v(z, s, a)`` from its series.

    ``v = 0`` returns ``a**-s`` without summation.  Otherwise terms are
    accumulated until three in a row fall below ``rtol`` relative to the
    running sum.  When that cannot happen in reasonable time the series is
    accelerated: Levin's t-transform for ``z < 0`` (which also assigns the
    Abel value to the divergent alternating series at ``z = -1``) and an
    Euler-Maclaurin tail for ``z = 1``.

    Parameters
    ----------
    z : float in [-1, 1] or ZetaArgs
        Either the first argument or a complete :class:`ZetaArgs`.
    s : float
    a : float > 0
    v : float >= 0

    Raises
    ------
    GLDomainError
        Outside the domain described on :class:`ZetaArgs`.
    GLConvergenceError
        If neither plain summation nor acceleration converges; the
        exception carries the partial sum.
    """
    args = _coerce(z, s, a, v)
    z, s, a, v = args.z, args.s, args.a, args.v
    if v == 0.0 or z == 0.0:
        return a ** (-s)

    partial = 0.0
    start = 0
    head = None
    first_block = 128
    while start < SERIES_MAX_TERMS:
        count = first_block if start == 0 else _BLOCK * 16
        terms = _series_terms(z, s, a, v, start, count)
        if head is None:
            head = terms
        partial, done = _plain_sum(terms, partial, rtol)
        if done:
            return partial
        start += count
        if z < 0:
            return _levin_t(head)
        if z == 1.0:
            tail = _euler_maclaurin_tail(s, a, v, start,
                                         QuadratureConfig(1e-12, 1e-300, 4000))
            return partial + tail
    raise GLConvergenceError(f"series for Phi*_{v}({z}, {s}, {a}) did not converge "
                             f"within {SERIES_MAX_TERMS} terms", estimate=partial)


def phi_star_integral(z, s=None, a=None, v=None,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``Phi*_v(z, s, a)`` from its integral representation.

    Requires ``s > 0`` and ``a > 0``; at ``z = 1`` the integrand behaves like
    ``t**(s-v-1)`` near zero, so ``s > v`` is needed there.
    """
    if isinstance(z, ZetaArgs):
        if isinstance(s, QuadratureConfig):
            cfg = s
        z, s, a, v = z.z, z.s, z.a, z.v
    z, s, a, v = float(z), float(s), float(a), float(v)
    if not all(math.isfinite(x) for x in (z, s, a, v)):
        raise GLDomainError("non-finite zeta argument")
    if not -1.0 <= z <= 1.0:
        raise GLDomainError(f"|z| must be <= 1, got z={z}")
    if s <= 0 or a <= 0 or v < 0:
        raise GLDomainError(f"integral form needs s > 0, a > 0, v >= 0; got s={s}, a={a}, v={v}")
    if z == 1.0 and v > 0 and not s > v:
        raise GLDomainError(f"integral form at z=1 needs s > v, got s={s}, v={v}")
    lg_s = math.lgamma(s)

    def integrand(t):
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            log_f = (s - 1.0) * np.log(t) - a * t - lg_s
            if v != 0.0:
                if z == 1.0:
                    log_f = log_f - v * np.log(-np.expm1(-t))
                else:
                    log_f = log_f - v * np.log1p(-z * np.exp(-t))
            return np.exp(log_f)

    return integrate_semi_infinite(integrand, cfg)
