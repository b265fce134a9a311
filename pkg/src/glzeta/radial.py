"""Exact sampling through the stochastic representation ``X = mu + R A^T U``.

The radius ``R`` has density ``v^(n-1) g(v^2) / Z`` on ``v >= 0`` with
``Z = int_0^inf t^(n-1) g(t^2) dt``.  Its CDF is tabulated once per
``(params, n)`` and inverted with a monotone cubic, after which draws cost
one uniform each.  ``U`` is uniform on the unit sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import GLConvergenceError, GLDomainError
from .model import GLParams, LocationScale, generator_moment, log_density_generator
from .special import QuadratureConfig, integrate_interval, integrate_semi_infinite

__all__ = [
    "RadialDistribution",
    "RandomSource",
    "random_source",
    "build_radial",
    "radial_density",
    "sample_radius",
    "sample_radii",
    "sample_sphere",
    "sample",
]

RandomSource = np.random.Generator

QUANTILE_FLOOR = 1e-12
_CFG = QuadratureConfig(relative_tolerance=1e-12, absolute_tolerance=1e-300,
                        max_subdivisions=4000)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_GL10_X, _GL10_W = np.polynomial.legendre.leggauss(10)


def random_source(seed=None, stream: int = 0) -> RandomSource:
    """A reproducible generator for ``(seed, stream)``.

    Distinct ``stream`` values give statistically independent sequences for
    the same seed, which is how parallel workers should be seeded.
    """
    seq = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(seq))


def _log_unnormalized(params, n, v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_density_generator(params, v * v)
        if n != 1:
            out = out + (n - 1) * np.log(v)
    return out


@dataclass(frozen=True, eq=False)
class RadialDistribution:
    """Tabulated law of the radius for one ``(params, n)``.

    Attributes
    ----------
    normalizer : float
        ``int_0^inf t^(n-1) g(t^2) dt``.
    grid, cdf_values : ndarray
        Increasing radii and the CDF there.
    interpolant : PchipInterpolator
        Maps probabilities back to radii.
    """

    params: GLParams
    n: int
    normalizer: float
    grid: np.ndarray = field(repr=False)
    cdf_values: np.ndarray = field(repr=False)
    interpolant: PchipInterpolator = field(repr=False)

    def density(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise GLDomainError("radius must be non-negative")
        with np.errstate(over="ignore"):
            out = np.exp(_log_unnormalized(self.params, self.n, v)) / self.normalizer
        return float(out) if out.ndim == 0 else out

    def cdf(self, v):
        """Tabulated CDF, linearly interpolated between nodes."""
        out = np.interp(v, self.grid, self.cdf_values, left=0.0, right=1.0)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, u):
        u = np.clip(np.asarray(u, dtype=float), self.cdf_values[0], self.cdf_values[-1])
        out = self.interpolant(u)
        return float(out) if out.ndim == 0 else out


def radial_density(rd: RadialDistribution, v):
    """Radius density ``v^(n-1) g(v^2) / Z``."""
    return rd.density(v)


def _mass_between(params, n, lo, hi):
    return integrate_interval(lambda v: np.exp(_log_unnormalized(params, n, v)), lo, hi, _CFG)


def _mass_above(params, n, lo):
    return integrate_semi_infinite(lambda v: np.exp(_log_unnormalized(params, n, v)), _CFG,
                                   lower=lo)


def _bracket(params, n, z, tail):
    """Radii with lower mass and upper tail each below ``tail``; plus a knee."""
    start = math.sqrt(params.a ** (-1.0 / params.s1))
    lo = start
    knee = None
    for _ in range(400):
        mass = _mass_between(params, n, 0.0, lo) / z
        if knee is None and mass <= 1e-2:
            knee = lo
        if mass <= tail:
            break
        lo *= 0.5
    else:
        raise GLConvergenceError("could not bracket the lower radius quantile")
    hi = start
    for _ in range(200):
        if _mass_above(params, n, hi) / z <= tail:
            break
        hi *= 2.0
    else:
        raise GLConvergenceError("could not bracket the upper radius quantile")
    knee = knee if knee is not None else lo
    return lo, min(max(knee, lo), hi), hi


def _tabulate(params, n, grid, z):
    """CDF at every grid node from per-interval Gauss-Legendre sums."""
    a, b = grid[:-1], grid[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def rule(x, w):
        pts = mid[:, None] + half[:, None] * x[None, :]
        return half * (np.exp(_log_unnormalized(params, n, pts)) @ w)

    fine = rule(_GL_X, _GL_W)
    coarse = rule(_GL10_X, _GL10_W)
    bad = np.abs(fine - coarse) > 1e-15 * z + 1e-12 * np.abs(fine)
    for i in np.flatnonzero(bad):
        fine[i] = _mass_between(params, n, a[i], b[i])
    first = _mass_between(params, n, 0.0, grid[0])
    cdf = (first + np.concatenate([[0.0], np.cumsum(fine)])) / z
    return np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)


@lru_cache(maxsize=64)
def build_radial(params: GLParams, n: int, nodes: int = 4096) -> RadialDistribution:
    """Tabulate the radius law for ``(params, n)``.

    The table spans the ``[1e-12, 1 - 1e-12]`` quantile range.  A quarter of
    the nodes are spaced geometrically over the whole range, which resolves
    the origin where the density may be singular or vanish like
    ``v^(n-1)``; the rest are spaced linearly from roughly the 1% quantile.
    """
    n = params.check_dimension(n)
    nodes = int(nodes)
    if nodes < 16:
        raise GLDomainError("at least 16 nodes are needed")
    z = 0.5 * generator_moment(params, 0.5 * n - 1.0)
    lo, knee, hi = _bracket(params, n, z, QUANTILE_FLOOR)
    n_geo = nodes // 4
    # geometric nodes resolve the v^(n-1) or singular behavior near 0; the
    # merge keeps whichever layout is finer at every radius
    geo = np.geomspace(lo, hi, n_geo)
    lin = np.linspace(knee, hi, nodes - n_geo)
    grid = np.unique(np.concatenate([geo, lin]))
    cdf = _tabulate(params, n, grid, z)
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    interp = PchipInterpolator(cdf[keep], grid[keep], extrapolate=False)
    grid.setflags(write=False)
    cdf.setflags(write=False)
    return RadialDistribution(params, n, z, grid, cdf, interp)


def sample_radius(rd: RadialDistribution, src: RandomSource) -> float:
    """One radius by inversion of the tabulated CDF."""
    return float(rd.quantile(src.random()))


def sample_radii(rd: RadialDistribution, src: RandomSource, count: int) -> np.ndarray:
    return np.asarray(rd.quantile(src.random(int(count))), dtype=float)


def _spheres(n, count, src):
    z = src.standard_normal((count, n))
    norms = np.linalg.norm(z, axis=1)
    while np.any(norms == 0):
        redo = norms == 0
        z[redo] = src.standard_normal((int(redo.sum()), n))
        norms = np.linalg.norm(z, axis=1)
    return z / norms[:, None]


def sample_sphere(n: int, src: RandomSource, count: int | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere in ``R^n``: normalized Gaussian vectors."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise GLDomainError(f"dimension must be a positive integer, got {n!r}")
    if count is None:
        return _spheres(int(n), 1, src)[0]
    return _spheres(int(n), int(count), src)


def sample(params: GLParams, ls: LocationScale, count: int, src: RandomSource,
           nodes: int = 4096) -> np.ndarray:
    """``count`` draws of ``mu + R L u`` as rows, with ``Sigma = L L^T``."""
    count = int(count)
    if count < 1:
        raise GLDomainError("count must be positive")
    rd = build_radial(params, ls.n, nodes)
    radii = sample_radii(rd, src, count)
    dirs = _spheres(ls.n, count, src)
    return ls.mu + radii[:, None] * (dirs @ ls.sigma_factor.T)
