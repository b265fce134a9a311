"""Maximum-likelihood fitting and goodness of fit for the univariate law.

The univariate GL law has density
``C_1 sigma^{-1} g((x - mu)^2 / sigma^2)`` with ``sigma^2 = sigma2``.  A fit
chooses which of ``N, a, b, s, r, mu, sigma2`` are free, maximizes the
log-likelihood by Nelder-Mead from several jittered starts, and reports the
AIC together with a Kolmogorov-Smirnov statistic against the fitted CDF.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize
from scipy.special import kolmogorov

from .errors import FitError, GLConvergenceError, GLDomainError
from .model import GLParams, cdf_univariate, univariate_log_pdf
from .radial import RandomSource

__all__ = [
    "Dataset",
    "DatasetError",
    "carbon_fiber_dataset",
    "load_dataset",
    "log_likelihood",
    "PARAMETER_NAMES",
    "FitConfig",
    "FitResult",
    "fit",
    "aic",
    "ks_test",
    "kolmogorov_p_value",
    "logistic_baseline_log_likelihood",
]

PARAMETER_NAMES = ("N", "a", "b", "s", "r", "mu", "sigma2")
_LOG_SPACE = frozenset({"a", "b", "s", "r", "sigma2"})
IDENTIFIABILITY_THRESHOLD = 1e-12


class DatasetError(GLDomainError):
    """A data file could not be turned into a :class:`Dataset`."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """A sorted, finite, non-empty sample with a label saying where it came from."""

    values: np.ndarray
    source: str = "memory"

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        if vals.size == 0:
            raise DatasetError(f"{self.source}: dataset is empty")
        if not np.all(np.isfinite(vals)):
            raise DatasetError(f"{self.source}: dataset holds NaN or infinite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def carbon_fiber_dataset() -> Dataset:
    """The 63 single-carbon-fiber strengths (GPa, 10 mm gauge length)."""
    text = resources.files("glzeta").joinpath("data/carbon_fiber_table1.csv").read_text()
    return _parse_csv(text, "table1")


def _parse_csv(text: str, label: str) -> Dataset:
    values = []
    seen_data = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if len(cells) != 1:
            raise DatasetError(f"{label}: line {lineno}: expected one column, found {len(cells)}")
        try:
            values.append(float(cells[0]))
        except ValueError:
            if not seen_data and not values:
                seen_data = True  # first non-comment line may be a header
                continue
            raise DatasetError(f"{label}: line {lineno}: cannot parse {cells[0]!r} as a number") from None
        seen_data = True
        if not math.isfinite(values[-1]):
            raise DatasetError(f"{label}: line {lineno}: non-finite value {cells[0]!r}")
    if not values:
        raise DatasetError(f"{label}: no numeric values found")
    return Dataset(np.array(values), label)


def _parse_json(text: str, label: str) -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{label}: line {exc.lineno}: {exc.msg}") from None
    if isinstance(doc, Mapping):
        doc = doc.get("values")
    if not isinstance(doc, list):
        raise DatasetError(f"{label}: expected a list of numbers or an object with 'values'")
    out = []
    for i, v in enumerate(doc):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise DatasetError(f"{label}: entry {i}: {v!r} is not a finite number")
        out.append(float(v))
    if not out:
        raise DatasetError(f"{label}: dataset is empty")
    return Dataset(np.array(out), label)


def load_dataset(path, format: str | None = None) -> Dataset:
    """Read one numeric column from CSV or JSON.

    Parameters
    ----------
    path : str or Path
        ``"table1"`` selects the embedded carbon-fiber sample and ``"-"``
        reads standard input.
    format : {"csv", "json"}, optional
        Inferred from the suffix when omitted (anything but ``.json`` is CSV).
        Standard input is JSON when it starts with ``[`` or ``{``.

    Raises
    ------
    DatasetError
        Unreadable, empty, or non-numeric input; the message names the line.
    """
    if str(path) == "table1":
        return carbon_fiber_dataset()
    if str(path) == "-":
        text = sys.stdin.read()
        fmt = (format or ("json" if text.lstrip()[:1] in ("[", "{") else "csv")).lower()
        return _parse_json(text, "stdin") if fmt == "json" else _parse_csv(text, "stdin")
    p = Path(path)
    fmt = (format or ("json" if p.suffix.lower() == ".json" else "csv")).lower()
    try:
        text = p.read_text()
    except OSError as exc:
        raise DatasetError(f"{p}: {exc.strerror}") from None
    if fmt == "csv":
        return _parse_csv(text, str(p))
    if fmt == "json":
        return _parse_json(text, str(p))
    raise DatasetError(f"unknown format {format!r}")


def log_likelihood(data: Dataset, params: GLParams, mu: float, sigma2: float) -> float:
    """Sum of univariate log densities; ``-inf`` when a datum sits on a pole."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    with np.errstate(divide="ignore"):
        return float(np.sum(univariate_log_pdf(params, mu, sigma2, values)))


def aic(free_count: int, log_likelihood: float) -> float:
    if isinstance(free_count, bool) or int(free_count) != free_count or free_count < 1:
        raise GLDomainError(f"free_count must be a positive integer, got {free_count!r}")
    return 2.0 * int(free_count) - 2.0 * float(log_likelihood)


def kolmogorov_p_value(statistic: float, n: int) -> float:
    """Asymptotic ``P(D_n >= statistic)``: ``Q(sqrt(n) D)`` of the Kolmogorov law.

    ``Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)``, evaluated by
    ``scipy.special.kolmogorov`` which switches to the theta-function form
    for small arguments where the alternating sum converges slowly.
    """
    if not 0.0 <= statistic <= 1.0:
        raise GLDomainError(f"statistic must lie in [0, 1], got {statistic}")
    if n < 1:
        raise GLDomainError("n must be positive")
    return float(np.clip(kolmogorov(math.sqrt(n) * statistic), 0.0, 1.0))


def ks_test(data, cdf: Callable) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic of ``data`` against ``cdf`` and its asymptotic p-value.

    Raises
    ------
    GLDomainError
        If ``cdf`` leaves ``[0, 1]`` or decreases across the sorted sample.
    """
    x = data.values if isinstance(data, Dataset) else np.sort(np.asarray(data, dtype=float))
    n = x.size
    if n == 0:
        raise GLDomainError("empty sample")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except TypeError:
        f = np.array([float(cdf(v)) for v in x])
    if np.any(~np.isfinite(f)) or np.any(f < -1e-12) or np.any(f > 1 + 1e-12):
        raise GLDomainError("cdf values must lie in [0, 1]")
    if np.any(np.diff(f) < -1e-12):
        raise GLDomainError("cdf is not monotone on the sample")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    d = min(max(d, 0.0), 1.0)
    return d, kolmogorov_p_value(d, n)


def logistic_baseline_log_likelihood(data, theta: float) -> float:
    """Log-likelihood of ``f(x) = e^(x/theta) / (theta (1 + e^(x/theta))^2)``, no location term."""
    if not theta > 0:
        raise GLDomainError(f"theta must be positive, got {theta}")
    x = (data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)) / theta
    return float(np.sum(x - math.log(theta) - 2.0 * np.logaddexp(0.0, x)))


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitConfig:
    """What to fit and how hard to try.

    ``fixed`` pins parameters by name; every other entry of
    :data:`PARAMETER_NAMES` is free and starts from ``initial`` (or the
    data-driven default for ``mu`` and ``sigma2``).
    """

    fixed: Mapping[str, float] = field(default_factory=dict)
    initial: Mapping[str, float] = field(default_factory=dict)
    optimizer: str = "NelderMead"
    restarts: int = 8
    max_iterations: int = 2000
    xatol: float = 1e-9
    fatol: float = 1e-10
    jitter: float = 0.5

    def __post_init__(self):
        unknown = (set(self.fixed) | set(self.initial)) - set(PARAMETER_NAMES)
        if unknown:
            raise GLDomainError(f"unknown parameter(s): {sorted(unknown)}")
        if self.optimizer != "NelderMead":
            raise GLDomainError(f"unsupported optimizer {self.optimizer!r}")
        if int(self.restarts) < 1 or int(self.max_iterations) < 1:
            raise GLDomainError("restarts and max_iterations must be positive")
        if not self.free:
            raise GLDomainError("at least one parameter must be free")

    @property
    def free(self) -> tuple:
        return tuple(p for p in PARAMETER_NAMES if p not in self.fixed)


_DEFAULT_START = {"N": 1.0, "a": 1.0, "b": 1.0, "s": 1.0, "r": 1.0}


@dataclass
class FitResult:
    estimates: dict
    free_count: int
    log_likelihood: float
    aic: float
    ks_statistic: float
    ks_p_value: float
    converged: bool
    function_evaluations: int
    notes: list = field(default_factory=list)
    n_observations: int = 0
    restart_log_likelihoods: list = field(default_factory=list)

    def params(self) -> GLParams:
        e = self.estimates
        return GLParams(N=e["N"], a=e["a"], b=e["b"], s1=e["s"], s2=e["s"], r=e["r"])

    def to_dict(self) -> dict:
        return {
            "estimates": dict(self.estimates),
            "free_count": self.free_count,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "ks_statistic": self.ks_statistic,
            "ks_p_value": self.ks_p_value,
            "converged": self.converged,
            "function_evaluations": self.function_evaluations,
            "n_observations": self.n_observations,
            "notes": list(self.notes),
        }


def _start(data: Dataset, cfg: FitConfig) -> dict:
    full = dict(_DEFAULT_START)
    full["mu"] = float(data.mean)
    full["sigma2"] = float(np.var(data.values)) * 2.0 or 1.0
    full.update({k: float(v) for k, v in cfg.initial.items()})
    full.update({k: float(v) for k, v in cfg.fixed.items()})
    return full


def _encode(name, value):
    return math.log(value) if name in _LOG_SPACE else value


def _decode(name, value):
    return math.exp(value) if name in _LOG_SPACE else value


def _objective_factory(data: Dataset, cfg: FitConfig, base: dict):
    free = cfg.free

    def unpack(theta):
        full = dict(base)
        for name, v in zip(free, theta):
            full[name] = float(_decode(name, v))
        return full

    def objective(theta):
        full = unpack(theta)
        try:
            params = GLParams(N=full["N"], a=full["a"], b=full["b"],
                              s1=full["s"], s2=full["s"], r=full["r"])
            params.check_dimension(1)
            ll = log_likelihood(data, params, full["mu"], full["sigma2"])
        except (GLDomainError, GLConvergenceError, OverflowError, ValueError):
            return math.inf
        return -ll if math.isfinite(ll) else math.inf

    return objective, unpack


def fit(data: Dataset, cfg: FitConfig | None = None, src: RandomSource | None = None) -> FitResult:
    """Maximum-likelihood fit by Nelder-Mead with jittered restarts.

    Restart 0 starts exactly at the configured initial point; the others
    perturb it in the optimizer's coordinates (logs for positive
    parameters) with Gaussian jitter drawn from ``src``.  The best restart
    wins; ties go to the lowest restart index.

    Raises
    ------
    FitError
        If no restart produces a finite objective.
    """
    cfg = cfg or FitConfig()
    if src is None:
        src = np.random.default_rng(0)
    base = _start(data, cfg)
    objective, unpack = _objective_factory(data, cfg, base)
    x0 = np.array([_encode(p, base[p]) for p in cfg.free])

    best, evaluations, history = None, 0, []
    for k in range(int(cfg.restarts)):
        start = x0 if k == 0 else x0 + cfg.jitter * src.standard_normal(x0.size)
        if not math.isfinite(objective(start)):
            history.append(math.nan)
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(objective, start, method="Nelder-Mead",
                           options={"maxiter": int(cfg.max_iterations),
                                    "maxfev": 4 * int(cfg.max_iterations),
                                    "xatol": cfg.xatol, "fatol": cfg.fatol})
        evaluations += int(res.nfev)
        history.append(-float(res.fun))
        if math.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitError("no restart produced a finite log-likelihood")

    est = unpack(best.x)
    params = GLParams(N=est["N"], a=est["a"], b=est["b"], s1=est["s"], s2=est["s"], r=est["r"])
    ll = log_likelihood(data, params, est["mu"], est["sigma2"])
    k = len(cfg.free)
    notes = []
    if est["r"] < IDENTIFIABILITY_THRESHOLD and "b" in cfg.free:
        notes.append(f"r = {est['r']:.3g} is below {IDENTIFIABILITY_THRESHOLD:g}; "
                     "the likelihood is flat in b and b is not identifiable")
    d, p = ks_test(data, lambda x: cdf_univariate(params, est["mu"], est["sigma2"], x))
    return FitResult(estimates=est, free_count=k, log_likelihood=ll, aic=aic(k, ll),
                     ks_statistic=d, ks_p_value=p, converged=bool(best.success),
                     function_evaluations=evaluations, notes=notes,
                     n_observations=len(data), restart_log_likelihoods=history)
