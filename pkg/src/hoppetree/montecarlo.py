"""Replicated simulation and the goodness-of-fit checks built on it.

Replicate ``r`` of an experiment draws from the stream keyed by ``(seed, r)``,
so results are bit-identical whatever the worker count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.stats import kstwobign, norm

from .core import STATISTICS, TreeParams, _Workspace, make_stream
from .formulas import DiscreteDistribution


@dataclass(frozen=True)
class ExperimentConfig:
    theta: float
    n: int
    replicates: int
    seed: int = 0
    statistics: tuple = STATISTICS
    extremal: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ValueError(f"unknown statistics {sorted(unknown)}")
        # validates theta, n, seed
        self.tree_params()

    def tree_params(self) -> TreeParams:
        return TreeParams(self.theta, self.n, self.seed, self.extremal)


@dataclass(frozen=True)
class StatSummary:
    count: int
    mean: float
    variance: float
    min: float
    max: float

    @property
    def se(self) -> float:
        """Standard error of the mean."""
        return math.sqrt(self.variance / self.count)


@dataclass
class SampleSummary:
    config: ExperimentConfig
    stats: dict
    samples: dict = field(repr=False)

    def __getitem__(self, statistic: str) -> StatSummary:
        return self.stats[statistic]

    def sorted(self, statistic: str) -> np.ndarray:
        return np.sort(self.samples[statistic])


def summarize(values: np.ndarray) -> StatSummary:
    """Moments of a sample, summed in index order with exact rounding (fsum)."""
    x = np.asarray(values, dtype=np.float64)
    m = x.size
    mean = math.fsum(x) / m
    var = math.fsum((x - mean) ** 2) / (m - 1) if m > 1 else 0.0
    return StatSummary(m, mean, var, float(x.min()), float(x.max()))


def _run_block(theta, n, seed, start, stop, out):
    ws = _Workspace(n)
    for r in range(start, stop):
        out[r] = ws.simulate(theta, make_stream(seed, r))


def simulate_samples(config: ExperimentConfig, workers: int = 1) -> np.ndarray:
    """Per-replicate statistics as an (R, 5) integer array in ``STATISTICS`` order."""
    r_total = config.replicates
    out = np.zeros((r_total, len(STATISTICS)), dtype=np.int64)
    theta = float(config.theta)
    workers = max(1, min(int(workers), r_total))
    bounds = np.linspace(0, r_total, workers + 1).astype(int)
    if workers == 1:
        _run_block(theta, config.n, config.seed, 0, r_total, out)
    else:
        with ThreadPoolExecutor(workers) as pool:
            jobs = [
                pool.submit(_run_block, theta, config.n, config.seed, a, b, out)
                for a, b in zip(bounds[:-1], bounds[1:])
            ]
            for job in jobs:
                job.result()
    return out


def run_experiment(config: ExperimentConfig, workers: int = 1) -> SampleSummary:
    raw = simulate_samples(config, workers)
    samples = {}
    stats = {}
    for j, name in enumerate(STATISTICS):
        if name not in config.statistics:
            continue
        if name == "subtree2" and config.n < 2:
            continue
        samples[name] = raw[:, j].copy()
        stats[name] = summarize(samples[name])
    return SampleSummary(config, stats, samples)


# Goodness of fit


def normal_cdf(x):
    return norm.cdf(x)


def beta1_cdf(theta: float) -> Callable:
    """CDF x -> 1 - (1 - x)^theta of Beta(1, theta)."""

    def cdf(x):
        return 1.0 - (1.0 - np.clip(x, 0.0, 1.0)) ** theta

    return cdf


def ks_statistic(samples: Sequence[float], cdf: Callable) -> float:
    """Sup distance between the empirical CDF of sorted ``samples`` and ``cdf``."""
    x = np.asarray(samples, dtype=np.float64)
    m = x.size
    if m < 100:
        raise ValueError(f"need at least 100 samples, got {m}")
    if np.any(np.diff(x) < 0):
        raise ValueError("samples must be sorted ascending")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    """Sup distance between two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical(m: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample Kolmogorov critical value."""
    return float(kstwobign.isf(alpha) / math.sqrt(m))


def empirical_pmf(samples: Sequence[int]) -> DiscreteDistribution:
    x = np.asarray(samples, dtype=np.int64)
    lo = int(x.min())
    counts = np.bincount(x - lo)
    return DiscreteDistribution(lo, counts / x.size)


@dataclass(frozen=True)
class TailRow:
    t: float
    frequency: float
    bound: float
    se: float

    @property
    def ok(self) -> bool:
        return self.frequency <= self.bound + 3.0 * self.se


@dataclass(frozen=True)
class TailReport:
    rows: tuple

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def worst_excess(self) -> float:
        """Largest frequency - (bound + 3 se); nonpositive when passing."""
        return max(r.frequency - r.bound - 3.0 * r.se for r in self.rows)


def tail_check(
    samples: Sequence[float], center: float, bound: Callable[[float], float], t_grid: Iterable[float]
) -> TailReport:
    """Compare empirical two-sided tail frequencies with a bound, allowing 3 binomial standard errors."""
    x = np.abs(np.asarray(samples, dtype=np.float64) - center)
    m = x.size
    rows = []
    for t in t_grid:
        p = float(np.count_nonzero(x >= t)) / m
        rows.append(TailRow(float(t), p, float(bound(t)), math.sqrt(p * (1 - p) / m)))
    return TailReport(tuple(rows))


@dataclass(frozen=True)
class DominanceReport:
    passed: bool
    max_violation: float  # largest F_lo - F_hi
    max_gap: float  # largest F_hi - F_lo
    tolerance: float


def dominance_check(
    samples_lo_theta: Sequence[float], samples_hi_theta: Sequence[float], tolerance: Optional[float] = None
) -> DominanceReport:
    """Check that the larger-theta sample is stochastically smaller.

    Its ECDF must lie above the smaller-theta ECDF everywhere, up to ``tolerance``
    (default 2 / sqrt(R) with R the smaller sample size).
    """
    lo = np.sort(np.asarray(samples_lo_theta, dtype=np.float64))
    hi = np.sort(np.asarray(samples_hi_theta, dtype=np.float64))
    if tolerance is None:
        tolerance = 2.0 * math.sqrt(1.0 / min(lo.size, hi.size))
    grid = np.concatenate([lo, hi])
    f_lo = np.searchsorted(lo, grid, side="right") / lo.size
    f_hi = np.searchsorted(hi, grid, side="right") / hi.size
    violation = float(np.max(f_lo - f_hi))
    gap = float(np.max(f_hi - f_lo))
    return DominanceReport(violation <= tolerance, violation, gap, tolerance)


def height_variance_probe(
    theta: float, n_grid: Iterable[int], replicates: int, seed: int = 0, workers: int = 1
) -> list[float]:
    """Unbiased sample variance of the height at each n."""
    out = []
    for n in n_grid:
        cfg = ExperimentConfig(theta, int(n), replicates, seed, ("height",))
        out.append(run_experiment(cfg, workers)["height"].variance)
    return out
