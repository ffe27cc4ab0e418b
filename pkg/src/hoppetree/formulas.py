"""Closed forms for Hoppe-tree statistics.

Exact quantities (depth law, leaf moments, subtree-size law, path-length mean,
ancestor probabilities) are kept apart from asymptotic ones (height band,
path-length variance coefficient). Every ``MomentReport`` carries a ``kind``
tag so an asymptotic number is never compared to an exact oracle at a tight
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .specfun import shifted_harmonic, trigamma

DEPTH_DP_MAX_N = 50_000
SUBTREE_MAX_N = 10_000


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability masses on ``offset, offset + 1, ...``."""

    offset: int
    pmf: np.ndarray

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=np.float64)
        if pmf.ndim != 1 or pmf.size == 0:
            raise ValueError("pmf must be a non-empty vector")
        if np.any(pmf < 0):
            raise ValueError("pmf has negative entries")
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def from_masses(cls, masses: dict) -> "DiscreteDistribution":
        lo, hi = min(masses), max(masses)
        pmf = np.zeros(hi - lo + 1)
        for k, p in masses.items():
            pmf[k - lo] += p
        return cls(lo, pmf)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.pmf.size)

    @property
    def total(self) -> float:
        return math.fsum(self.pmf)

    def prob(self, k: int) -> float:
        i = k - self.offset
        return float(self.pmf[i]) if 0 <= i < self.pmf.size else 0.0

    def mean(self) -> float:
        return math.fsum(self.support * self.pmf)

    def moment(self, order: int) -> float:
        return math.fsum(self.support.astype(np.float64) ** order * self.pmf)

    def variance(self) -> float:
        m = self.mean()
        return math.fsum((self.support - m) ** 2 * self.pmf)

    def cdf(self) -> np.ndarray:
        """Cumulative masses at each support point."""
        return np.cumsum(self.pmf)

    def as_dict(self) -> dict:
        return {int(k): float(p) for k, p in zip(self.support, self.pmf) if p > 0}

    def tv_distance(self, other: "DiscreteDistribution") -> float:
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.pmf.size, other.offset + other.pmf.size)
        a = np.zeros(hi - lo)
        b = np.zeros(hi - lo)
        a[self.offset - lo : self.offset - lo + self.pmf.size] = self.pmf
        b[other.offset - lo : other.offset - lo + other.pmf.size] = other.pmf
        return 0.5 * math.fsum(np.abs(a - b))


@dataclass(frozen=True)
class MomentReport:
    mean: float
    variance: float
    n: int
    theta: float
    statistic: str
    kind: str = "exact"

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")


def _need(n, lo, what="n"):
    if n < lo:
        raise ValueError(f"{what} must be at least {lo}, got {n}")


def _positive(theta):
    if not (theta > 0 and math.isfinite(theta)):
        raise ValueError(f"theta must be a positive finite real, got {theta}")


def depth_moments(theta: float, n: int) -> MomentReport:
    """Mean and variance of the depth of node n."""
    _need(n, 2)
    _positive(theta)
    s1 = shifted_harmonic(theta, n - 2, 1)
    s2 = shifted_harmonic(theta, n - 2, 2)
    return MomentReport(1.0 + s1, max(s1 - s2, 0.0), n, theta, "depth_last")


def depth_pmf_exact(theta: float, n: int) -> DiscreteDistribution:
    """Law of the depth of node n: one plus a sum of independent Bernoulli(1/(theta+i))."""
    _need(n, 2)
    _positive(theta)
    if n > DEPTH_DP_MAX_N:
        raise ValueError(f"n = {n} exceeds the dynamic-programming budget {DEPTH_DP_MAX_N}")
    pmf = np.zeros(n - 1)
    pmf[0] = 1.0
    for j in range(1, n - 1):
        q = 1.0 / (theta + j)
        # after j factors the support is 0..j
        pmf[1 : j + 1] = pmf[1 : j + 1] * (1.0 - q) + pmf[0:j] * q
        pmf[0] *= 1.0 - q
    return DiscreteDistribution(1, pmf)


def poisson_cutoff(lam: float) -> int:
    """Truncation point whose upper Poisson tail is far below 1e-13."""
    return int(math.ceil(lam + 12.0 * math.sqrt(lam) + 30.0))


def depth_poisson_tv(theta: float, n: int) -> float:
    """Total variation between the depth law and a Poisson law with the same mean."""
    law = depth_pmf_exact(theta, n)
    lam = depth_moments(theta, n).mean
    top = max(poisson_cutoff(lam), law.offset + law.pmf.size - 1)
    d = np.zeros(top + 1)
    d[law.offset : law.offset + law.pmf.size] = law.pmf
    ref = poisson.pmf(np.arange(top + 1), lam)
    return 0.5 * math.fsum(np.abs(d - ref))


def leaf_mean_exact(theta: float, n: int) -> float:
    _need(n, 2)
    _positive(theta)
    return (n - 1) / 2 + theta * (n - 1) / (2 * (theta + n - 2))


def leaf_var_exact(theta: float, n: int) -> float:
    """Variance of the leaf count via the second-moment recursion of the scaled martingale.

    The martingale is (theta + m - 2) * (L_m - E L_m); it vanishes at m = 2.
    """
    _need(n, 2)
    _positive(theta)
    x2 = 0.0
    for m in range(3, n + 1):
        w = theta + m - 2
        w_prev = theta + m - 3
        ey = 1.0 - leaf_mean_exact(theta, m - 1) / w
        var_y = ey * (1.0 - ey)
        cross = -x2 / (w * w_prev)
        x2 = (w / w_prev) ** 2 * x2 + 2.0 * w * w / w_prev * cross + w * w * var_y
    return x2 / (theta + n - 2) ** 2


def leaf_moments(theta: float, n: int) -> MomentReport:
    return MomentReport(leaf_mean_exact(theta, n), leaf_var_exact(theta, n), n, theta, "leaves")


def leaf_tail_bound(theta: float, n: int, t: float) -> float:
    """Azuma-type bound on P(|L_n - E L_n| >= t)."""
    if not t > 0:
        raise ValueError("t must be positive")
    _need(n, 1)
    return 2.0 * math.exp(-6.0 * t * t / (n + theta + 1))


def ipl_mean_exact(theta: float, n: int) -> float:
    _need(n, 1)
    _positive(theta)
    return (theta + n - 1) * shifted_harmonic(theta, n - 1, 1)


def ipl_var_coefficient(theta: float) -> float:
    """Leading coefficient c in Var(I_n) = c n^2 + o(n^2)."""
    _positive(theta)
    return 2.0 / (theta + 1) - trigamma(theta + 1)


def ipl_moments(theta: float, n: int) -> MomentReport:
    """Exact mean with the leading-order variance; tagged asymptotic."""
    return MomentReport(
        ipl_mean_exact(theta, n), ipl_var_coefficient(theta) * n * n, n, theta, "ipl", "asymptotic"
    )


def subtree_pmf_exact(theta: float, n: int) -> DiscreteDistribution:
    """Law of the size of the subtree rooted at node 2, on 1..n-1."""
    _need(n, 2)
    _positive(theta)
    if n > SUBTREE_MAX_N:
        raise ValueError(f"n = {n} exceeds the supported size {SUBTREE_MAX_N}")
    k = np.arange(1, n, dtype=np.float64)
    log_binom = gammaln(n - 1) - gammaln(k) - gammaln(n - k)
    # theta (theta+1) ... (theta+n-k-2): n-k-1 rising factors, empty at k = n-1
    log_rising = gammaln(theta + n - k - 1) - gammaln(theta)
    log_denom = gammaln(theta + n - 1) - gammaln(theta + 1)
    pmf = np.exp(log_binom + log_rising + gammaln(k) - log_denom)
    return DiscreteDistribution(1, pmf)


def small_subtree_bound(theta: float, eps: float) -> float:
    """Upper bound on P(N_n <= eps n), uniform in n."""
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    _positive(theta)
    return 3.0 * (theta + 1) * eps


def ancestor_stats(theta: float, i: int, n: int) -> tuple[float, float]:
    """P(node i is an ancestor of node n) and E[#descendants of i after n-1 insertions]."""
    _positive(theta)
    if not 2 <= i < n:
        raise ValueError(f"need 2 <= i < n, got i={i}, n={n}")
    return 1.0 / (theta + i - 1), (theta + n - 2) / (theta + i - 1) - 1.0


def height_band(n: float) -> float:
    """Centre e ln n - 1.5 ln ln n of the admissible band for the mean height."""
    if n < 3:
        raise ValueError("height band needs n >= 3")
    ln = math.log(n)
    return math.e * ln - 1.5 * math.log(ln)
