"""Exact laws by walking every insertion history of a small Hoppe tree.

There are (n-1)! histories for n nodes. Each is weighted by the product of its
parent-choice probabilities: theta/(theta+k-1) for the root and 1/(theta+k-1)
for any other node when the tree has k nodes. Statistics are tracked
incrementally during the walk and never routed through ``core``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import STATISTICS, HoppeTree
from .formulas import DiscreteDistribution

MAX_N = 10
MAX_MARTINGALE_N = 8


@dataclass(frozen=True)
class HistoryAtom:
    parents: tuple  # parents[i-1] is the parent label of node i, 0 for the root
    probability: float

    @property
    def tree(self) -> HoppeTree:
        return HoppeTree.from_parents((None,) + self.parents[1:])


class _State:
    """Incremental statistics of the tree built so far."""

    def __init__(self):
        self.parents = [0]
        self.depth = [0]
        self.kids = [0]
        self.in2 = [False]
        self.ipl = 0
        self.height = 0
        self.leaves = 1
        self.sub2 = 0

    def push(self, p: int):
        """Attach a new node under label ``p``."""
        d = self.depth[p - 1] + 1
        self.parents.append(p)
        self.depth.append(d)
        self.kids.append(0)
        self.kids[p - 1] += 1
        if self.kids[p - 1] > 1:
            self.leaves += 1
        f = len(self.parents) == 2 or self.in2[p - 1]
        self.in2.append(f)
        self.sub2 += f
        self.ipl += d
        saved = self.height
        self.height = max(self.height, d)
        return saved

    def pop(self, saved_height: int):
        p = self.parents.pop()
        self.ipl -= self.depth.pop()
        self.kids.pop()
        self.kids[p - 1] -= 1
        if self.kids[p - 1] >= 1:
            self.leaves -= 1
        self.sub2 -= self.in2.pop()
        self.height = saved_height

    def values(self) -> dict:
        return {
            "depth_last": self.depth[-1],
            "height": self.height,
            "ipl": self.ipl,
            "leaves": self.leaves,
            "subtree2": self.sub2,
        }

    def size(self) -> int:
        return len(self.parents)


def _walk(theta: float, n: int, visit):
    """Depth-first walk calling ``visit(state, prob)`` on every n-node history."""
    state = _State()

    def rec(prob):
        k = state.size()
        if k == n:
            visit(state, prob)
            return
        total = theta + k - 1
        for p in range(1, k + 1):
            w = theta if p == 1 else 1.0
            saved = state.push(p)
            rec(prob * w / total)
            state.pop(saved)

    rec(1.0)


def _check_n(n, hi=MAX_N, lo=2):
    if not lo <= n <= hi:
        raise ValueError(f"exhaustive enumeration needs {lo} <= n <= {hi}, got {n}")


def _check_theta(theta):
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")


def enumerate_histories(theta: float, n: int) -> list[HistoryAtom]:
    """All (n-1)! insertion histories with their probabilities."""
    _check_theta(theta)
    _check_n(n)
    out = []
    _walk(theta, n, lambda s, pr: out.append(HistoryAtom(tuple(s.parents), pr)))
    return out


@lru_cache(maxsize=64)
def _all_laws(theta: float, n: int) -> dict:
    tables = {name: {} for name in STATISTICS}

    def visit(state, prob):
        for name, v in state.values().items():
            tables[name].setdefault(v, []).append(prob)

    _walk(theta, n, visit)
    return {
        name: DiscreteDistribution.from_masses({v: math.fsum(ps) for v, ps in t.items()})
        for name, t in tables.items()
    }


def exact_distribution(theta: float, n: int, statistic: str) -> DiscreteDistribution:
    _check_theta(theta)
    _check_n(n)
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    return _all_laws(float(theta), int(n))[statistic]


def exact_moment(theta: float, n: int, statistic: str, order: int = 1) -> float:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return exact_distribution(theta, n, statistic).moment(order)


def exact_variance(theta: float, n: int, statistic: str) -> float:
    return exact_distribution(theta, n, statistic).variance()


def exact_ancestor_stats(theta: float, i: int, n: int) -> tuple[float, float]:
    """P(i is an ancestor of n) and E[#descendants of i in the (n-1)-node tree], by enumeration."""
    _check_theta(theta)
    _check_n(n)
    if not 2 <= i < n:
        raise ValueError(f"need 2 <= i < n, got i={i}, n={n}")
    acc = {"prob": 0.0, "desc": 0.0}

    def visit(state, prob):
        par = state.parents
        v = n
        while v > i:
            v = par[v - 1]
        if v == i:
            acc["prob"] += prob
        # descendants of i among nodes i+1..n-1
        below = 0
        for j in range(i + 1, n):
            v = j
            while v > i:
                v = par[v - 1]
            below += v == i
        acc["desc"] += prob * below

    _walk(theta, n, visit)
    return acc["prob"], acc["desc"]


def _step_expectations(theta: float, state: _State):
    """Exact one-step conditional expectations of I_n, L_n, D_n given the current tree."""
    k = state.size()
    total = theta + k - 1
    e_ipl = e_leaves = e_depth = 0.0
    for p in range(1, k + 1):
        w = (theta if p == 1 else 1.0) / total
        saved = state.push(p)
        e_ipl += w * state.ipl
        e_leaves += w * state.leaves
        e_depth += w * state.depth[-1]
        state.pop(saved)
    return e_ipl, e_leaves, e_depth


def _harmonic(theta, m):
    return sum(1.0 / (theta + i) for i in range(1, m + 1))


def martingale_residuals(theta: float, n: int) -> tuple[float, float]:
    """Largest one-step martingale defects of the path-length and leaf martingales at step n.

    Path length: Z_m = I_m / (theta + m - 1) - sum_{i<m} 1/(theta + i).
    Leaves: X_m = (theta + m - 2) (L_m - E L_m), with E L_m taken from the enumeration.
    """
    _check_theta(theta)
    _check_n(n, MAX_MARTINGALE_N, 3)
    mean_now = exact_moment(theta, n, "leaves")
    mean_prev = exact_moment(theta, n - 1, "leaves")
    h_now = _harmonic(theta, n - 1)
    h_prev = _harmonic(theta, n - 2)
    worst = [0.0, 0.0]

    def visit(state, prob):
        e_ipl, e_leaves, _ = _step_expectations(theta, state)
        z_prev = state.ipl / (theta + n - 2) - h_prev
        z_next = e_ipl / (theta + n - 1) - h_now
        x_prev = (theta + n - 3) * (state.leaves - mean_prev)
        x_next = (theta + n - 2) * (e_leaves - mean_now)
        worst[0] = max(worst[0], abs(z_next - z_prev))
        worst[1] = max(worst[1], abs(x_next - x_prev))

    _walk(theta, n - 1, visit)
    return worst[0], worst[1]


def conditional_depth_residual(theta: float, n: int) -> float:
    """Largest |E[D_n | tree of n-1 nodes] - (1 + I_{n-1}/(theta + n - 2))| over all prefixes."""
    _check_theta(theta)
    _check_n(n, MAX_MARTINGALE_N, 3)
    worst = [0.0]

    def visit(state, prob):
        _, _, e_depth = _step_expectations(theta, state)
        worst[0] = max(worst[0], abs(e_depth - (1.0 + state.ipl / (theta + n - 2))))

    _walk(theta, n - 1, visit)
    return worst[0]
