"""Growing Hoppe trees and measuring them.

A Hoppe tree starts from a single root. Each new node picks its parent among
the existing nodes with probability proportional to weight: the root weighs
``theta``, every other node weighs 1. Nodes are labelled 1, 2, ... in
insertion order, so node 1 is the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

STATISTICS = ("depth_last", "height", "ipl", "leaves", "subtree2")

_U64 = 2**64


def make_stream(seed: int, *key: int) -> np.random.Generator:
    """Random stream determined by ``seed`` and an optional integer key path.

    Streams with different keys are statistically independent, and a stream
    only depends on its own (seed, key), never on how many other streams were
    created before it.
    """
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class TreeParams:
    theta: float
    n: int
    seed: int = 0
    extremal: bool = False

    def __post_init__(self):
        if self.extremal:
            if self.theta != 0:
                raise ValueError("the extremal tree has theta = 0")
            if self.n < 2:
                raise ValueError("the extremal tree starts with the root and one child (n >= 2)")
        elif not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if not 0 <= self.seed < _U64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @classmethod
    def theta_zero(cls, n: int, seed: int = 0) -> "TreeParams":
        """The root-weight-zero tree: root, one forced child, then no further root attachments."""
        return cls(theta=0.0, n=n, seed=seed, extremal=True)


@dataclass(frozen=True, eq=False)
class HoppeTree:
    """Parent array of a grown tree.

    ``parent[i - 1]`` is the label of the parent of node ``i``; ``parent[0]``
    is 0 because the root has none.
    """

    parent: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.parent, dtype=np.int64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("parent array must be one-dimensional and non-empty")
        if p[0] != 0:
            raise ValueError("the root (node 1) has no parent; parent[0] must be 0")
        labels = np.arange(2, p.size + 1)
        if p.size > 1 and (np.any(p[1:] < 1) or np.any(p[1:] >= labels)):
            raise ValueError("every node i >= 2 needs a parent label in [1, i)")
        object.__setattr__(self, "parent", p)

    @classmethod
    def from_parents(cls, parents: Sequence[Optional[int]]) -> "HoppeTree":
        """Build from a 1-based listing whose first entry (the root) is ignored.

        >>> HoppeTree.from_parents([None, 1, 2]).n
        3
        """
        p = [0] + [int(x) for x in list(parents)[1:]]
        return cls(np.array(p, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.parent.size)

    def parent_of(self, i: int) -> int:
        if not 2 <= i <= self.n:
            raise ValueError(f"node {i} has no parent in a tree with {self.n} nodes")
        return int(self.parent[i - 1])

    def children(self) -> list[list[int]]:
        """Children lists, indexed by label (entry 0 is unused)."""
        out: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i in range(2, self.n + 1):
            out[self.parent[i - 1]].append(i)
        return out

    def __eq__(self, other):
        return isinstance(other, HoppeTree) and np.array_equal(self.parent, other.parent)

    def __repr__(self):
        return f"HoppeTree(n={self.n}, parent={self.parent.tolist()})"


@dataclass(frozen=True)
class TreeStats:
    depth_last: int
    height: int
    ipl: int
    leaves: int
    subtree2: Optional[int]

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in STATISTICS}


# Kernels work on 0-based indices: node label i lives at index i - 1.


@njit(cache=True, nogil=True)
def _grow_into(u, theta, parent):
    n = parent.shape[0]
    parent[0] = -1
    if n >= 2:
        parent[1] = 0
    for idx in range(2, n):
        # node idx + 1 joins a tree of k = idx nodes with total weight theta + k - 1
        x = u[idx - 2] * (theta + idx - 1)
        if x < theta:
            parent[idx] = 0
        else:
            p = int(x - theta) + 1
            if p > idx - 1:
                p = idx - 1
            parent[idx] = p


@njit(cache=True, nogil=True)
def _measure(parent, depth, has_child, in2):
    n = parent.shape[0]
    depth[0] = 0
    has_child[0] = False
    in2[0] = False
    height = 0
    ipl = 0
    leaves = 1
    sub2 = 0
    for idx in range(1, n):
        p = parent[idx]
        d = depth[p] + 1
        depth[idx] = d
        has_child[idx] = False
        if has_child[p]:
            leaves += 1
        else:
            has_child[p] = True
        ipl += d
        if d > height:
            height = d
        f = idx == 1 or in2[p]
        in2[idx] = f
        if f:
            sub2 += 1
    return depth[n - 1], height, ipl, leaves, sub2


class _Workspace:
    """Scratch buffers reused across trees of one size."""

    def __init__(self, n: int):
        self.parent = np.empty(n, dtype=np.int32)
        self.depth = np.empty(n, dtype=np.int32)
        self.has_child = np.empty(n, dtype=np.bool_)
        self.in2 = np.empty(n, dtype=np.bool_)

    def simulate(self, theta: float, stream: np.random.Generator) -> tuple:
        n = self.parent.size
        _grow_into(stream.random(max(n - 2, 0)), theta, self.parent)
        return _measure(self.parent, self.depth, self.has_child, self.in2)


def grow_tree(params: TreeParams, stream: Optional[np.random.Generator] = None) -> HoppeTree:
    """Grow one tree. Without an explicit stream, one is derived from ``params.seed``."""
    if stream is None:
        stream = make_stream(params.seed)
    parent = np.empty(params.n, dtype=np.int64)
    _grow_into(stream.random(max(params.n - 2, 0)), float(params.theta), parent)
    return HoppeTree(parent + 1)


def tree_stats(tree: HoppeTree) -> TreeStats:
    n = tree.n
    d_last, height, ipl, leaves, sub2 = _measure(
        tree.parent - 1,
        np.empty(n, dtype=np.int64),
        np.empty(n, dtype=np.bool_),
        np.empty(n, dtype=np.bool_),
    )
    return TreeStats(
        depth_last=int(d_last),
        height=int(height),
        ipl=int(ipl),
        leaves=int(leaves),
        subtree2=int(sub2) if n >= 2 else None,
    )


def is_ancestor(tree: HoppeTree, i: int, j: int) -> bool:
    """True iff node ``i`` lies on the path from node ``j`` to the root."""
    if not 1 <= i < j <= tree.n:
        raise ValueError(f"need 1 <= i < j <= {tree.n}, got i={i}, j={j}")
    v = j
    while v > i:
        v = int(tree.parent[v - 1])
    return v == i
