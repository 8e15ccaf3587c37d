"""Pure-Python implementations of the hot kernels.

These are the reference versions of the routines in ``_ccore.pyx`` and are
used whenever the compiled extension is unavailable.  Both modules expose the
same two functions with identical semantics.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np


def reduce_boundary(boundaries: Sequence[Sequence[int]]) -> np.ndarray:
    """Left-to-right Z2 column reduction of a boundary matrix.

    ``boundaries[j]`` lists the row indices of the nonzero entries of column
    ``j`` (the faces of simplex ``j``, as filtration indices).  Returns the
    lowest-one index of every reduced column, ``-1`` for zero columns.

    Columns are stored as Python integers used as bitsets, so column
    addition is a single XOR and the lowest one is ``bit_length() - 1``.
    """
    n = len(boundaries)
    low = np.full(n, -1, dtype=np.intp)
    owner: dict[int, int] = {}
    reduced: list[int] = [0] * n
    for j, faces in enumerate(boundaries):
        col = 0
        for f in faces:
            col ^= 1 << f
        while col:
            piv = col.bit_length() - 1
            other = owner.get(piv)
            if other is None:
                owner[piv] = j
                low[j] = piv
                break
            col ^= reduced[other]
        reduced[j] = col
    return low


def _perfect_matching_exists(cheb, half_a, half_b, eps) -> bool:
    m = len(half_a)
    n = len(half_b)
    size = m + n
    # left u < m: feature a_u; left u >= m: diagonal copy of b_{u-m}
    # right v < n: feature b_v; right v >= n: diagonal copy of a_{v-n}
    adj: list[list[int]] = []
    for u in range(m):
        row = [v for v in range(n) if cheb[u][v] <= eps]
        if half_a[u] <= eps:
            row.append(n + u)
        adj.append(row)
    diag_targets = list(range(n, n + m))
    for j in range(n):
        row = [j] if half_b[j] <= eps else []
        row.extend(diag_targets)
        adj.append(row)

    match_right = [-1] * size

    def augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    for u in range(size):
        if not augment(u, [False] * size):
            return False
    return True


def bottleneck_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Bottleneck distance between two single-degree diagrams.

    ``a`` and ``b`` are ``(m, 2)`` and ``(n, 2)`` arrays of (birth, death).
    The optimum is located by binary search over the sorted candidate values
    (pairwise sup-norm distances and half-persistences), testing each with a
    perfect-matching feasibility check in the diagonal-augmented graph.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    m, n = len(a), len(b)
    if m + n == 0:
        return 0.0
    cheb = [
        [max(abs(a[i, 0] - b[j, 0]), abs(a[i, 1] - b[j, 1])) for j in range(n)]
        for i in range(m)
    ]
    half_a = [(a[i, 1] - a[i, 0]) / 2.0 for i in range(m)]
    half_b = [(b[j, 1] - b[j, 0]) / 2.0 for j in range(n)]
    cands = set(half_a)
    cands.update(half_b)
    for row in cheb:
        cands.update(row)
    values = sorted(cands)
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(cheb, half_a, half_b, values[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(values[lo])
