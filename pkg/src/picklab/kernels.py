"""Hot kernels: the earliest-completion Held-Karp table over item subsets.

Two interchangeable implementations are provided, a numba ``@njit`` loop
and a layer-vectorized numpy version. :func:`hk_table` dispatches according
to :func:`picklab._accel.numba_enabled`, so ``PICKLAB_KERNELS=numpy`` selects
the fallback.

All times are int64 ticks. ``INF`` marks unreachable states and is small
enough that ``INF + distance`` cannot overflow.
"""
from __future__ import annotations

import numpy as np

from picklab._accel import njit, numba_enabled

INF = np.int64(1 << 60)


@njit(cache=True)
def _hk_table_numba(arr0, dist, rel, pick):
    m = arr0.shape[0]
    full = 1 << m
    inf = 1 << 60
    dp = np.full((full, m), inf, dtype=np.int64)
    for i in range(m):
        t = arr0[i]
        if t < inf:
            if rel[i] > t:
                t = rel[i]
            dp[1 << i, i] = t + pick
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        for i in range(m):
            bit = 1 << i
            if mask & bit == 0:
                continue
            prev = mask ^ bit
            best = inf
            for p in range(m):
                if prev & (1 << p) == 0:
                    continue
                v = dp[prev, p]
                if v >= inf:
                    continue
                v += dist[p, i]
                if v < best:
                    best = v
            if best < inf:
                if rel[i] > best:
                    best = rel[i]
                dp[mask, i] = best + pick
    return dp


def _hk_table_numpy(arr0, dist, rel, pick):
    m = arr0.shape[0]
    full = 1 << m
    dp = np.full((full, m), INF, dtype=np.int64)
    if m == 0:
        return dp
    singles = 1 << np.arange(m)
    ok = arr0 < INF
    dp[singles[ok], np.arange(m)[ok]] = np.maximum(arr0[ok], rel[ok]) + pick
    masks = np.arange(full, dtype=np.int64)
    popcount = np.zeros(full, dtype=np.int64)
    for i in range(m):
        popcount += (masks >> i) & 1
    for size in range(2, m + 1):
        layer = masks[popcount == size]
        for i in range(m):
            sel = layer[(layer >> i) & 1 == 1]
            prev = sel ^ (1 << i)
            cand = dp[prev, :] + dist[:, i][None, :]
            best = cand.min(axis=1)
            reach = best < INF
            val = np.maximum(best, rel[i]) + pick
            dp[sel[reach], i] = val[reach]
    return dp


def hk_table(arr0: np.ndarray, dist: np.ndarray, rel: np.ndarray, pick: int) -> np.ndarray:
    """Earliest pick-completion times ``dp[mask, last]``.

    ``arr0[i]`` is the earliest arrival at item ``i`` when it is visited first,
    ``dist`` the item-to-item travel times, ``rel`` the release times. A pick
    starts at ``max(arrival, release)`` and lasts ``pick`` ticks.
    """
    arr0 = np.ascontiguousarray(arr0, dtype=np.int64)
    dist = np.ascontiguousarray(dist, dtype=np.int64)
    rel = np.ascontiguousarray(rel, dtype=np.int64)
    if numba_enabled():
        return _hk_table_numba(arr0, dist, rel, np.int64(pick))
    return _hk_table_numpy(arr0, dist, rel, np.int64(pick))


def backtrack(dp: np.ndarray, dist: np.ndarray, rel: np.ndarray, pick: int, last: int) -> list[int]:
    """Recover the visit order ending at ``last`` from a full table.

    Ties go to the smallest predecessor index.
    """
    m = dp.shape[1]
    mask = (1 << m) - 1
    order = [last]
    i = last
    while mask != (1 << i):
        prev = mask ^ (1 << i)
        target = dp[mask, i]
        for p in range(m):
            if not prev >> p & 1 or dp[prev, p] >= INF:
                continue
            if max(int(dp[prev, p]) + int(dist[p, i]), int(rel[i])) + pick == target:
                break
        else:  # pragma: no cover - table is internally consistent
            raise AssertionError("inconsistent Held-Karp table")
        order.append(p)
        mask, i = prev, p
    order.reverse()
    return order
