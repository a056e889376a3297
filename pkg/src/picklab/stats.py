"""Spearman rank correlation with a t-approximate or permutation p-value."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata
from scipy.stats import t as t_dist


@dataclass(frozen=True)
class SpearmanResult:
    rho: float | None        # None when either sample is constant
    p_value: float | None
    m: int

    @property
    def defined(self) -> bool:
        return self.rho is not None


def spearman(xs: Sequence[float], ys: Sequence[float], permutations: int = 0,
             seed: int = 0) -> SpearmanResult:
    """Pearson correlation of average ranks.

    The two-sided p-value uses ``t = rho * sqrt((m-2)/(1-rho^2))`` with
    ``m-2`` degrees of freedom, or a Monte-Carlo permutation test when
    ``permutations`` is positive.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    m = len(x)
    if m < 3:
        raise ValueError("need at least 3 paired observations")
    rx, ry = rankdata(x), rankdata(y)
    rho = _pearson(rx, ry)
    if rho is None:
        return SpearmanResult(None, None, m)
    if permutations > 0:
        rng = np.random.default_rng(seed)
        hits = sum(abs(_pearson(rx, rng.permutation(ry))) >= abs(rho) - 1e-12
                   for _ in range(permutations))
        return SpearmanResult(rho, (hits + 1) / (permutations + 1), m)
    if abs(rho) >= 1.0:
        return SpearmanResult(rho, 0.0, m)
    t = rho * math.sqrt((m - 2) / (1 - rho * rho))
    return SpearmanResult(rho, float(2 * t_dist.sf(abs(t), m - 2)), m)


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    da, db = a - a.mean(), b - b.mean()
    den = math.sqrt(float(da @ da) * float(db @ db))
    if den == 0:
        return None
    return max(-1.0, min(1.0, float(da @ db) / den))


__all__ = ["SpearmanResult", "spearman"]
