"""Streaming bivariate moments for ratio estimators.

Every estimator in the package is a ratio of sums, sum(a) / sum(b), over
i.i.d. units (single samples, or one random curve with all its candidate
motions).  :class:`RatioMoments` keeps count, means, second moments and the
co-moment of (a, b); partial states merge exactly with Chan's pairwise
update, so chunked parallel runs reduce to the same answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class RatioMoments:
    n: int = 0
    mean_a: float = 0.0
    mean_b: float = 0.0
    m2_a: float = 0.0
    m2_b: float = 0.0
    c_ab: float = 0.0

    def update(self, a, b=None) -> None:
        """Fold in a batch of units; ``b`` defaults to ones (a plain mean)."""
        a = np.asarray(a, dtype=float).ravel()
        if len(a) == 0:
            return
        b = np.ones_like(a) if b is None else np.asarray(b, dtype=float).ravel()
        ma, mb = float(a.mean()), float(b.mean())
        da, db = a - ma, b - mb
        other = RatioMoments(len(a), ma, mb, float(da @ da), float(db @ db), float(da @ db))
        self.merge_in(other)

    def push(self, a: float, b: float = 1.0) -> None:
        """Single-value Welford step."""
        self.n += 1
        da = a - self.mean_a
        db = b - self.mean_b
        self.mean_a += da / self.n
        self.mean_b += db / self.n
        self.m2_a += da * (a - self.mean_a)
        self.m2_b += db * (b - self.mean_b)
        self.c_ab += da * (b - self.mean_b)

    def merge_in(self, other: "RatioMoments") -> None:
        if other.n == 0:
            return
        if self.n == 0:
            self.n, self.mean_a, self.mean_b = other.n, other.mean_a, other.mean_b
            self.m2_a, self.m2_b, self.c_ab = other.m2_a, other.m2_b, other.c_ab
            return
        n = self.n + other.n
        da = other.mean_a - self.mean_a
        db = other.mean_b - self.mean_b
        w = self.n * other.n / n
        self.m2_a += other.m2_a + da * da * w
        self.m2_b += other.m2_b + db * db * w
        self.c_ab += other.c_ab + da * db * w
        self.mean_a += da * other.n / n
        self.mean_b += db * other.n / n
        self.n = n

    def merged(self, other: "RatioMoments") -> "RatioMoments":
        out = RatioMoments(self.n, self.mean_a, self.mean_b, self.m2_a, self.m2_b, self.c_ab)
        out.merge_in(other)
        return out

    @property
    def var_a(self) -> float:
        return self.m2_a / (self.n - 1) if self.n > 1 else math.nan

    @property
    def var_b(self) -> float:
        return self.m2_b / (self.n - 1) if self.n > 1 else math.nan

    @property
    def cov_ab(self) -> float:
        return self.c_ab / (self.n - 1) if self.n > 1 else math.nan

    @property
    def ratio(self) -> float:
        return self.mean_a / self.mean_b if self.mean_b != 0 else math.nan

    @property
    def ratio_se(self) -> float:
        """Delta-method standard error of mean_a / mean_b.

        Exact (the usual s/sqrt(n)) when b is constant.
        """
        if self.n < 2 or self.mean_b == 0:
            return math.nan
        r = self.ratio
        v = self.var_a - 2 * r * self.cov_ab + r * r * self.var_b
        return math.sqrt(max(v, 0.0) / self.n) / abs(self.mean_b)

    @property
    def mean_se(self) -> float:
        return math.sqrt(self.var_a / self.n) if self.n > 1 else math.nan


def ratio_of_ratios_se(x: RatioMoments, y: RatioMoments) -> float:
    """Standard error of x.ratio - y.ratio for independent estimates."""
    return math.hypot(x.ratio_se, y.ratio_se)
