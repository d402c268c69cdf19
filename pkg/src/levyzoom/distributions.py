"""Empirical distributions and the distances used to compare them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats


class EmptySample(ValueError):
    pass


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample with optional weights summing to one."""

    samples: np.ndarray
    weights: np.ndarray | None = None

    def __init__(self, samples, weights=None):
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            raise EmptySample("empirical distribution needs at least one sample")
        if np.any(np.isnan(x)):
            raise ValueError("samples contain NaN")
        order = np.argsort(x, kind="stable")
        object.__setattr__(self, "samples", x[order])
        if weights is None:
            object.__setattr__(self, "weights", None)
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != x.shape or np.any(w < 0) or not w.sum() > 0:
                raise ValueError("weights must be nonnegative, match the samples and not all vanish")
            object.__setattr__(self, "weights", w[order] / w.sum())

    def __len__(self):
        return len(self.samples)

    @property
    def probs(self) -> np.ndarray:
        return self.weights if self.weights is not None else np.full(len(self), 1.0 / len(self))

    def cdf(self, x) -> np.ndarray:
        c = np.concatenate([[0.0], np.cumsum(self.probs)])
        return c[np.searchsorted(self.samples, x, side="right")]

    def mean(self) -> float:
        return float(np.dot(self.probs, self.samples))

    def std_error(self) -> float:
        n = len(self)
        if n < 2:
            return math.nan
        m = self.mean()
        var = float(np.dot(self.probs, (self.samples - m) ** 2)) * n / (n - 1)
        return math.sqrt(var / n)

    def quantile(self, q) -> np.ndarray:
        c = np.cumsum(self.probs)
        idx = np.searchsorted(c, np.asarray(q) - 1e-12, side="left")
        return self.samples[np.minimum(idx, len(self) - 1)]


def _as_dist(a) -> EmpiricalDistribution:
    if isinstance(a, EmpiricalDistribution):
        return a
    return EmpiricalDistribution(a)


def ks_distance(a, b) -> float:
    """Sup distance between the ECDF of ``a`` and either ``b``'s ECDF or a cdf callable."""
    a = _as_dist(a)
    if callable(b) and not isinstance(b, EmpiricalDistribution):
        if a.weights is None:
            return float(stats.ks_1samp(a.samples, b, method="asymp").statistic)
        ref = np.asarray(b(a.samples), dtype=float)
        hi = np.cumsum(a.probs)
        return float(max(np.max(hi - ref), np.max(ref - (hi - a.probs)), 0.0))
    b = _as_dist(b)
    if a.weights is None and b.weights is None:
        with np.errstate(divide="ignore", invalid="ignore"):  # p-value of tiny samples
            return float(stats.ks_2samp(a.samples, b.samples, method="asymp").statistic)
    pts = np.union1d(a.samples, b.samples)
    return float(np.max(np.abs(a.cdf(pts) - b.cdf(pts))))


def wasserstein1(a, b) -> float:
    a, b = _as_dist(a), _as_dist(b)
    return float(stats.wasserstein_distance(a.samples, b.samples, a.weights, b.weights))


def uniform_cdf(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def chi3_cdf(x):
    return stats.chi(3).cdf(x)


REFERENCE_CDFS: dict[str, Callable] = {"uniform": uniform_cdf, "chi3": chi3_cdf}
