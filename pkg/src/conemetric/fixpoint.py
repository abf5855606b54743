"""Picard iteration on a cone metric space, measured with the metrized distance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .metrics import FiniteTableConeMetric
from .metrize import EquivalentMetric

DIVERGENCE_FACTOR = 1e6


@dataclass
class IterationTrace:
    iterates: list
    distances: list
    converged: bool
    estimated_rate: float
    diverged: bool = False
    metric: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def fixed_point(self):
        """Final iterate; a proxy, never claimed exact."""
        return self.iterates[-1]

    @property
    def residual(self) -> float:
        return self.distances[-1] if self.distances else 0.0

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, np.ndarray):
                return x.tolist()
            if isinstance(x, np.generic):
                return x.item()
            return x

        return {
            "schema": 1,
            "iterates": [enc(x) for x in self.iterates],
            "distances": [float(d) for d in self.distances],
            "converged": self.converged,
            "diverged": self.diverged,
            "estimated_rate": None if math.isnan(self.estimated_rate) else self.estimated_rate,
            "iterations": len(self.distances),
            "residual": self.residual,
        }


def _trailing_rate(distances, window: int = 10) -> float:
    ratios = [b / a for a, b in zip(distances[:-1], distances[1:]) if a > 0]
    if not ratios:
        return 0.0 if distances and distances[-1] == 0 else math.nan
    return float(np.median(ratios[-window:]))


def _in_domain(cm, x) -> bool:
    if isinstance(cm, FiniteTableConeMetric):
        try:
            return x in cm.labels
        except TypeError:
            return False
    arr = np.asarray(x, dtype=float)
    return bool(np.all(np.isfinite(arr)))


def banach_iterate(cm, T: Callable, x0, tol: float = 1e-8, max_iter: int = 1000, space=None) -> IterationTrace:
    """Iterate ``x <- T(x)`` until ``d(T x, x) <= tol``.

    Stops early, with ``diverged=True``, when a step exceeds a million times
    the first nonzero step.  A ``T`` that leaves the domain raises
    ``ValueError``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    metric = EquivalentMetric(cm, space)
    x = x0
    iterates, distances = [x0], []
    converged = diverged = False
    first = None
    for _ in range(max_iter):
        nxt = T(x)
        if not _in_domain(cm, nxt):
            raise ValueError(f"map left the domain at iterate {len(iterates)}: {nxt!r}")
        dist = metric(nxt, x)
        iterates.append(nxt)
        distances.append(dist)
        x = nxt
        if dist <= tol:
            converged = True
            break
        if first is None and dist > 0:
            first = dist
        if first is not None and dist > DIVERGENCE_FACTOR * first:
            diverged = True
            break
    return IterationTrace(iterates, distances, converged, _trailing_rate(distances), diverged, metric)


@dataclass
class RateReport:
    alpha: float
    stepwise_ok: bool
    apriori_ok: bool
    worst_step_ratio: float
    stepwise_failures: list = field(default_factory=list)
    apriori_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.stepwise_ok and self.apriori_ok


def verify_rate_bounds(trace: IterationTrace, alpha: float, tol: float = 1e-9) -> RateReport:
    """Check ``d_{n+1} <= alpha d_n`` and the a-priori bound against the last iterate."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha={alpha} outside [0, 1)")
    if len(trace.iterates) < 3:
        raise ValueError("need at least three iterates")
    if trace.metric is None:
        raise ValueError("trace carries no metric")
    d = trace.distances
    step_fail = [n for n in range(1, len(d)) if d[n] > alpha * d[n - 1] + tol]
    ratios = [b / a for a, b in zip(d[:-1], d[1:]) if a > 0]
    last = trace.iterates[-1]
    apriori_fail = []
    for n, x in enumerate(trace.iterates):
        bound = alpha ** n / (1 - alpha) * d[0]
        if trace.metric(x, last) > bound + tol:
            apriori_fail.append(n)
    return RateReport(alpha, not step_fail, not apriori_fail, max(ratios) if ratios else 0.0,
                      step_fail, apriori_fail)
