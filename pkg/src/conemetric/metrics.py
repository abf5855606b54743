"""Concrete cone metrics and their validators.

Four constructions: the discrete cone metric, the product cone metric
``(a*d1, b*d2)`` on the plane, the geometric l^q cone metric truncated to
``N`` coordinates, and finite lookup tables.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from .cone import NormSpec, Orthant, OrderedVectorSpace, leq


def absolute_difference(x, y) -> float:
    return abs(float(x) - float(y))


class ConeMetric:
    """Map ``D: X x X -> E`` into the cone of ``space``."""

    space: OrderedVectorSpace

    def __call__(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def closed_form(self, x, y) -> Optional[float]:
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


class DiscreteConeMetric(ConeMetric):
    """``D(x, y) = a`` for ``x != y`` and ``0`` otherwise.

    ``a`` must be a unit cone vector.  The metrized distance is 1 whenever the
    norm is monotone on the orthant or ``a`` lies in the dual cone; for a
    general cone it can be smaller.
    """

    def __init__(self, a, space: OrderedVectorSpace):
        a = space.vector(a)
        if not space.cone.contains(a, space.tolerance) or not np.any(a):
            raise ValueError("discrete cone metric needs a nonzero cone vector")
        if abs(space.norm(a) - 1.0) > 1e-9:
            raise ValueError(f"discrete cone metric vector must have unit norm, got {space.norm(a)}")
        self.a = a
        self.space = space

    def __call__(self, x, y):
        if np.array_equal(np.asarray(x), np.asarray(y)):
            return np.zeros(self.space.dim)
        return self.a.copy()

    def closed_form(self, x, y):
        return 0.0 if np.array_equal(np.asarray(x), np.asarray(y)) else 1.0

    def to_dict(self):
        return {"kind": "discrete", "a": self.a.tolist()}


class ProductConeMetric(ConeMetric):
    """``D(x, y) = (a*d1(x, y), b*d2(x, y))`` with values in the plane orthant."""

    def __init__(self, a: float = 1.0, b: float = 1.0, d1: Callable = absolute_difference,
                 d2: Callable = absolute_difference, space: Optional[OrderedVectorSpace] = None,
                 d1_scale: float = 1.0, d2_scale: float = 1.0):
        if a < 0 or b < 0:
            raise ValueError("product cone metric coefficients must be nonnegative")
        space = space if space is not None else OrderedVectorSpace(Orthant(2))
        if not isinstance(space.cone, Orthant) or space.dim != 2:
            raise ValueError("product cone metric takes values in the orthant of R^2")
        self.a, self.b = float(a), float(b)
        self.d1, self.d2 = d1, d2
        self.d1_scale, self.d2_scale = float(d1_scale), float(d2_scale)
        self.space = space

    def __call__(self, x, y):
        return np.array([self.a * self.d1_scale * self.d1(x, y),
                         self.b * self.d2_scale * self.d2(x, y)])

    def closed_form(self, x, y):
        # infimum over the orthant with a monotone norm is the norm itself
        return self.space.norm(self(x, y))

    def to_dict(self):
        if self.d1 is not absolute_difference or self.d2 is not absolute_difference:
            raise ValueError("only absolute-difference factor metrics serialize")
        return {"kind": "product", "a": self.a, "b": self.b,
                "d1_scale": self.d1_scale, "d2_scale": self.d2_scale}


class GeometricLqConeMetric(ConeMetric):
    """``D(x, y)_n = (rho(x, y) / b**n) ** (1/q)`` for ``n = 1..N``.

    The codomain is the orthant of R^N with the l^q (quasi-)norm.
    """

    def __init__(self, rho: Callable = absolute_difference, b: float = 2.0, q: float = 1.0,
                 n_terms: int = 32):
        if not b > 1:
            raise ValueError("geometric cone metric needs b > 1")
        if not q > 0:
            raise ValueError("geometric cone metric needs q > 0")
        if n_terms < 1:
            raise ValueError("truncation must keep at least one term")
        self.rho, self.b, self.q, self.n_terms = rho, float(b), float(q), int(n_terms)
        self.space = OrderedVectorSpace(Orthant(self.n_terms), NormSpec(self.q))
        self._powers = self.b ** np.arange(1, self.n_terms + 1)

    def __call__(self, x, y):
        r = float(self.rho(x, y))
        return (r / self._powers) ** (1.0 / self.q)

    def closed_form(self, x, y):
        return (float(self.rho(x, y)) / (self.b - 1.0)) ** (1.0 / self.q)

    def tail_bound(self, rho: float) -> float:
        """Bound on ``|d_truncated - d_exact|`` for a pair at ``rho``.

        For ``q >= 1`` this is the l^q norm of the discarded coordinates.  For
        ``q < 1`` the l^q quasi-norm is not subadditive and the exact gap
        ``(S + R)**(1/q) - S**(1/q)`` is used instead.  Both include a few
        ulps of slack for the rounding in the computed values.
        """
        rho = float(rho)
        tail_mass = rho / ((self.b - 1.0) * self.b ** self.n_terms)
        full = (rho / (self.b - 1.0)) ** (1.0 / self.q)
        if self.q >= 1:
            bound = tail_mass ** (1.0 / self.q)
        else:
            kept = rho * (1.0 - self.b ** (-self.n_terms)) / (self.b - 1.0)
            bound = full - kept ** (1.0 / self.q)
        return bound + 8 * sys.float_info.epsilon * full / min(self.q, 1.0)

    def to_dict(self):
        if self.rho is not absolute_difference:
            raise ValueError("only the absolute-difference base metric serializes")
        return {"kind": "lq", "b": self.b, "q": self.q, "N": self.n_terms}


def _pair_key(x, y):
    return frozenset((x, y)) if x != y else (x,)


class FiniteTableConeMetric(ConeMetric):
    """Cone metric on finitely many labels given by an explicit table.

    ``entries`` maps ``(x, y)`` to a cone vector.  One orientation per pair
    is enough; giving both orientations with different values is an error.
    Diagonal entries default to zero.
    """

    def __init__(self, labels: Sequence[Hashable], entries: dict, space: OrderedVectorSpace):
        self.labels = list(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate point labels")
        self.space = space
        label_set = set(self.labels)
        table = {}
        for (x, y), v in entries.items():
            if x not in label_set or y not in label_set:
                raise KeyError(f"unknown point label in entry ({x!r}, {y!r})")
            v = space.vector(v)
            key = _pair_key(x, y)
            if key in table and not np.array_equal(table[key], v):
                raise ValueError(f"asymmetric entries for pair ({x!r}, {y!r})")
            table[key] = v
        for x, y in itertools.combinations(self.labels, 2):
            if _pair_key(x, y) not in table:
                raise ValueError(f"missing entry for pair ({x!r}, {y!r})")
        self._table = table

    def __call__(self, x, y):
        key = _pair_key(x, y)
        if key in self._table:
            return self._table[key].copy()
        if x == y and x in self.labels:
            return np.zeros(self.space.dim)
        raise KeyError(f"unknown point label {x!r} or {y!r}")

    def to_dict(self):
        entries = []
        for i, x in enumerate(self.labels):
            for y in self.labels[i:]:
                key = _pair_key(x, y)
                if key in self._table:
                    entries.append({"x": x, "y": y, "D": self._table[key].tolist()})
        return {"kind": "table", "points": list(self.labels), "entries": entries}


def eval_cone_metric(cm: ConeMetric, x, y) -> np.ndarray:
    return cm(x, y)


def closed_form_d(cm: ConeMetric, x, y) -> Optional[float]:
    """Closed-form equivalent metric where one is known, else ``None``."""
    return cm.closed_form(x, y)


def truncation_tail_bound(cm: GeometricLqConeMetric) -> Callable[[float], float]:
    if not isinstance(cm, GeometricLqConeMetric):
        raise TypeError("tail bound is defined for the geometric l^q cone metric only")
    return cm.tail_bound


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ConeMetricReport:
    nonnegativity_failures: list = field(default_factory=list)
    identity_failures: list = field(default_factory=list)
    symmetry_failures: list = field(default_factory=list)
    triangle_failures: list = field(default_factory=list)
    triples_checked: int = 0

    @property
    def ok(self) -> bool:
        return not (self.nonnegativity_failures or self.identity_failures
                    or self.symmetry_failures or self.triangle_failures)

    @property
    def first_violation(self):
        for name in ("nonnegativity", "identity", "symmetry", "triangle"):
            items = getattr(self, f"{name}_failures")
            if items:
                return name, items[0]
        return None


def _same(x, y) -> bool:
    return bool(np.array_equal(np.asarray(x), np.asarray(y)))


def validate_cone_metric(cm: ConeMetric, points: Optional[Sequence] = None, tol: Optional[float] = None,
                         max_triples: int = 100_000, seed=0) -> ConeMetricReport:
    """Check the cone metric axioms on ``points`` (all labels for tables)."""
    space = cm.space
    tol = space.tolerance if tol is None else tol
    if points is None:
        if not isinstance(cm, FiniteTableConeMetric):
            raise ValueError("points are required for non-table cone metrics")
        points = cm.labels
    points = list(points)
    n = len(points)
    rep = ConeMetricReport()
    vals = {}
    for i, j in itertools.product(range(n), repeat=2):
        v = cm(points[i], points[j])
        vals[i, j] = v
        if not space.cone.contains(v, tol):
            if i <= j:
                rep.nonnegativity_failures.append((points[i], points[j]))
        zero = np.linalg.norm(v) <= tol
        if (i == j) != zero or (i != j and _same(points[i], points[j]) and not zero):
            if i <= j:
                rep.identity_failures.append((points[i], points[j]))
    for i, j in itertools.combinations(range(n), 2):
        if not np.allclose(vals[i, j], vals[j, i], rtol=0, atol=tol):
            rep.symmetry_failures.append((points[i], points[j]))
    triples = list(itertools.product(range(n), repeat=3)) if n ** 3 <= max_triples else None
    if triples is None:
        rng = np.random.default_rng(seed)
        triples = [tuple(t) for t in rng.integers(0, n, size=(max_triples, 3))]
    s = OrderedVectorSpace(space.cone, space.norm, tol, space.margin, validate=False)
    for i, j, k in triples:
        if not leq(s, vals[i, j], vals[i, k] + vals[k, j]):
            rep.triangle_failures.append((points[i], points[j], points[k]))
    rep.triples_checked = len(triples)
    return rep


def random_cone_metric_table(points, space: OrderedVectorSpace, seed=0) -> FiniteTableConeMetric:
    """Random valid table on an orthant codomain.

    Each coordinate is the shortest-path metric of a random weighted complete
    graph, so the coordinatewise triangle inequality holds by construction.
    Coordinate 0 always has positive weights, which keeps ``D(x, y) != 0``;
    the others may be sparse (pseudometric coordinates) to put some values on
    the cone boundary.
    """
    if not isinstance(space.cone, Orthant):
        raise ValueError("random tables are generated for orthant codomains only")
    labels = list(range(points)) if isinstance(points, int) else list(points)
    n = len(labels)
    if n < 2:
        raise ValueError("need at least two points")
    rng = np.random.default_rng(seed)
    k = space.dim
    dist = np.empty((k, n, n))
    for c in range(k):
        w = rng.exponential(size=(n, n)) + (0.05 if c == 0 else 0.0)
        if c > 0 and rng.random() < 0.3:
            w = w * (rng.random((n, n)) < 0.6)
        w = np.triu(w, 1)
        w = w + w.T
        # Floyd-Warshall
        for m in range(n):
            w = np.minimum(w, w[:, m, None] + w[None, m, :])
        np.fill_diagonal(w, 0.0)
        dist[c] = w
    entries = {(labels[i], labels[j]): dist[:, i, j] for i, j in itertools.combinations(range(n), 2)}
    return FiniteTableConeMetric(labels, entries, space)


def cone_metric_from_dict(spec: dict, space: Optional[OrderedVectorSpace]) -> ConeMetric:
    kind = spec.get("kind")
    if kind == "discrete":
        return DiscreteConeMetric(spec["a"], space)
    if kind == "product":
        return ProductConeMetric(spec.get("a", 1.0), spec.get("b", 1.0), space=space,
                                 d1_scale=spec.get("d1_scale", 1.0), d2_scale=spec.get("d2_scale", 1.0))
    if kind == "lq":
        return GeometricLqConeMetric(b=spec.get("b", 2.0), q=spec.get("q", 1.0), n_terms=spec.get("N", 32))
    if kind == "table":
        entries = {}
        for e in spec["entries"]:
            key = (e["x"], e["y"])
            rev = (e["y"], e["x"])
            if rev in entries and key != rev and entries[rev] != e["D"]:
                raise ValueError(f"asymmetric entries for pair ({e['x']!r}, {e['y']!r})")
            entries[key] = e["D"]
        return FiniteTableConeMetric(spec["points"], entries, space)
    raise ValueError(f"unknown cone metric kind {kind!r}")


__all__ = [
    "ConeMetric",
    "ConeMetricReport",
    "DiscreteConeMetric",
    "FiniteTableConeMetric",
    "GeometricLqConeMetric",
    "ProductConeMetric",
    "absolute_difference",
    "closed_form_d",
    "cone_metric_from_dict",
    "eval_cone_metric",
    "random_cone_metric_table",
    "truncation_tail_bound",
    "validate_cone_metric",
]
