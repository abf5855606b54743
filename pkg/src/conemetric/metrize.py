"""Scalar metric induced by a cone metric: ``d(x, y) = inf{||u|| : D(x, y) <= u}``.

The infimum equals the norm-distance from the origin to the translated cone
``c + P``.  Three cases are solved exactly (monotone norm on the orthant,
Euclidean norm with ``c`` in the dual cone, Euclidean projection onto the
shifted cone); everything else goes through a constrained local search
whose answer carries a certified primal/dual gap.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .cone import (
    Generators,
    Halfspaces,
    Orthant,
    OrderedVectorSpace,
    SecondOrder,
    strictly_less,
)

METHODS = ("monotone-fast-path", "dual-fast-path", "euclidean-projection", "local-search")


@dataclass(frozen=True)
class MetrizationResult:
    value: float
    minimizer: np.ndarray = field(repr=False)
    method: str
    error_bound: float


def _euclidean_minimizer(space: OrderedVectorSpace, c: np.ndarray) -> np.ndarray:
    # proj_{c+P}(0) = c + proj_P(-c)
    return c + space.cone.project(-c)


def _dual_lower_bound(space: OrderedVectorSpace, c: np.ndarray, y: np.ndarray) -> float:
    """Weak duality: any ``y`` in the dual cone gives ``<y, c> / ||y||_*``."""
    y = space.cone.project_dual(y)
    dn = space.norm.dual(y)
    if not dn > 0:
        return 0.0
    return max(0.0, float(y @ c) / dn)


def _pad(block, size):
    # constraint Jacobians only touch the leading vector coordinates
    out = np.zeros((block.shape[0], size))
    out[:, :block.shape[1]] = block
    return out


def _soc_row(v):
    r = np.linalg.norm(v[:-1])
    g = np.zeros_like(v)
    g[-1] = 1.0
    if r > 0:
        g[:-1] = -v[:-1] / r
    return g


def _membership_constraints(space, shift):
    """SLSQP inequality constraints for ``z[:n] - shift`` in the cone."""
    cone, n = space.cone, space.dim
    if isinstance(cone, SecondOrder):
        def fun(z):
            v = z[:n] - shift
            return np.array([v[-1] - np.linalg.norm(v[:-1])])

        def jac(z):
            return _pad(_soc_row(z[:n] - shift)[None, :], z.size)

        return [{"type": "ineq", "fun": fun, "jac": jac}]
    rows = cone.facets if isinstance(cone, (Generators, Halfspaces)) else np.eye(n)
    return [{"type": "ineq", "fun": lambda z: rows @ (z[:n] - shift), "jac": lambda z: _pad(rows, z.size)}]


def _dual_membership_constraints(space):
    cone, n = space.cone, space.dim
    if isinstance(cone, SecondOrder):
        def fun(z):
            v = z[:n]
            return np.array([v[-1] - np.linalg.norm(v[:-1])])

        return [{"type": "ineq", "fun": fun, "jac": lambda z: _pad(_soc_row(z[:n])[None, :], z.size)}]
    rows = cone.rays if isinstance(cone, (Generators, Halfspaces)) else np.eye(n)
    return [{"type": "ineq", "fun": lambda z: rows @ z[:n], "jac": lambda z: _pad(rows, z.size)}]


def _primal_search(space: OrderedVectorSpace, c: np.ndarray, start: np.ndarray) -> np.ndarray:
    n = space.dim
    p = space.norm.p
    w = np.ones(n) if space.norm.weights is None else np.asarray(space.norm.weights)
    cons = _membership_constraints(space, c)
    if p == 1 or math.isinf(p):
        k = n if p == 1 else 1
        s0 = np.abs(w * start) if p == 1 else np.array([np.max(np.abs(w * start))])
        z0 = np.concatenate([start, s0])

        def obj(z):
            return float(np.sum(z[n:]))

        def jac(z):
            g = np.zeros_like(z)
            g[n:] = 1.0
            return g

        def epi(z):
            u, s = z[:n] * w, z[n:]
            if k == 1:
                s = np.repeat(s, n)
            return np.concatenate([s - u, s + u])

        # s_i >= |w_i u_i| (l1) or s >= |w_i u_i| for every i (l_inf)
        S = np.eye(n) if k == n else np.ones((n, 1))
        W = np.diag(w)
        epi_jac = np.block([[-W, S], [W, S]])
        cons = cons + [{"type": "ineq", "fun": epi, "jac": lambda z: epi_jac}]
    else:
        z0 = start
        obj = space.norm
        jac = space.norm.subgradient
    res = minimize(obj, z0, jac=jac, constraints=cons, method="SLSQP",
                   options={"maxiter": 500, "ftol": 1e-14})
    return res.x[:n]


def _dual_search(space: OrderedVectorSpace, c: np.ndarray, start: np.ndarray) -> np.ndarray:
    n = space.dim
    p = space.norm.p
    w = np.ones(n) if space.norm.weights is None else np.asarray(space.norm.weights)
    cons = _dual_membership_constraints(space)
    bounds = None
    if p == 1:
        # dual is weighted l_inf: box constraints
        z0 = np.clip(start, -w, w)
        bounds = list(zip(-w, w))
    elif math.isinf(p):
        z0 = np.concatenate([start, np.abs(start / w)])
        cons = cons + [
            {"type": "ineq", "fun": lambda z: np.concatenate([z[n:] - z[:n] / w, z[n:] + z[:n] / w])},
            {"type": "ineq", "fun": lambda z: np.array([1.0 - np.sum(z[n:])])},
        ]
    else:
        z0 = start
        cons = cons + [{"type": "ineq", "fun": lambda z: np.array([1.0 - space.norm.dual(z[:n])])}]
    res = minimize(lambda z: -float(z[:n] @ c), z0,
                   jac=lambda z: np.concatenate([-c, np.zeros(z.shape[0] - n)]),
                   constraints=cons, bounds=bounds, method="SLSQP",
                   options={"maxiter": 500, "ftol": 1e-14})
    return res.x[:n]


def metrize_vector(space: OrderedVectorSpace, c) -> MetrizationResult:
    """Distance from the origin to ``c + P`` under ``space.norm``.

    Raises ``ValueError`` if ``c`` is not in the cone.  Approximate answers
    are never returned silently: ``error_bound`` is a certified gap between
    the returned value and a dual lower bound.
    """
    c = space.vector(c)
    cone, norm = space.cone, space.norm
    if not cone.contains(c, space.tolerance):
        raise ValueError(f"cone metric value {c.tolist()} is not in the cone")
    if isinstance(cone, Orthant):
        return MetrizationResult(norm(c), c.copy(), "monotone-fast-path", 0.0)
    if norm.is_euclidean:
        if cone.dual_contains(c, space.tolerance):
            return MetrizationResult(norm(c), c.copy(), "dual-fast-path", 0.0)
        u = _euclidean_minimizer(space, c)
        value = norm(u)
        lower = _dual_lower_bound(space, c, u)
        return MetrizationResult(value, u, "euclidean-projection", max(0.0, value - lower))

    u_euc = _euclidean_minimizer(space, c)
    candidates = [c, u_euc]
    w = cone.interior_witness()
    nudge = 0.1 * float(np.linalg.norm(c)) * w / np.linalg.norm(w)
    # the apex of c + P is a kink of the membership constraint, so also start
    # from points pushed into the interior
    for start in (u_euc, c, u_euc + nudge, c + nudge):
        u = _primal_search(space, c, start)
        # repair feasibility before trusting the objective
        candidates.append(c + cone.project(u - c))
    best = min(candidates, key=norm)
    value = norm(best)
    lo, _ = norm.equivalence_constants(space.dim)
    lower = lo * float(np.linalg.norm(u_euc))
    g = norm.subgradient(best)
    lower = max(lower, _dual_lower_bound(space, c, g))
    y = _dual_search(space, c, cone.project_dual(g))
    lower = max(lower, _dual_lower_bound(space, c, y))
    return MetrizationResult(value, best, "local-search", max(0.0, value - lower))


class EquivalentMetric:
    """Scalar metric ``(x, y) -> metrize_vector(space, D(x, y)).value``."""

    def __init__(self, cone_metric, space: Optional[OrderedVectorSpace] = None):
        self.cone_metric = cone_metric
        self.space = space if space is not None else cone_metric.space

    def result(self, x, y) -> MetrizationResult:
        return metrize_vector(self.space, self.cone_metric(x, y))

    def __call__(self, x, y) -> float:
        return self.result(x, y).value


def equivalent_metric(cone_metric, space: Optional[OrderedVectorSpace] = None) -> EquivalentMetric:
    return EquivalentMetric(cone_metric, space)


def distance_matrix(cone_metric, space=None, points: Sequence = (), details: bool = False):
    """Symmetric matrix of metrized distances; optionally the per-entry results."""
    points = list(points)
    if not points:
        raise ValueError("distance_matrix needs at least one point")
    metric = EquivalentMetric(cone_metric, space)
    n = len(points)
    out = np.zeros((n, n))
    results = [[None] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        r = metric.result(points[i], points[j])
        out[i, j] = out[j, i] = r.value
        results[i][j] = results[j][i] = r
    if details:
        return out, results
    return out


def write_distance_csv(path, labels: Sequence, matrix) -> None:
    """CSV with label headers and 12 significant digits, LF line endings."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + [str(x) for x in labels])
        for lab, row in zip(labels, np.asarray(matrix)):
            w.writerow([str(lab)] + [format(float(v), ".12g") for v in row])


# ---------------------------------------------------------------------------
# Axiom and convergence checks
# ---------------------------------------------------------------------------


@dataclass
class AxiomReport:
    points: int
    triples_checked: int
    max_identity_violation: float
    max_symmetry_violation: float
    max_triangle_violation: float
    identity_failures: int
    symmetry_failures: int
    triangle_failures: int
    worst_triple: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return not (self.identity_failures or self.symmetry_failures or self.triangle_failures)


def check_metric_axioms(metric: Callable, points: Sequence, tol: float = 1e-8,
                        max_triples: int = 100_000, seed=0) -> AxiomReport:
    """Report the worst violations of the metric axioms over ``points``.

    All points are treated as distinct.  Triples are enumerated exactly up
    to ``max_triples`` and sampled beyond that.
    """
    points = list(points)
    n = len(points)
    m = np.array([[metric(p, q) for q in points] for p in points], dtype=float).reshape(n, n)
    diag = np.abs(np.diag(m))
    off = m[~np.eye(n, dtype=bool)]
    id_viol = float(diag.max()) if n else 0.0
    id_fail = int(np.sum(diag > tol)) + int(np.sum(off <= tol))
    if off.size and off.min() <= tol:
        id_viol = max(id_viol, tol - float(off.min()))
    sym = np.abs(m - m.T)
    sym_viol = float(sym.max()) if n else 0.0
    sym_fail = int(np.sum(np.triu(sym, 1) > tol))

    tri_viol, tri_fail, worst, checked = 0.0, 0, None, 0
    if n >= 3:
        total = n ** 3
        if total <= max_triples:
            # excess[i, j, k] = d(i, j) - d(i, k) - d(k, j)
            excess = m[:, :, None] - m[:, None, :] - m.T[None, :, :]
            checked = total
        else:
            rng = np.random.default_rng(seed)
            i, j, k = rng.integers(0, n, size=(3, max_triples))
            excess = m[i, j] - m[i, k] - m[k, j]
            checked = max_triples
        tri_viol = max(0.0, float(excess.max()))
        tri_fail = int(np.sum(excess > tol))
        if tri_fail:
            idx = np.unravel_index(int(np.argmax(excess)), excess.shape)
            if excess.ndim == 3:
                worst = (points[idx[0]], points[idx[1]], points[idx[2]])
            else:
                t = idx[0]
                worst = (points[i[t]], points[j[t]], points[k[t]])
    return AxiomReport(n, checked, id_viol, sym_viol, tri_viol, id_fail, sym_fail, tri_fail, worst)


@dataclass
class DirectionReport:
    direction: np.ndarray
    cone_index: Optional[int]
    scalar_index: Optional[int]
    scalar_tail: Optional[float]


@dataclass
class EquivalenceReport:
    directions: list
    distances: np.ndarray

    @property
    def cone_converges(self) -> bool:
        return all(r.cone_index is not None for r in self.directions)

    @property
    def scalar_converges(self) -> bool:
        return all(r.scalar_index is not None for r in self.directions)

    @property
    def agree(self) -> bool:
        return self.cone_converges == self.scalar_converges


def _tail_index(flags: Sequence[bool]) -> Optional[int]:
    """1-based first index from which every flag is true."""
    idx = None
    for n in range(len(flags), 0, -1):
        if not flags[n - 1]:
            break
        idx = n
    return idx


def check_convergence_equivalence(cone_metric, space=None, sequence: Sequence = (), limit=None,
                                  directions=None, margin: Optional[float] = None,
                                  random_directions: int = 8, seed=0) -> EquivalenceReport:
    """Compare eventual ``D(x_n, x) << c`` with eventual ``d(x_n, x) < ||c||``.

    The proof of equivalence shows ``D << c`` forces ``d < ||c||``, so both
    indices are reported per direction.  Without explicit ``directions``,
    the all-margins witness plus ``random_directions`` interior samples are
    scaled to half the largest observed distance.
    """
    space = space if space is not None else cone_metric.space
    margin = space.margin if margin is None else margin
    seq = list(sequence)
    if not seq:
        raise ValueError("empty sequence")
    metric = EquivalentMetric(cone_metric, space)
    cone_vals = [np.asarray(cone_metric(x, limit), dtype=float) for x in seq]
    dists = np.array([metric(x, limit) for x in seq])
    if directions is None:
        cone = space.cone
        base = [cone.interior_witness()]
        rng = np.random.default_rng(seed)
        while len(base) < random_directions + 1:
            v = cone.sample(rng) + 0.5 * base[0]
            if cone.interior_contains(v, margin):
                base.append(v)
        scale = 0.5 * float(dists.max())
        if scale == 0:
            scale = 1.0
        directions = [b * scale / space.norm(b) for b in base]
    reports = []
    for c in directions:
        c = space.vector(c)
        if not space.cone.interior_contains(c, margin):
            raise ValueError(f"direction {c.tolist()} is not an interior vector")
        dominated = [strictly_less(space, v, c, margin) for v in cone_vals]
        cn = _tail_index(dominated)
        # strict by the space tolerance so exact ties do not hinge on rounding
        radius = space.norm(c)
        sn = _tail_index(list(dists < radius - space.tolerance * (1.0 + radius)))
        tail = float(dists[sn - 1:].max()) if sn is not None else None
        reports.append(DirectionReport(c, cn, sn, tail))
    return EquivalenceReport(reports, dists)
