"""Ordering cones in R^n, the norms paired with them, and the induced orders.

A cone is one of four concrete shapes (nonnegative orthant, second-order
cone, finitely generated cone, halfspace-intersection cone).  Every shape
supports membership, interior slack, Euclidean projection, dual-cone
membership and sampling; :class:`OrderedVectorSpace` bundles a cone with a
norm and a tolerance and provides ``<=`` and ``<<``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog, nnls

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MARGIN = 1e-6


class ProjectionError(RuntimeError):
    """Iterative projection hit its iteration cap.

    The best iterate and its residual are kept so callers can decide what
    to do with an approximate answer.
    """

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.best = best
        self.residual = residual


def _as_vector(v, dim: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1 or v.shape[0] != dim:
        raise ValueError(f"expected a vector of length {dim}, got shape {v.shape}")
    return v


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormSpec:
    """Weighted l_p norm ``||w * v||_p``.

    ``p`` may lie in (0, 1); the result is then only a quasi-norm, which is
    accepted for orthant cones (the truncated l^q cone metric needs it) and
    rejected elsewhere by :class:`OrderedVectorSpace`.
    """

    p: float = 2.0
    weights: Optional[tuple] = None

    def __post_init__(self):
        if not (self.p > 0):
            raise ValueError(f"norm exponent must be positive, got {self.p}")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if any(not (x > 0) or not math.isfinite(x) for x in w):
                raise ValueError("norm weights must be positive and finite")
            object.__setattr__(self, "weights", w)

    @property
    def is_quasi(self) -> bool:
        return self.p < 1

    @property
    def is_euclidean(self) -> bool:
        return self.p == 2 and (self.weights is None or all(w == 1.0 for w in self.weights))

    def _scaled(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.weights is None:
            return v
        if len(self.weights) != v.shape[-1]:
            raise ValueError("norm weights do not match vector dimension")
        return v * np.asarray(self.weights)

    def __call__(self, v) -> float:
        a = np.abs(self._scaled(np.atleast_1d(v)))
        if a.size == 0:
            return 0.0
        if math.isinf(self.p):
            return float(a.max())
        if self.p == 2:
            return float(np.linalg.norm(a))
        if self.p == 1:
            return math.fsum(a.tolist())
        return math.fsum((a ** self.p).tolist()) ** (1.0 / self.p)

    def dual(self, y) -> float:
        """Dual norm ``||y / w||_q`` with ``1/p + 1/q = 1`` (p >= 1 only)."""
        if self.is_quasi:
            raise ValueError("quasi-norms have no useful dual norm")
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.weights is not None:
            y = y / np.asarray(self.weights)
        if self.p == 1:
            q = math.inf
        elif math.isinf(self.p):
            q = 1.0
        else:
            q = self.p / (self.p - 1.0)
        return NormSpec(q)(y)

    def subgradient(self, u) -> np.ndarray:
        """One element of the subdifferential of the norm at ``u``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        w = np.ones_like(u) if self.weights is None else np.asarray(self.weights)
        z = w * u
        if not np.any(z):
            return np.zeros_like(u)
        if self.p == 1:
            return w * np.sign(z)
        if math.isinf(self.p):
            g = np.zeros_like(u)
            i = int(np.argmax(np.abs(z)))
            g[i] = w[i] * np.sign(z[i])
            return g
        # rescale first so tiny inputs do not underflow; the result is 0-homogeneous
        a = np.abs(z) / np.max(np.abs(z))
        nrm = math.fsum(a ** self.p) ** (1.0 / self.p)
        return w * np.sign(z) * (a / nrm) ** (self.p - 1.0)

    def equivalence_constants(self, dim: int) -> tuple:
        """``(lo, hi)`` with ``lo*||v||_2 <= ||v|| <= hi*||v||_2`` on R^dim."""
        if math.isinf(self.p):
            e = -0.5
        else:
            e = 1.0 / self.p - 0.5
        scale = dim ** e
        lo, hi = min(1.0, scale), max(1.0, scale)
        if self.weights is not None:
            lo *= min(self.weights)
            hi *= max(self.weights)
        return lo, hi


EUCLIDEAN = NormSpec(2.0)


def _enumerate_rays(rows: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Extreme rays of the pointed cone ``{v : rows @ v >= 0}``.

    Brute force over all (dim-1)-subsets of rows; adequate for the small
    cones this library targets.
    """
    rows = np.asarray(rows, dtype=float)
    if dim == 1:
        cands = [np.array([1.0]), np.array([-1.0])]
    else:
        cands = []
        for idx in itertools.combinations(range(rows.shape[0]), dim - 1):
            sub = rows[list(idx)]
            _, s, vt = np.linalg.svd(sub)
            if np.sum(s > tol * max(1.0, s[0])) != dim - 1:
                continue
            ray = vt[-1]
            for r in (ray, -ray):
                cands.append(r)
    out = []
    for r in cands:
        r = r / np.linalg.norm(r)
        if np.all(rows @ r >= -1e-9):
            if not any(np.allclose(r, o, atol=1e-9) for o in out):
                out.append(r)
    return np.array(out).reshape(-1, dim)


# ---------------------------------------------------------------------------
# Cones
# ---------------------------------------------------------------------------


class Cone:
    """Base class; subclasses set ``dim`` and implement the primitives."""

    dim: int
    self_dual = False

    def slack(self, v: np.ndarray) -> float:
        """Smallest slack across the defining inequalities."""
        raise NotImplementedError

    def contains(self, v, tol: float = DEFAULT_TOLERANCE) -> bool:
        v = _as_vector(v, self.dim)
        return self.slack(v) >= -tol * (1.0 + np.linalg.norm(v))

    def interior_contains(self, v, margin: float = DEFAULT_MARGIN) -> bool:
        if not margin > 0:
            raise ValueError("interior margin must be positive")
        v = _as_vector(v, self.dim)
        return self.slack(v) >= margin

    def project(self, v) -> np.ndarray:
        raise NotImplementedError

    def project_dual(self, v) -> np.ndarray:
        """Euclidean projection onto the dual cone, via Moreau."""
        v = _as_vector(v, self.dim)
        return v + self.project(-v)

    def dual_contains(self, v, tol: float = DEFAULT_TOLERANCE) -> bool:
        raise NotImplementedError

    def interior_witness(self) -> Optional[np.ndarray]:
        raise NotImplementedError

    def extreme_directions(self) -> np.ndarray:
        """A finite set of unit directions on the boundary (rows)."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One nonzero point of the cone; roughly a third land on the boundary."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Orthant(Cone):
    dim: int
    self_dual = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("cone dimension must be positive")

    def slack(self, v):
        return float(np.min(v))

    def project(self, v):
        return np.maximum(_as_vector(v, self.dim), 0.0)

    def dual_contains(self, v, tol=DEFAULT_TOLERANCE):
        return self.contains(v, tol)

    def interior_witness(self):
        return np.ones(self.dim)

    def extreme_directions(self):
        return np.eye(self.dim)

    def sample(self, rng):
        v = np.abs(rng.standard_normal(self.dim))
        if self.dim > 1 and rng.random() < 1 / 3:
            mask = rng.random(self.dim) < 0.5
            mask[rng.integers(self.dim)] = True
            v = v * mask
        return v

    def to_dict(self):
        return {"type": "orthant"}


@dataclass(frozen=True)
class SecondOrder(Cone):
    """``{(x, t) : t >= ||x||_2}``; the last coordinate is ``t``."""

    dim: int
    self_dual = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("cone dimension must be positive")

    def slack(self, v):
        return float(v[-1] - np.linalg.norm(v[:-1]))

    def project(self, v):
        v = _as_vector(v, self.dim)
        x, t = v[:-1], v[-1]
        s = np.linalg.norm(x)
        if s <= t:
            return v.copy()
        if s <= -t:
            return np.zeros_like(v)
        a = 0.5 * (s + t)
        return np.append(a * x / s, a)

    def dual_contains(self, v, tol=DEFAULT_TOLERANCE):
        return self.contains(v, tol)

    def interior_witness(self):
        w = np.zeros(self.dim)
        w[-1] = 1.0
        return w

    def extreme_directions(self):
        n = self.dim - 1
        if n == 0:
            return np.ones((1, 1))
        dirs = []
        for i in range(n):
            for sgn in (1.0, -1.0):
                d = np.zeros(self.dim)
                d[i], d[-1] = sgn, 1.0
                dirs.append(d / math.sqrt(2))
        axis = np.zeros(self.dim)
        axis[-1] = 1.0
        dirs.append(axis)
        return np.array(dirs)

    def sample(self, rng):
        x = rng.standard_normal(self.dim - 1)
        r = np.linalg.norm(x)
        t = r if rng.random() < 1 / 3 else r + rng.exponential()
        if t == 0:
            t = 1.0
        return np.append(x, t)

    def to_dict(self):
        return {"type": "second-order"}


class _Polyhedral(Cone):
    """Shared machinery for cones with a ray form and a facet form."""

    _rays: Optional[np.ndarray] = None
    _facets: Optional[np.ndarray] = None

    @property
    def rays(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def facets(self) -> np.ndarray:
        raise NotImplementedError

    def extreme_directions(self):
        return self.rays

    def sample(self, rng):
        r = self.rays
        lam = rng.exponential(size=r.shape[0])
        if r.shape[0] > 1 and rng.random() < 1 / 3:
            mask = rng.random(r.shape[0]) < 0.5
            mask[rng.integers(r.shape[0])] = True
            lam = lam * mask
        v = lam @ r
        if not np.any(v):
            v = r[0].copy()
        return v


class Generators(_Polyhedral):
    """Cone generated by the rows of ``generators`` (nonnegative combinations)."""

    def __init__(self, generators):
        g = np.atleast_2d(np.asarray(generators, dtype=float))
        if g.ndim != 2 or g.shape[0] == 0:
            raise ValueError("generators must be a nonempty list of vectors")
        g.setflags(write=False)
        self.generators = g
        self.dim = g.shape[1]

    def __repr__(self):
        return f"Generators({self.generators.tolist()})"

    def __eq__(self, other):
        return isinstance(other, Generators) and np.array_equal(self.generators, other.generators)

    def __hash__(self):
        return hash(self.generators.tobytes())

    @property
    def rays(self):
        if self._rays is None:
            norms = np.linalg.norm(self.generators, axis=1)
            g = self.generators[norms > 0] / norms[norms > 0, None]
            self._rays = g
        return self._rays

    @property
    def facets(self):
        """Unit inward facet normals; empty unless the cone is full-dimensional."""
        if self._facets is None:
            if np.linalg.matrix_rank(self.generators) < self.dim:
                self._facets = np.zeros((0, self.dim))
            else:
                self._facets = _enumerate_rays(self.rays, self.dim)
        return self._facets

    def slack(self, v):
        f = self.facets
        if f.shape[0] == 0:
            return -math.inf
        return float(np.min(f @ v))

    def contains(self, v, tol=DEFAULT_TOLERANCE):
        v = _as_vector(v, self.dim)
        _, resid = nnls(self.generators.T, v, maxiter=100 * max(self.dim, self.generators.shape[0]))
        return resid <= tol * (1.0 + np.linalg.norm(v))

    def project(self, v):
        v = _as_vector(v, self.dim)
        try:
            lam, _ = nnls(self.generators.T, v, maxiter=100 * max(self.dim, self.generators.shape[0]))
        except RuntimeError as exc:  # scipy raises on iteration cap
            p = np.zeros_like(v)
            raise ProjectionError(str(exc), p, float(np.linalg.norm(v))) from exc
        return self.generators.T @ lam

    def dual_contains(self, v, tol=DEFAULT_TOLERANCE):
        v = _as_vector(v, self.dim)
        scale = np.linalg.norm(self.generators, axis=1) * (1.0 + np.linalg.norm(v))
        return bool(np.all(self.generators @ v >= -tol * scale))

    def interior_witness(self):
        if self.facets.shape[0] == 0:
            return None
        w = self.rays.sum(axis=0)
        return w if self.slack(w) > 0 else None

    def to_dict(self):
        return {"type": "generators", "G": self.generators.tolist()}


class Halfspaces(_Polyhedral):
    """Cone ``{v : A v >= 0}``."""

    def __init__(self, A, projection: str = "nnls"):
        a = np.atleast_2d(np.asarray(A, dtype=float))
        if a.ndim != 2 or a.shape[0] == 0:
            raise ValueError("halfspace matrix must be nonempty")
        if projection not in ("nnls", "dykstra"):
            raise ValueError(f"unknown projection method {projection!r}")
        a.setflags(write=False)
        self.A = a
        self.dim = a.shape[1]
        self.projection = projection

    def __repr__(self):
        return f"Halfspaces({self.A.tolist()})"

    def __eq__(self, other):
        return isinstance(other, Halfspaces) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())

    @property
    def rays(self):
        if self._rays is None:
            self._rays = _enumerate_rays(self.A, self.dim)
        return self._rays

    @property
    def facets(self):
        return self.A

    def slack(self, v):
        return float(np.min(self.A @ v))

    def project(self, v):
        if self.projection == "dykstra":
            return dykstra_project(self.A, v)
        v = _as_vector(v, self.dim)
        # polar cone is -cone(rows of A); project onto it and subtract
        mu, _ = nnls(-self.A.T, v, maxiter=100 * max(self.dim, self.A.shape[0]))
        return v + self.A.T @ mu

    def dual_contains(self, v, tol=DEFAULT_TOLERANCE):
        v = _as_vector(v, self.dim)
        _, resid = nnls(self.A.T, v, maxiter=100 * max(self.dim, self.A.shape[0]))
        return resid <= tol * (1.0 + np.linalg.norm(v))

    def interior_witness(self):
        n = self.dim
        # maximise s subject to A v >= s, -1 <= v <= 1
        c = np.zeros(n + 1)
        c[-1] = -1.0
        a_ub = np.hstack([-self.A, np.ones((self.A.shape[0], 1))])
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(self.A.shape[0]),
                      bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
        if res.status != 0 or res.x[-1] <= 1e-12:
            return None
        return res.x[:n]

    def to_dict(self):
        return {"type": "halfspaces", "A": self.A.tolist()}


def dykstra_project(A, v, max_sweeps: int = 10_000, tol: float = 1e-13) -> np.ndarray:
    """Dykstra's alternating projections onto ``{v : A v >= 0}``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    x = np.asarray(v, dtype=float).copy()
    incr = np.zeros((A.shape[0], x.shape[0]))
    sq = np.einsum("ij,ij->i", A, A)
    for _ in range(max_sweeps):
        prev = x.copy()
        for i, a in enumerate(A):
            y = x + incr[i]
            s = a @ y
            x = y - (min(s, 0.0) / sq[i]) * a
            incr[i] = y - x
        if np.linalg.norm(x - prev) <= tol * (1.0 + np.linalg.norm(v)):
            return x
    resid = float(max(0.0, -np.min(A @ x)))
    raise ProjectionError("Dykstra projection did not converge", x, resid)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ConeReport:
    pointed: bool
    interior_witness: Optional[np.ndarray]
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_cone(cone: Cone, tol: float = DEFAULT_TOLERANCE) -> ConeReport:
    """Check nonemptiness of the interior, pointedness and nonzero generators.

    Never raises for a malformed cone; problems go into ``failures``.
    """
    failures = []
    pointed = True
    if isinstance(cone, Generators):
        g = cone.generators
        norms = np.linalg.norm(g, axis=1)
        if np.any(norms == 0):
            failures.append("zero generator")
        if np.any(norms > 0):
            gn = (g[norms > 0] / norms[norms > 0, None]).T
            # least squares on the simplex: min ||G nu|| with sum(nu) = 1, nu >= 0
            w = 1e4
            lhs = np.vstack([gn, w * np.ones((1, gn.shape[1]))])
            rhs = np.append(np.zeros(gn.shape[0]), w)
            nu, _ = nnls(lhs, rhs, maxiter=100 * lhs.shape[1])
            if nu.sum() > 0 and np.linalg.norm(gn @ (nu / nu.sum())) < max(tol, 1e-9):
                pointed = False
                failures.append("cone contains a line (not pointed)")
    elif isinstance(cone, Halfspaces):
        if np.linalg.matrix_rank(cone.A) < cone.dim:
            pointed = False
            failures.append("cone contains a line (not pointed)")
    witness = None
    try:
        witness = cone.interior_witness()
    except Exception as exc:  # report-only
        failures.append(f"interior search failed: {exc}")
    if witness is None:
        failures.append("empty interior")
    return ConeReport(pointed=pointed, interior_witness=witness, failures=failures)


# ---------------------------------------------------------------------------
# Ordered vector space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderedVectorSpace:
    """R^dim with a norm, an ordering cone and a membership tolerance."""

    cone: Cone
    norm: NormSpec = EUCLIDEAN
    tolerance: float = DEFAULT_TOLERANCE
    margin: float = DEFAULT_MARGIN
    validate: bool = True

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.norm.weights is not None and len(self.norm.weights) != self.dim:
            raise ValueError("norm weights do not match the cone dimension")
        if self.norm.is_quasi and not isinstance(self.cone, Orthant):
            raise ValueError("quasi-norms (p < 1) are only supported on the orthant")
        if self.validate:
            report = validate_cone(self.cone, self.tolerance)
            if not report.ok:
                raise ValueError("invalid cone: " + "; ".join(report.failures))

    @property
    def dim(self) -> int:
        return self.cone.dim

    def vector(self, v) -> np.ndarray:
        return _as_vector(v, self.dim)


def cone_contains(cone: Cone, v, tol: float = DEFAULT_TOLERANCE) -> bool:
    return cone.contains(v, tol)


def interior_contains(cone: Cone, v, margin: float = DEFAULT_MARGIN) -> bool:
    return cone.interior_contains(v, margin)


def project_onto_cone(cone: Cone, v) -> np.ndarray:
    return cone.project(v)


def dual_contains(cone: Cone, v, tol: float = DEFAULT_TOLERANCE) -> bool:
    return cone.dual_contains(v, tol)


def leq(space: OrderedVectorSpace, x, y) -> bool:
    """``x <= y`` in the cone order."""
    x, y = space.vector(x), space.vector(y)
    return space.cone.contains(y - x, space.tolerance)


def strictly_less(space: OrderedVectorSpace, x, y, margin: Optional[float] = None) -> bool:
    """``x << y``: ``y - x`` lies in the interior with slack at least ``margin``."""
    x, y = space.vector(x), space.vector(y)
    return space.cone.interior_contains(y - x, space.margin if margin is None else margin)


def sample_cone(cone: Cone, count: int, seed) -> np.ndarray:
    """``count`` cone points; sample ``i`` depends only on ``(seed, i)``."""
    out = np.empty((count, cone.dim))
    for i in range(count):
        out[i] = cone.sample(np.random.default_rng([int(seed), i]))
    return out


def estimate_normality_constant(space: OrderedVectorSpace, sample_count: int = 1000, seed=0) -> float:
    """Lower bound on the normal-cone constant K from ordered pairs ``0 <= x <= y``."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    norm, cone = space.norm, space.cone
    best = 0.0
    dirs = cone.extreme_directions()
    best = 1.0  # x = y
    for x, p in itertools.product(dirs, repeat=2):
        y = x + p
        ny = norm(y)
        if ny > 0:
            best = max(best, norm(x) / ny)
    for i in range(sample_count):
        rng = np.random.default_rng([int(seed), i])
        x = cone.sample(rng)
        p = cone.sample(rng) * rng.exponential()
        ny = norm(x + p)
        if ny > 0:
            best = max(best, norm(x) / ny)
    return best


def cone_from_dict(spec: dict, dim: Optional[int] = None) -> Cone:
    kind = spec.get("type")
    if kind == "orthant":
        return Orthant(int(dim))
    if kind == "second-order":
        return SecondOrder(int(dim))
    if kind == "generators":
        return Generators(spec["G"])
    if kind == "halfspaces":
        return Halfspaces(spec["A"])
    raise ValueError(f"unknown cone type {kind!r}")

