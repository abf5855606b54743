"""Transfer of contractive conditions from a cone metric to its scalar metric.

Covers the dominance lemma (``D(Tx,Ty) <= D*(x,y)`` gives ``d(Tx,Ty) <=
d*(x,y)``), the bounded-map companion ``psi`` of a cone map ``phi``, and
twelve classical contractive conditions checked side by side on the cone
and on the metrized distance.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cone import Orthant, OrderedVectorSpace, leq, sample_cone
from .metrize import EquivalentMetric

DEFAULT_DIRECTIONS = 256


class ConeMapError(ValueError):
    """A cone map sent a cone point outside the cone."""

    def __init__(self, x, image):
        super().__init__(f"map leaves the cone: phi({np.round(x, 6).tolist()}) = {np.round(image, 6).tolist()}")
        self.x = x
        self.image = image


class BranchHypothesisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bounded cone maps
# ---------------------------------------------------------------------------


class BoundedConeMap:
    linear = False

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError


class LinearMatrix(BoundedConeMap):
    linear = True

    def __init__(self, M):
        self.M = np.atleast_2d(np.asarray(M, dtype=float))

    def __call__(self, x):
        return self.M @ np.atleast_1d(np.asarray(x, dtype=float))


class ScalarOnRplus(BoundedConeMap):
    """Map on the half-line ``P = [0, inf)`` given by a real function."""

    def __init__(self, f: Callable[[float], float]):
        self.f = f

    def __call__(self, x):
        return np.atleast_1d(float(self.f(float(np.asarray(x).reshape(-1)[0]))))


class CallableConeMap(BoundedConeMap):
    """Arbitrary (possibly nonlinear) map ``P -> P`` given as a callable."""

    def __init__(self, fn: Callable):
        self.fn = fn

    def __call__(self, x):
        return np.atleast_1d(np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float))


def _check_image(space, x, y):
    if not space.cone.contains(y, 1e-9):
        raise ConeMapError(x, y)


def _unit_directions(space: OrderedVectorSpace, sample_count: int, seed) -> np.ndarray:
    """Extreme directions, the all-generators direction, then seeded samples.

    The sampled part for ``n`` samples is a prefix of the one for ``m > n``,
    so suprema over these sets never shrink as ``sample_count`` grows.
    """
    cone = space.cone
    ext = cone.extreme_directions()
    fixed = list(ext) + [ext.sum(axis=0)]
    if not isinstance(cone, Orthant):
        fixed.append(cone.interior_witness())
    dirs = np.vstack([np.array(fixed), sample_cone(cone, sample_count, seed)])
    norms = np.array([space.norm(d) for d in dirs])
    keep = norms > 0
    return dirs[keep] / norms[keep, None]


def _linear_refinements(phi: LinearMatrix, space: OrderedVectorSpace) -> list:
    """Deterministic local maximisers of ``||Mx||_2 / ||x||_2`` over the cone."""
    if not space.norm.is_euclidean:
        return []
    M = phi.M
    _, _, vt = np.linalg.svd(M)
    starts = [vt[0], -vt[0]] + list(space.cone.extreme_directions())
    out = []
    gram = M.T @ M
    for x in starts:
        x = space.cone.project(x)
        if not np.linalg.norm(x) > 0:
            continue
        x = x / np.linalg.norm(x)
        for _ in range(200):
            nxt = space.cone.project(gram @ x)
            nn = np.linalg.norm(nxt)
            if not nn > 0:
                break
            nxt = nxt / nn
            if np.linalg.norm(nxt - x) < 1e-14:
                x = nxt
                break
            x = nxt
        out.append(x)
    return out


def phi_operator_norm(phi: BoundedConeMap, space: OrderedVectorSpace, sample_count: int = DEFAULT_DIRECTIONS,
                      seed=0) -> float:
    """Sampled ``sup ||phi(x)|| / ||x||`` over nonzero cone points.

    A lower bound on the true value.  Exact for diagonal maps on the orthant
    and for entrywise-positive matrices under the Euclidean norm.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    norm = space.norm
    dirs = list(_unit_directions(space, sample_count, seed))
    if isinstance(phi, LinearMatrix):
        dirs += _linear_refinements(phi, space)
        scales = [1.0]
    else:
        scales = [10.0 ** k for k in range(-6, 7)]
    best = 0.0
    for d in dirs:
        nd = norm(d)
        if not nd > 0:
            continue
        for s in scales:
            x = s * d
            y = phi(x)
            _check_image(space, x, y)
            best = max(best, norm(y) / (s * nd))
    return best


def psi_function(phi: BoundedConeMap, space: OrderedVectorSpace, sample_count: int = DEFAULT_DIRECTIONS,
                 seed=0) -> Callable[[float], float]:
    """``t -> sup over unit cone directions u of ||phi(t u)||``."""
    norm = space.norm
    if isinstance(phi, LinearMatrix):
        op = phi_operator_norm(phi, space, sample_count, seed)
        return lambda t: float(t) * op
    if isinstance(phi, ScalarOnRplus) and isinstance(space.cone, Orthant) and space.dim == 1:
        # the only unit ray of [0, inf) is 1
        w = 1.0 if space.norm.weights is None else space.norm.weights[0]
        return lambda t: norm(phi(np.array([float(t) / w])))
    dirs = _unit_directions(space, sample_count, seed)

    def psi(t):
        if t < 0:
            raise ValueError("psi is defined on [0, inf)")
        best = 0.0
        for d in dirs:
            y = phi(t * d)
            _check_image(space, t * d, y)
            best = max(best, norm(y))
        return best

    return psi


def psi_from_phi(phi: BoundedConeMap, space: OrderedVectorSpace, t: float, sample_count: int = DEFAULT_DIRECTIONS,
                 seed=0) -> float:
    if t < 0:
        raise ValueError("psi is defined on [0, inf)")
    return psi_function(phi, space, sample_count, seed)(t)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class Violation:
    x: object
    y: object
    cone_lhs: object
    cone_rhs: object
    scalar_lhs: float
    scalar_rhs: float
    slack: float


@dataclass
class TransferReport:
    samples_checked: int = 0
    cone_holds: int = 0
    scalar_holds_given_cone: int = 0
    violations: list = field(default_factory=list)
    label: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "label": self.label,
            "samples_checked": self.samples_checked,
            "cone_holds": self.cone_holds,
            "scalar_holds_given_cone": self.scalar_holds_given_cone,
            "violations": [{k: _jsonable(v) for k, v in asdict(x).items()} for x in self.violations],
        }


def _pairs(points: Sequence, max_pairs: Optional[int], seed):
    pairs = list(itertools.product(range(len(points)), repeat=2))
    if max_pairs is not None and len(pairs) > max_pairs:
        rng = np.random.default_rng(seed)
        idx = sorted(rng.choice(len(pairs), size=max_pairs, replace=False))
        pairs = [pairs[i] for i in idx]
    return [(points[i], points[j]) for i, j in pairs]


def _metric_with_error(cm, space):
    """Cached metrized distance; also tracks the largest certified error."""
    metric = EquivalentMetric(cm, space)
    cache = {}
    worst = [0.0]

    def d(x, y):
        key = (_key(x), _key(y))
        if key not in cache:
            r = metric.result(x, y)
            worst[0] = max(worst[0], r.error_bound)
            cache[key] = r.value
        return cache[key]

    return d, worst


def _key(x):
    if isinstance(x, np.ndarray):
        return ("arr", x.tobytes(), x.shape)
    return x


# ---------------------------------------------------------------------------
# Dominance lemma and the psi theorem
# ---------------------------------------------------------------------------


def check_dominance_transfer(D, Dstar, T: Callable, points: Sequence, tol: float = 1e-8,
                             max_pairs: Optional[int] = None, seed=0) -> TransferReport:
    """Where ``D(Tx,Ty) <= D*(x,y)`` holds, check ``d(Tx,Ty) <= d*(x,y) + tol``."""
    if D.space.dim != Dstar.space.dim or type(D.space.cone) is not type(Dstar.space.cone):
        raise ValueError("cone metrics must share their codomain")
    space = D.space
    d, err = _metric_with_error(D, space)
    ds, err_s = _metric_with_error(Dstar, space)
    rep = TransferReport(label="dominance")
    for x, y in _pairs(points, max_pairs, seed):
        rep.samples_checked += 1
        tx, ty = T(x), T(y)
        lhs, rhs = D(tx, ty), Dstar(x, y)
        if not leq(space, lhs, rhs):
            continue
        rep.cone_holds += 1
        sl, sr = d(tx, ty), ds(x, y)
        slack = tol + err[0] + err_s[0]
        if sl <= sr + slack:
            rep.scalar_holds_given_cone += 1
        else:
            rep.violations.append(Violation(x, y, lhs, rhs, sl, sr, slack))
    return rep


def _spot_check_decreasing(psi, grid=None) -> bool:
    grid = np.geomspace(1e-4, 1e4, 41) if grid is None else grid
    vals = [psi(t) for t in grid]
    return all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in zip(vals, vals[1:]))


def _is_increasing_linear(phi, space) -> bool:
    if not isinstance(phi, LinearMatrix):
        return False
    return all(space.cone.contains(phi(r), 1e-9) for r in space.cone.extreme_directions())


def check_phi_transfer(D, T: Callable, phi: BoundedConeMap, branch: Optional[str], points: Sequence,
                       tol: float = 1e-8, sample_count: int = DEFAULT_DIRECTIONS, seed=0,
                       max_pairs: Optional[int] = None) -> TransferReport:
    """Check ``d(Tx,Ty) <= psi(||D(x,y)||)`` and, per branch, ``<= psi(d(x,y))``.

    ``branch`` is ``"psi-decreasing"``, ``"phi-linear-increasing"`` or
    ``None`` (unconditional conclusion only).  A branch whose hypothesis
    fails its spot check raises :class:`BranchHypothesisError`.
    """
    space = D.space
    psi = psi_function(phi, space, sample_count, seed)
    if branch == "psi-decreasing":
        if not _spot_check_decreasing(psi):
            raise BranchHypothesisError("psi is not decreasing on the spot-check grid")
    elif branch == "phi-linear-increasing":
        if not _is_increasing_linear(phi, space):
            raise BranchHypothesisError("phi is not a linear map sending the cone into itself")
    elif branch is not None:
        raise ValueError(f"unknown branch {branch!r}")
    d, err = _metric_with_error(D, space)
    rep = TransferReport(label=f"phi:{branch}")
    for x, y in _pairs(points, max_pairs, seed):
        rep.samples_checked += 1
        tx, ty = T(x), T(y)
        lhs, dxy = D(tx, ty), D(x, y)
        rhs = phi(dxy)
        _check_image(space, dxy, rhs)
        if not leq(space, lhs, rhs):
            continue
        rep.cone_holds += 1
        sl = d(tx, ty)
        slack = tol + err[0]
        bounds = [psi(space.norm(dxy))]
        if branch is not None:
            bounds.append(psi(d(x, y)))
        sr = min(bounds)
        if sl <= sr + slack:
            rep.scalar_holds_given_cone += 1
        else:
            rep.violations.append(Violation(x, y, lhs, rhs, sl, sr, slack))
    return rep


# ---------------------------------------------------------------------------
# Contractive conditions
# ---------------------------------------------------------------------------


def _check_unit(name, v, lo=0.0, hi=1.0, open_lo=False):
    ok = (v > lo if open_lo else v >= lo) and v < hi
    if not ok:
        left = "(" if open_lo else "["
        raise ValueError(f"{name}={v} outside {left}{lo}, {hi})")


@dataclass(frozen=True)
class ContractiveCondition:
    kind = ""

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        d.update({k: _jsonable(v) for k, v in asdict(self).items()})
        return d


@dataclass(frozen=True)
class Banach(ContractiveCondition):
    """``D(Tx,Ty) <= alpha D(x,y)``."""
    alpha: float
    kind = "banach"

    def __post_init__(self):
        _check_unit("alpha", self.alpha)


@dataclass(frozen=True)
class Kannan(ContractiveCondition):
    """``D(Tx,Ty) <= lam (D(Tx,x) + D(Ty,y))``."""
    lam: float
    kind = "kannan"

    def __post_init__(self):
        _check_unit("lambda", self.lam, 0.0, 0.5)


@dataclass(frozen=True)
class Chatterjea(ContractiveCondition):
    """``D(Tx,Ty) <= lam (D(Tx,y) + D(Ty,x))``."""
    lam: float
    kind = "chatterjea"

    def __post_init__(self):
        _check_unit("lambda", self.lam, 0.0, 0.5)


@dataclass(frozen=True)
class TwoTerm(ContractiveCondition):
    """``D(Tx,Ty) <= alpha D(x,y) + beta D(Tx,y)``."""
    alpha: float
    beta: float
    kind = "two-term"

    def __post_init__(self):
        _check_unit("alpha", self.alpha)
        _check_unit("beta", self.beta)


@dataclass(frozen=True)
class QuasiMax5(ContractiveCondition):
    """Some ``u`` of ``D(x,y), D(x,Tx), D(y,Ty), (D(x,Ty)+D(y,Tx))/2`` has ``D(Tx,Ty) <= alpha u``."""
    alpha: float
    kind = "quasi-max"

    def __post_init__(self):
        _check_unit("alpha", self.alpha, open_lo=True)


@dataclass(frozen=True)
class QuasiMax5Half(ContractiveCondition):
    """As :class:`QuasiMax5` with the cross terms halved separately."""
    beta: float
    kind = "quasi-max-half"

    def __post_init__(self):
        _check_unit("beta", self.beta, open_lo=True)


@dataclass(frozen=True)
class ZamfirescuMax3(ContractiveCondition):
    """Some ``u`` of ``D(x,y)``, the mean self-gap, the mean cross-gap."""
    beta: float
    kind = "zamfirescu"

    def __post_init__(self):
        _check_unit("beta", self.beta, open_lo=True)


@dataclass(frozen=True)
class FiveCoefficient(ContractiveCondition):
    a: tuple
    kind = "five-coefficient"

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if len(a) != 5 or any(x < 0 for x in a) or not sum(a) < 1:
            raise ValueError(f"five coefficients must be nonnegative with sum < 1, got {a}")


@dataclass(frozen=True)
class HalfBetaMax5(ContractiveCondition):
    beta: float
    kind = "half-beta-max"

    def __post_init__(self):
        _check_unit("beta", self.beta, open_lo=True)


@dataclass(frozen=True)
class HardyRogersSym(ContractiveCondition):
    a: tuple
    kind = "hardy-rogers"

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if len(a) != 4 or any(x < 0 for x in a) or not a[0] + a[1] + a[2] + 2 * a[3] < 1:
            raise ValueError(f"coefficients must be nonnegative with a1+a2+a3+2a4 < 1, got {a}")


@dataclass(frozen=True)
class IteratedPower(ContractiveCondition):
    """``D(T^m x, T^n y) <= k D(z, t)`` over distinct ``z, t`` drawn from the orbit set.

    With ``existential=True`` a single admissible pair suffices instead.
    """
    m: int
    n: int
    k: float
    existential: bool = False
    kind = "iterated-power"

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be at least 1")
        _check_unit("k", self.k)


@dataclass(frozen=True)
class Dominance(ContractiveCondition):
    """``D(Tx,Ty) <= D*(x,y)`` for a second cone metric ``D*``."""
    dstar: object = field(default=None, compare=False)
    kind = "dominance"

    def to_dict(self):
        d = {"kind": self.kind}
        if self.dstar is not None:
            d["dstar"] = self.dstar.to_dict()
        return d


CONDITION_KINDS = {
    cls.kind: cls
    for cls in (Banach, Kannan, Chatterjea, TwoTerm, QuasiMax5, QuasiMax5Half, ZamfirescuMax3,
                FiveCoefficient, HalfBetaMax5, HardyRogersSym, IteratedPower, Dominance)
}


def parse_condition(spec: dict, dstar=None) -> ContractiveCondition:
    """Build a condition from ``{"kind": ..., coefficients...}``."""
    spec = dict(spec)
    spec.pop("schema", None)
    kind = spec.pop("kind", None)
    if kind not in CONDITION_KINDS:
        raise ValueError(f"unknown condition kind {kind!r}")
    if "lambda" in spec:
        spec["lam"] = spec.pop("lambda")
    if kind == "dominance":
        spec.pop("dstar", None)
        if spec:
            raise ValueError(f"unexpected keys {sorted(spec)}")
        return Dominance(dstar)
    if kind in ("five-coefficient", "hardy-rogers"):
        spec["a"] = tuple(spec["a"])
    return CONDITION_KINDS[kind](**spec)


def _orbit(T, x, steps):
    out = [x]
    for _ in range(steps):
        out.append(T(out[-1]))
    return out


def _distinct_pairs(items):
    for z, t in itertools.product(items, repeat=2):
        if not np.array_equal(np.asarray(z), np.asarray(t)):
            yield z, t


def _terms(cond, F, T, x, y):
    """Left side and right-hand candidates of ``cond`` for a distance ``F``.

    Returns ``(lhs, rhs_list, any_of)``: the condition holds when ``lhs`` is
    dominated by every element of ``rhs_list`` (``any_of=False``) or by at
    least one (``any_of=True``).
    """
    tx, ty = T(x), T(y)
    if isinstance(cond, IteratedPower):
        ox, oy = _orbit(T, x, cond.m), _orbit(T, y, cond.n)
        lhs = F(ox[cond.m], oy[cond.n])
        pool = [x, y] + ox[1:] + oy[1:]
        rhs = [cond.k * F(z, t) for z, t in _distinct_pairs(pool)]
        return lhs, rhs, cond.existential
    lhs = F(tx, ty)
    if isinstance(cond, Banach):
        return lhs, [cond.alpha * F(x, y)], False
    if isinstance(cond, Kannan):
        return lhs, [cond.lam * (F(tx, x) + F(ty, y))], False
    if isinstance(cond, Chatterjea):
        return lhs, [cond.lam * (F(tx, y) + F(ty, x))], False
    if isinstance(cond, TwoTerm):
        return lhs, [cond.alpha * F(x, y) + cond.beta * F(tx, y)], False
    if isinstance(cond, QuasiMax5):
        us = [F(x, y), F(x, tx), F(y, ty), 0.5 * (F(x, ty) + F(y, tx))]
        return lhs, [cond.alpha * u for u in us], True
    if isinstance(cond, QuasiMax5Half):
        us = [F(x, y), F(x, tx), F(y, ty), 0.5 * F(x, ty), 0.5 * F(y, tx)]
        return lhs, [cond.beta * u for u in us], True
    if isinstance(cond, ZamfirescuMax3):
        us = [F(x, y), 0.5 * (F(x, tx) + F(y, ty)), 0.5 * (F(x, ty) + F(y, tx))]
        return lhs, [cond.beta * u for u in us], True
    if isinstance(cond, FiveCoefficient):
        a = cond.a
        return lhs, [a[0] * F(x, y) + a[1] * F(x, tx) + a[2] * F(y, ty)
                     + a[3] * F(x, ty) + a[4] * F(y, tx)], False
    if isinstance(cond, HalfBetaMax5):
        us = [F(x, y), F(x, tx), F(y, ty), F(x, ty), F(y, tx)]
        return lhs, [0.5 * cond.beta * u for u in us], True
    if isinstance(cond, HardyRogersSym):
        a = cond.a
        return lhs, [a[0] * F(x, y) + a[1] * F(x, tx) + a[2] * F(y, ty)
                     + a[3] * (F(x, ty) + F(y, tx))], False
    raise TypeError(f"unsupported condition {cond!r}")


def eval_condition_cone(cond: ContractiveCondition, D, T: Callable, x, y, tol: Optional[float] = None) -> bool:
    """Truth of the cone-order form of ``cond`` at ``(x, y)``."""
    space = D.space
    if tol is not None:
        space = OrderedVectorSpace(space.cone, space.norm, tol, space.margin, validate=False)
    if isinstance(cond, Dominance):
        return leq(space, D(T(x), T(y)), cond.dstar(x, y))
    lhs, rhs, any_of = _terms(cond, D, T, x, y)
    if not rhs:
        return True
    checks = (leq(space, lhs, r) for r in rhs)
    return any(checks) if any_of else all(checks)


def eval_condition_scalar(cond: ContractiveCondition, d: Callable, T: Callable, x, y, tol: float = 1e-8,
                          dstar: Optional[Callable] = None) -> bool:
    """Truth of the real-valued form of ``cond`` for the scalar metric ``d``.

    "Some listed u" becomes the maximum over the list, and the all-pairs
    form of the iterated condition becomes the minimum.
    """
    if isinstance(cond, Dominance):
        if dstar is None:
            raise ValueError("dominance needs the scalar companion of D*")
        return d(T(x), T(y)) <= dstar(x, y) + tol
    lhs, rhs, any_of = _scalar_sides(cond, d, T, x, y)
    return rhs is None or lhs <= rhs + tol


def _scalar_sides(cond, d, T, x, y):
    lhs, rhs, any_of = _terms(cond, d, T, x, y)
    if not rhs:
        return lhs, None, any_of
    return lhs, (max(rhs) if any_of else min(rhs)), any_of


def check_corollary(cond: ContractiveCondition, D, T: Callable, points: Sequence, tol: float = 1e-8,
                    space: Optional[OrderedVectorSpace] = None, max_pairs: Optional[int] = None,
                    seed=0) -> TransferReport:
    """Where the cone form of ``cond`` holds, require the scalar form on ``d``.

    The scalar slack is ``tol`` plus twice the largest certified metrization
    error met so far (zero on the exact solver paths).
    """
    if space is not None and space is not D.space:
        raise ValueError("space must be the codomain of D")
    if isinstance(cond, Dominance):
        rep = check_dominance_transfer(D, cond.dstar if cond.dstar is not None else D, T, points, tol,
                                       max_pairs, seed)
        rep.label = cond.kind
        return rep
    d, err = _metric_with_error(D, D.space)
    rep = TransferReport(label=cond.kind)
    for x, y in _pairs(points, max_pairs, seed):
        rep.samples_checked += 1
        if not eval_condition_cone(cond, D, T, x, y):
            continue
        rep.cone_holds += 1
        slack = tol + 2 * err[0]
        if eval_condition_scalar(cond, d, T, x, y, slack):
            rep.scalar_holds_given_cone += 1
        else:
            lhs, rhs, _ = _terms(cond, D, T, x, y)
            sl, sr, _ = _scalar_sides(cond, d, T, x, y)
            rep.violations.append(Violation(x, y, lhs, rhs, sl, sr, slack))
    return rep

