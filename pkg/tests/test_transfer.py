import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemetric import (
    Banach,
    CallableConeMap,
    Dominance,
    FiveCoefficient,
    HardyRogersSym,
    IteratedPower,
    Kannan,
    LinearMatrix,
    NormSpec,
    OrderedVectorSpace,
    Orthant,
    QuasiMax5,
    ScalarOnRplus,
    check_corollary,
    check_dominance_transfer,
    check_phi_transfer,
    eval_condition_cone,
    eval_condition_scalar,
    equivalent_metric,
    parse_condition,
    ProductConeMetric,
    phi_operator_norm,
    psi_from_phi,
    random_cone_metric_table,
)
from conemetric.metrics import FiniteTableConeMetric
from conemetric.transfer import BranchHypothesisError, ConeMapError, psi_function

import families

R2 = OrderedVectorSpace(Orthant(2))
RPLUS = OrderedVectorSpace(Orthant(1))


def table(entries, space=R2):
    labels = sorted({p for pair in entries for p in pair})
    return FiniteTableConeMetric(labels, {k: np.full(space.dim, v) for k, v in entries.items()}, space)


def test_operator_norm_examples():
    assert phi_operator_norm(LinearMatrix(np.diag([2.0, 3.0])), R2) == pytest.approx(3.0)
    assert phi_operator_norm(LinearMatrix(np.eye(2)), R2) == pytest.approx(1.0)
    assert phi_operator_norm(LinearMatrix(np.zeros((2, 2))), R2) == 0.0


def test_psi_examples():
    f = ScalarOnRplus(lambda x: x / (1 + x))
    assert psi_from_phi(f, RPLUS, 1.0) == pytest.approx(0.5)
    assert psi_from_phi(LinearMatrix(np.diag([2.0, 3.0])), R2, 2.0) == pytest.approx(6.0)
    assert psi_from_phi(LinearMatrix(np.diag([2.0, 3.0])), R2, 0.0) == 0.0
    assert psi_from_phi(f, RPLUS, 0.0) == 0.0
    with pytest.raises(ValueError):
        psi_from_phi(f, RPLUS, -1.0)


def test_map_leaving_cone_is_reported():
    with pytest.raises(ConeMapError):
        phi_operator_norm(LinearMatrix([[1.0, 0.0], [-1.0, 1.0]]), R2)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_linear_psi_identity(t):
    rng = np.random.default_rng(4)
    M = LinearMatrix(rng.uniform(0.1, 1.0, (3, 3)))
    sp = OrderedVectorSpace(Orthant(3))
    op = phi_operator_norm(M, sp)
    assert psi_from_phi(M, sp, t) == pytest.approx(t * op, rel=1e-9)
    # positive matrices attain their spectral norm on the orthant
    assert op == pytest.approx(np.linalg.norm(M.M, 2), rel=1e-9)


@given(st.integers(1, 64), st.integers(1, 64))
@settings(max_examples=25, deadline=None)
def test_more_samples_never_lower_the_supremum(a, b):
    lo, hi = sorted((a, b))
    sp = OrderedVectorSpace(Orthant(3), NormSpec(1.0))
    phi = CallableConeMap(lambda x: np.sqrt(np.abs(x)) + x[::-1])
    assert phi_operator_norm(phi, sp, lo) <= phi_operator_norm(phi, sp, hi)
    assert psi_from_phi(phi, sp, 2.0, lo) <= psi_from_phi(phi, sp, 2.0, hi)


def test_psi_dominates_samples():
    rng = np.random.default_rng(0)
    sp = OrderedVectorSpace(Orthant(2))
    for phi in (LinearMatrix(np.diag([2.0, 3.0])), LinearMatrix(rng.uniform(0, 1, (2, 2)))):
        psi = psi_function(phi, sp)
        for _ in range(200):
            x = rng.exponential(size=2)
            assert sp.norm(phi(x)) <= psi(sp.norm(x)) + 1e-8


def test_phi_transfer_scalar_example_on_rplus():
    # 1-dimensional tables: D is a nonnegative number and T is random
    f = ScalarOnRplus(lambda x: x / (1 + x))
    for seed in range(5):
        D = random_cone_metric_table(6, RPLUS, seed=seed)
        T = dict(zip(D.labels, np.random.default_rng(seed).permutation(D.labels))).__getitem__
        rep = check_phi_transfer(D, T, f, None, D.labels)
        assert rep.ok


def test_phi_transfer_linear_branch_reduces_to_banach():
    half = LinearMatrix(0.5 * np.eye(3))
    sp = OrderedVectorSpace(Orthant(3))
    held = 0
    for seed in range(10):
        D = random_cone_metric_table(7, sp, seed=seed)
        T = dict(zip(D.labels, np.random.default_rng(seed).choice(D.labels, 7))).__getitem__
        rep = check_phi_transfer(D, T, half, "phi-linear-increasing", D.labels)
        assert rep.ok
        held += rep.cone_holds
    assert held > 0


def test_phi_zero_map_linear_branch():
    zero = LinearMatrix(np.zeros((2, 2)))
    D = random_cone_metric_table(4, R2, seed=1)
    const = lambda x: D.labels[0]  # noqa: E731
    rep = check_phi_transfer(D, const, zero, "phi-linear-increasing", D.labels)
    assert rep.ok and rep.cone_holds == rep.samples_checked


def test_branch_hypotheses_are_spot_checked():
    D = random_cone_metric_table(3, RPLUS, seed=0)
    f = ScalarOnRplus(lambda x: x / (1 + x))
    with pytest.raises(BranchHypothesisError):
        check_phi_transfer(D, lambda x: x, f, "psi-decreasing", D.labels)
    with pytest.raises(BranchHypothesisError):
        check_phi_transfer(D, lambda x: x, f, "phi-linear-increasing", D.labels)


def test_dominance_examples():
    D = random_cone_metric_table(6, R2, seed=3)
    assert check_dominance_transfer(D, D, lambda x: x, D.labels).ok
    Dstar = random_cone_metric_table(D.labels, R2, seed=4)
    rep = check_dominance_transfer(D, Dstar, lambda x: D.labels[0], D.labels)
    assert rep.ok and rep.cone_holds == rep.samples_checked


def test_eval_cone_examples():
    D = table({("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 1.0})
    assert not eval_condition_cone(Banach(0.5), D, lambda x: x, "a", "b")
    assert eval_condition_cone(Banach(0.5), D, lambda x: "c", "a", "b")


def test_kannan_constructed_table():
    # T: a -> b -> c -> c with D(b,c) = 3/7 D(a,b), so at (a, b)
    # D(Tx,Ty) = 0.3 (D(Tx,x) + D(Ty,y)) exactly
    D = table({("a", "b"): 7.0, ("b", "c"): 3.0, ("a", "c"): 5.0})
    T = {"a": "b", "b": "c", "c": "c"}.__getitem__
    lhs = D(T("a"), T("b"))
    assert np.allclose(lhs, 0.3 * (D(T("a"), "a") + D(T("b"), "b")))
    assert eval_condition_cone(Kannan(0.4), D, T, "a", "b")


def test_scalar_examples():
    # T: a -> b -> c -> c; at (a, b) d(Tx,Ty) = 5.6 = 0.8 * max{7, 7, 5.6, 2.5}
    D = table({("a", "b"): 7.0, ("b", "c"): 5.6, ("a", "c"): 5.0}, RPLUS)
    d = equivalent_metric(D)
    T = {"a": "b", "b": "c", "c": "c"}.__getitem__
    assert d(T("a"), T("b")) == pytest.approx(0.8 * 7.0)
    assert eval_condition_scalar(QuasiMax5(0.9), d, T, "a", "b")
    assert eval_condition_scalar(Banach(0.3), d, lambda x: "c", "a", "b")
    assert not eval_condition_scalar(Banach(0.1), d, lambda x: x, "a", "b")


def test_scalar_banach_matches_direct_inequality():
    D = random_cone_metric_table(6, R2, seed=9)
    d = equivalent_metric(D)
    T = dict(zip(D.labels, D.labels[1:] + D.labels[:1])).__getitem__
    for x in D.labels:
        for y in D.labels:
            direct = d(T(x), T(y)) <= 0.5 * d(x, y) + 1e-8
            assert eval_condition_scalar(Banach(0.5), d, T, x, y) == direct


def test_coefficient_ranges():
    for bad in ({"kind": "banach", "alpha": 1.2}, {"kind": "kannan", "lambda": 0.5},
                {"kind": "quasi-max", "alpha": 0.0}, {"kind": "five-coefficient", "a": [0.3] * 5},
                {"kind": "hardy-rogers", "a": [0.2, 0.2, 0.2, 0.2]},
                {"kind": "iterated-power", "m": 0, "n": 1, "k": 0.5}):
        with pytest.raises(ValueError):
            parse_condition(bad)
    assert parse_condition({"kind": "kannan", "lambda": 0.3}) == Kannan(0.3)
    assert parse_condition({"kind": "five-coefficient", "a": [0.1] * 5}) == FiveCoefficient((0.1,) * 5)
    assert parse_condition({"kind": "hardy-rogers", "a": [0.1, 0.1, 0.1, 0.3]}) == HardyRogersSym((0.1, 0.1, 0.1, 0.3))


def test_dominance_delegation():
    D = random_cone_metric_table(5, R2, seed=0)
    rep = check_corollary(Dominance(D), D, lambda x: x, D.labels)
    assert rep.ok and rep.label == "dominance"


def test_iterated_power_fixed_point_tables():
    for seed in range(6):
        D = random_cone_metric_table(6, R2, seed=seed)
        p = D.labels[0]
        T = {x: (p if i < 3 else D.labels[1]) for i, x in enumerate(D.labels)}.__getitem__
        rep = check_corollary(IteratedPower(2, 2, 0.5), D, T, D.labels)
        assert rep.ok
        assert rep.cone_holds == rep.samples_checked


def test_iterated_power_existential_flag():
    D = random_cone_metric_table(5, R2, seed=2)
    T = dict(zip(D.labels, D.labels[1:] + D.labels[:1])).__getitem__
    strict = check_corollary(IteratedPower(1, 1, 0.9), D, T, D.labels)
    loose = check_corollary(IteratedPower(1, 1, 0.9, existential=True), D, T, D.labels)
    assert loose.cone_holds >= strict.cone_holds
    assert strict.ok and loose.ok


@pytest.mark.parametrize("kind", list(families.CONDITIONS))
def test_transfer_families(kind):
    held = 0
    for cond, D, T, pts in families.affine_family(kind, 4, seed=100):
        rep = check_corollary(cond, D, T, pts)
        # premise holds by construction on every pair
        assert rep.cone_holds == rep.samples_checked
        assert rep.ok, rep.violations[:1]
        held += rep.cone_holds
    for cond, D, T, pts in families.table_family(kind, 4, seed=100):
        rep = check_corollary(cond, D, T, pts)
        assert rep.ok, rep.violations[:1]
        held += rep.cone_holds
    assert held > 0


def test_report_serializes():
    D = random_cone_metric_table(4, R2, seed=0)
    doc = check_corollary(Banach(0.5), D, lambda x: x, D.labels).to_dict()
    assert doc["schema"] == 1
    assert doc["samples_checked"] == 16
    assert math.isfinite(doc["cone_holds"])


def test_broken_scalar_metric_is_reported(monkeypatch):
    import conemetric.transfer as tr

    # d(x, y) = |x - y|^0.5 is a metric but is not the metrization of D
    monkeypatch.setattr(tr, "_metric_with_error", lambda D, space: (lambda x, y: abs(x - y) ** 0.5, [0.0]))
    rep = check_corollary(Banach(0.5), ProductConeMetric(), lambda x: x / 2, [0.0, 1.0, 4.0])
    assert rep.cone_holds == 9
    assert not rep.ok and rep.violations[0].x != rep.violations[0].y
