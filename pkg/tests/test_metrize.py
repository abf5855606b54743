import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemetric import (
    DiscreteConeMetric,
    GeometricLqConeMetric,
    Generators,
    NormSpec,
    OrderedVectorSpace,
    Orthant,
    ProductConeMetric,
    SecondOrder,
    check_convergence_equivalence,
    check_metric_axioms,
    distance_matrix,
    equivalent_metric,
    metrize_vector,
    random_cone_metric_table,
)
from conemetric.metrics import FiniteTableConeMetric
from conemetric.metrize import write_distance_csv

import oracles

OBTUSE = [[1.0, 0.0], [-0.8, 0.6]]
NORMS = {1: NormSpec(1.0), 2: NormSpec(2.0), math.inf: NormSpec(math.inf)}


def test_orthant_examples():
    sp = OrderedVectorSpace(Orthant(2))
    assert metrize_vector(sp, [0, 0]).value == 0
    r = metrize_vector(sp, [3, 4])
    assert r.value == pytest.approx(5.0)
    assert np.allclose(r.minimizer, [3, 4])
    assert r.method == "monotone-fast-path"
    assert r.error_bound == 0


def test_orthant_example_against_grid():
    # u in c + [0, 6]^2 at step 1e-3: the apex is the closest point
    s = np.arange(0, 6 + 1e-3, 1e-3)
    u0, u1 = np.meshgrid(3 + s[::10], 4 + s[::10])
    assert np.min(np.hypot(u0, u1)) == pytest.approx(5.0)


def test_obtuse_cone_example():
    sp = OrderedVectorSpace(Generators(OBTUSE))
    r = metrize_vector(sp, [1.0, 0.0])
    assert r.value == pytest.approx(0.6, abs=1e-12)
    assert np.allclose(r.minimizer, [0.36, 0.48])
    assert r.method == "euclidean-projection"
    assert oracles.metrize_generators(OBTUSE, [1.0, 0.0], 2) == pytest.approx(0.6, abs=2e-3)


def test_dual_fast_path():
    sp = OrderedVectorSpace(Generators(OBTUSE))
    r = metrize_vector(sp, [0.6, 0.8])
    assert r.method == "dual-fast-path"
    assert r.value == pytest.approx(1.0)


def test_rejects_vector_outside_cone():
    with pytest.raises(ValueError):
        metrize_vector(OrderedVectorSpace(Orthant(2)), [1.0, -1.0])


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_obtuse_all_norms_against_oracle(p):
    sp = OrderedVectorSpace(Generators(OBTUSE), NORMS[p])
    rng = np.random.default_rng(11)
    for _ in range(10):
        c = rng.random(2) @ np.array(OBTUSE)
        r = metrize_vector(sp, c)
        want = oracles.metrize_generators(OBTUSE, c, p)
        assert abs(r.value - want) <= 2e-3
        # the certificate never claims more than it has
        assert r.value - r.error_bound <= want + 1e-9


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_second_order_against_oracle(p):
    sp = OrderedVectorSpace(SecondOrder(3), NORMS[p])
    rng = np.random.default_rng(5)
    for _ in range(4):
        c = SecondOrder(3).sample(rng)
        r = metrize_vector(sp, c)
        assert abs(r.value - oracles.metrize_second_order(c, p)) <= 2e-3


vec_in_obtuse = st.tuples(st.floats(0, 5), st.floats(0, 5)).map(lambda lam: np.array(lam) @ np.array(OBTUSE))


@given(vec_in_obtuse, st.sampled_from([1, 2, math.inf]))
@settings(max_examples=60, deadline=None)
def test_value_bounded_by_norm_and_homogeneous(c, p):
    sp = OrderedVectorSpace(Generators(OBTUSE), NORMS[p])
    r = metrize_vector(sp, c)
    assert 0 <= r.value <= NORMS[p](c) + 1e-9
    assert sp.cone.contains(r.minimizer - c, tol=1e-7)
    assert NORMS[p](r.minimizer) == pytest.approx(r.value, abs=1e-9)
    r2 = metrize_vector(sp, 2.5 * c)
    assert r2.value == pytest.approx(2.5 * r.value, abs=1e-6 * (1 + r.value))


@given(vec_in_obtuse, vec_in_obtuse)
@settings(max_examples=60, deadline=None)
def test_subadditive_and_monotone(a, b):
    sp = OrderedVectorSpace(Generators(OBTUSE))
    da, db, dab = (metrize_vector(sp, v).value for v in (a, b, a + b))
    assert dab <= da + db + 1e-9
    # a <= a + b in the cone order, so the distance cannot drop
    assert da <= dab + 1e-9


def test_equivalent_metric_examples():
    sp = OrderedVectorSpace(Orthant(2))
    d = equivalent_metric(DiscreteConeMetric([1 / math.sqrt(2)] * 2, sp))
    x, y = np.zeros(2), np.ones(2)
    assert d(x, y) == pytest.approx(1.0)
    assert d(x, x) == 0
    prod = equivalent_metric(ProductConeMetric(1.0, 1.0))
    assert prod(0.0, 2.0) == pytest.approx(2 * math.sqrt(2))
    assert prod(3.0, 3.0) == 0


def test_discrete_metric_on_obtuse_cone_is_not_one():
    # 'a' lies in the cone but not in its dual, so the infimum sits below ||a||
    sp = OrderedVectorSpace(Generators(OBTUSE))
    d = equivalent_metric(DiscreteConeMetric([1.0, 0.0], sp))
    assert d(np.zeros(2), np.ones(2)) == pytest.approx(0.6)


def test_distance_matrix_examples(tmp_path):
    sp = OrderedVectorSpace(Orthant(2))
    cm = DiscreteConeMetric([0.6, 0.8], sp)
    pts = [np.array([i, 0.0]) for i in range(3)]
    m = distance_matrix(cm, None, pts)
    assert np.allclose(m, 1 - np.eye(3))
    assert distance_matrix(cm, None, pts[:1]).tolist() == [[0.0]]
    lq = GeometricLqConeMetric(b=2, q=1, n_terms=60)
    assert distance_matrix(lq, None, [0.0, 1.0])[0, 1] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        distance_matrix(cm, None, [])
    path = tmp_path / "d.csv"
    write_distance_csv(path, ["a", "b", "c"], m)
    assert path.read_bytes() == b",a,b,c\na,0,1,1\nb,1,0,1\nc,1,1,0\n"


def test_axiom_suite_on_random_table():
    sp = OrderedVectorSpace(Orthant(3), NormSpec(1.0))
    cm = random_cone_metric_table(10, sp, seed=3)
    rep = check_metric_axioms(equivalent_metric(cm), cm.labels)
    assert rep.ok
    assert rep.max_triangle_violation <= 1e-8


def test_axiom_suite_flags_corrupted_table():
    sp = OrderedVectorSpace(Orthant(2))
    cm = random_cone_metric_table(list("abcd"), sp, seed=1)
    entries = {(x, y): cm(x, y) for i, x in enumerate(cm.labels) for y in cm.labels[i + 1:]}
    # halve the longest entry: it now undercuts the detour through another point
    worst = max(entries, key=lambda k: np.sum(entries[k]))
    entries[worst] = entries[worst] / 2
    bad = FiniteTableConeMetric(cm.labels, entries, sp)
    pts = list(bad.labels)
    dist = np.array([[equivalent_metric(bad)(x, y) for y in pts] for x in pts])
    rep = check_metric_axioms(lambda x, y: dist[pts.index(x), pts.index(y)], pts)
    tri = dist[:, :, None] > dist[:, None, :] + dist.T[None, :, :] + 1e-8
    assert rep.triangle_failures == int(tri.sum()) > 0
    assert rep.max_triangle_violation > 0
    assert not rep.ok


def test_convergence_equivalence_product_sequence():
    cm = ProductConeMetric(1.0, 1.0)
    seq = [1.0 / n for n in range(1, 101)]
    rep = check_convergence_equivalence(cm, None, seq, 0.0, directions=[np.array([0.1, 0.1])], margin=1e-6)
    (row,) = rep.directions
    # (1/n, 1/n) << (0.1, 0.1) with margin 1e-6 first holds for good at n = 11;
    # d = sqrt(2)/n < ||c|| = 0.1 sqrt(2) likewise
    dom = [Fraction(1, 10) - Fraction(1, n) > Fraction(1, 10**6) for n in range(1, 101)]
    # sqrt(2)/n < sqrt(2)/10, decided in exact arithmetic
    scal = [Fraction(1, n) < Fraction(1, 10) for n in range(1, 101)]
    assert oracles.first_tail_index(dom) == 11
    assert oracles.first_tail_index(scal) == 11
    assert row.cone_index == 11
    assert row.scalar_index == 11
    assert rep.agree


def test_convergence_equivalence_constant_sequences():
    cm = ProductConeMetric(1.0, 1.0)
    same = check_convergence_equivalence(cm, None, [0.0] * 20, 0.0)
    assert same.cone_converges and same.scalar_converges and same.agree
    assert all(r.cone_index == 1 for r in same.directions)
    other = check_convergence_equivalence(cm, None, [1.0] * 20, 0.0, directions=[np.array([0.1, 0.1])])
    assert not other.cone_converges and not other.scalar_converges and other.agree


def test_convergence_equivalence_input_errors():
    cm = ProductConeMetric(1.0, 1.0)
    with pytest.raises(ValueError):
        check_convergence_equivalence(cm, None, [], 0.0)
    with pytest.raises(ValueError):
        check_convergence_equivalence(cm, None, [1.0], 0.0, directions=[np.array([0.1, 0.0])])


def test_lq_quasi_norm_path():
    lq = GeometricLqConeMetric(b=3, q=0.5, n_terms=32)
    r = metrize_vector(lq.space, lq(0.0, 2.0))
    assert r.method == "monotone-fast-path"
    assert abs(r.value - lq.closed_form(0.0, 2.0)) <= lq.tail_bound(2.0)
