import math

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
    closed_form_d,
    random_cone_metric_table,
    truncation_tail_bound,
    validate_cone_metric,
)
from conemetric.metrics import FiniteTableConeMetric, cone_metric_from_dict


def orthant(dim, p=2.0):
    return OrderedVectorSpace(Orthant(dim), NormSpec(p))


def test_discrete_values():
    cm = DiscreteConeMetric([0.6, 0.8], orthant(2))
    assert np.array_equal(cm("x", "x"), [0, 0])
    assert np.allclose(cm("x", "y"), [0.6, 0.8])
    assert closed_form_d(cm, "x", "y") == 1
    assert closed_form_d(cm, "x", "x") == 0


def test_discrete_requires_unit_cone_vector():
    with pytest.raises(ValueError):
        DiscreteConeMetric([1.0, 1.0], orthant(2))
    with pytest.raises(ValueError):
        DiscreteConeMetric([-1.0, 0.0], orthant(2))


def test_product_values():
    cm = ProductConeMetric(1.0, 2.0)
    assert np.allclose(cm(0.0, 1.0), [1.0, 2.0])
    assert closed_form_d(ProductConeMetric(1.0, 0.0), 0.0, 5.0) == pytest.approx(5.0)


def test_lq_values():
    cm = GeometricLqConeMetric(b=2, q=1, n_terms=4)
    assert np.allclose(cm(0.0, 1.0), [1 / 2, 1 / 4, 1 / 8, 1 / 16])
    assert closed_form_d(GeometricLqConeMetric(b=2, q=1), 0.0, 3.0) == pytest.approx(3.0)
    assert closed_form_d(GeometricLqConeMetric(b=2, q=2), 0.0, 1.0) == pytest.approx(1.0)


def test_tail_bound_examples():
    # sum_{n>10} 2^-n = 2^-10
    assert truncation_tail_bound(GeometricLqConeMetric(b=2, q=1, n_terms=10))(1.0) == pytest.approx(2.0 ** -10)
    # (2 / (2 * 3^5))^(1/2)
    bound = truncation_tail_bound(GeometricLqConeMetric(b=3, q=2, n_terms=5))(2.0)
    assert bound == pytest.approx(math.sqrt(1 / 243), rel=1e-9)
    assert truncation_tail_bound(GeometricLqConeMetric(b=2, q=1, n_terms=200))(1.0) < 1e-14


@given(st.floats(1e-3, 10), st.sampled_from([(1.0, 2.0), (2.0, 2.0), (0.5, 3.0), (3.0, 1.5)]))
@settings(max_examples=100, deadline=None)
def test_tail_bound_covers_truncation(rho, qb):
    q, b = qb
    cm = GeometricLqConeMetric(b=b, q=q, n_terms=32)
    kept = cm.space.norm(cm(0.0, rho))
    assert abs(kept - cm.closed_form(0.0, rho)) <= cm.tail_bound(rho)


def test_table_lookup_and_symmetry():
    sp = orthant(2)
    cm = FiniteTableConeMetric("ab", {("a", "b"): [1.0, 2.0]}, sp)
    assert np.allclose(cm("b", "a"), [1.0, 2.0])
    assert np.array_equal(cm("a", "a"), [0.0, 0.0])
    with pytest.raises(KeyError):
        cm("a", "z")


def test_table_rejects_asymmetric_or_missing_entries():
    sp = orthant(2)
    with pytest.raises(ValueError):
        FiniteTableConeMetric("ab", {("a", "b"): [1.0, 2.0], ("b", "a"): [1.0, 3.0]}, sp)
    with pytest.raises(ValueError):
        FiniteTableConeMetric("abc", {("a", "b"): [1.0, 2.0]}, sp)


def test_validation_examples():
    sp = orthant(2)
    assert validate_cone_metric(DiscreteConeMetric([0.6, 0.8], sp), list("abcde")).ok
    assert validate_cone_metric(ProductConeMetric(1.0, 3.0), [0.0, 0.5, 2.0, -1.0]).ok
    bad = FiniteTableConeMetric("abc", {("a", "b"): [1.0, -1.0], ("a", "c"): [1.0, 1.0],
                                        ("b", "c"): [1.0, 1.0]}, sp)
    rep = validate_cone_metric(bad)
    assert rep.nonnegativity_failures
    assert rep.first_violation[0] == "nonnegativity"


def test_validation_finds_triangle_failure():
    sp = orthant(2)
    bad = FiniteTableConeMetric("abc", {("a", "b"): [1.0, 0.0], ("a", "c"): [5.0, 0.0],
                                        ("b", "c"): [1.0, 0.0]}, sp)
    rep = validate_cone_metric(bad)
    assert not rep.ok
    assert rep.first_violation[0] == "triangle"


def test_random_table_examples():
    two = random_cone_metric_table(2, orthant(3), seed=0)
    assert np.any(two(two.labels[0], two.labels[1]) > 0)
    a = random_cone_metric_table(5, orthant(3), seed=7)
    b = random_cone_metric_table(5, orthant(3), seed=7)
    assert validate_cone_metric(a).ok
    assert a.to_dict() == b.to_dict()


@given(st.integers(2, 9), st.integers(2, 4), st.sampled_from([1.0, 2.0, math.inf]), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_random_tables_are_valid(n, dim, p, seed):
    cm = random_cone_metric_table(n, orthant(dim, p), seed=seed)
    assert validate_cone_metric(cm).ok


def test_round_trip_through_dict():
    sp = orthant(2)
    for cm in (DiscreteConeMetric([0.6, 0.8], sp), ProductConeMetric(1.0, 2.0),
               GeometricLqConeMetric(b=3, q=0.5, n_terms=16), random_cone_metric_table(4, sp, seed=2)):
        again = cone_metric_from_dict(cm.to_dict(), sp)
        assert again.to_dict() == cm.to_dict()


def test_discrete_on_generator_cone():
    sp = OrderedVectorSpace(Generators([[1.0, 0.0], [-0.8, 0.6]]))
    cm = DiscreteConeMetric([1.0, 0.0], sp)
    assert validate_cone_metric(cm, [0, 1, 2]).ok
