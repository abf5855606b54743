"""
Cone metrics and their scalar metric
====================================

A cone metric takes values in an ordered vector space.  Composing it
with the metrization gives an ordinary metric on the same set.
"""

import numpy as np

from conemetric import (
    DiscreteConeMetric,
    GeometricLqConeMetric,
    OrderedVectorSpace,
    Orthant,
    ProductConeMetric,
    check_metric_axioms,
    closed_form_d,
    distance_matrix,
    equivalent_metric,
    random_cone_metric_table,
    validate_cone_metric,
)

# D(x, y) = (|x - y|, alpha |x - y|) on the real line
cm = ProductConeMetric(1.0, 2.0)
d = equivalent_metric(cm)
print(cm(0.0, 1.0), d(0.0, 1.0), closed_form_d(cm, 0.0, 1.0))

# the discrete cone metric with a unit vector gives the discrete metric
R3 = OrderedVectorSpace(Orthant(3))
print(distance_matrix(DiscreteConeMetric(np.array([0.6, 0.8, 0.0]), R3), None, list("abc")))

# l^q sequence space with a truncated geometric cone; tail_bound covers the cut
lq = GeometricLqConeMetric(b=2.0, q=1.0, n_terms=32)
print(equivalent_metric(lq)(0.0, 3.0), lq.tail_bound(3.0))

# random finite tables satisfy the cone metric axioms by construction
table = random_cone_metric_table(list("pqrst"), R3, seed=1)
print(validate_cone_metric(table).ok)
print(check_metric_axioms(equivalent_metric(table), table.labels))
