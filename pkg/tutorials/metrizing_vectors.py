"""
Scalar distance from a vector bound
===================================

Given c in P, d = inf{||u|| : c <= u} is the smallest norm of a vector
dominating c.  The minimizer may be c itself, or it may sit elsewhere
when the cone is obtuse.
"""

import math

import numpy as np

from conemetric import Generators, NormSpec, OrderedVectorSpace, Orthant, SecondOrder, metrize_vector

# on the orthant with any monotone norm the answer is ||c||
r = metrize_vector(OrderedVectorSpace(Orthant(3), NormSpec(1.0)), [0.2, 0.5, 0.3])
print(r.value, r.method, r.error_bound)

# an obtuse cone lets a shorter vector dominate c
obtuse = OrderedVectorSpace(Generators([[1.0, 0.0], [-0.8, 0.6]]))
r = metrize_vector(obtuse, [1.0, 0.0])
print(r.value, r.minimizer, r.method)

# the same vector under three norms on the Lorentz cone
c = np.array([0.3, -0.2, 1.0])
for p in (1.0, 2.0, math.inf):
    r = metrize_vector(OrderedVectorSpace(SecondOrder(3), NormSpec(p)), c)
    print(p, round(r.value, 6), r.method, r.error_bound)
