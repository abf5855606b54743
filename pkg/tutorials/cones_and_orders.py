"""
Cones and the orders they induce
================================

A closed convex pointed cone P in R^n orders vectors by x <= y when
y - x lies in P.  This script builds the four supported cone types,
validates them, and projects onto them.
"""

import numpy as np

from conemetric import (
    Generators,
    Halfspaces,
    NormSpec,
    OrderedVectorSpace,
    Orthant,
    SecondOrder,
    estimate_normality_constant,
    leq,
    strictly_less,
    validate_cone,
)

# the nonnegative orthant gives the coordinatewise order
R2 = OrderedVectorSpace(Orthant(2))
print(leq(R2, [0.0, 1.0], [1.0, 1.0]), leq(R2, [0.0, 1.0], [1.0, 0.0]))

# strict order means y - x is in the interior of the cone
print(strictly_less(R2, [0.0, 0.0], [1.0, 1.0]), strictly_less(R2, [0.0, 0.0], [1.0, 0.0]))

# an obtuse cone spanned by two generators
G = np.array([[1.0, 0.0], [-0.8, 0.6]])
obtuse = Generators(G)
print(validate_cone(obtuse))

# a line is not pointed, so it is rejected
print(validate_cone(Generators([[1.0, 0.0], [-1.0, 0.0]])).pointed)

# projections: Moreau splits v into a cone part and a polar part
v = np.array([-1.0, 0.5])
for cone in (Orthant(2), SecondOrder(2), obtuse, Halfspaces([[1.0, 0.0], [1.0, 1.0]])):
    p = cone.project(v)
    print(type(cone).__name__, p, np.dot(p, v - p))

# the normality constant is 1 for the orthant under the Euclidean norm
# and grows as the cone opens up
print(estimate_normality_constant(R2))
print(estimate_normality_constant(OrderedVectorSpace(obtuse, NormSpec(2.0))))
