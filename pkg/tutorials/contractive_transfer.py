"""
Carrying contractive conditions over
====================================

If a self map is contractive for the cone metric D then it is
contractive, with the same constants, for the scalar metric d.  This
script checks a handful of conditions on sample points.
"""

import numpy as np

from conemetric import (
    Banach,
    Kannan,
    LinearMatrix,
    ProductConeMetric,
    ScalarOnRplus,
    check_corollary,
    check_phi_transfer,
    parse_condition,
    phi_operator_norm,
)

cm = ProductConeMetric(1.0, 1.0)
points = list(np.linspace(-2.0, 2.0, 15))


def T(x):
    return 0.3 * x + 0.1


for cond in (Banach(0.5), Kannan(0.4), parse_condition({"kind": "zamfirescu", "beta": 0.5})):
    rep = check_corollary(cond, cm, T, points)
    print(cond.kind, rep.samples_checked, rep.cone_holds, rep.ok)

# a bounded linear cone map phi turns into a scalar bound psi
phi = LinearMatrix(np.array([[0.3, 0.0], [0.0, 0.3]]))
print(phi_operator_norm(phi, cm.space))
rep = check_phi_transfer(cm, T, phi, "phi-linear-increasing", points)
print(rep.cone_holds, rep.ok)

# nonlinear phi on the half line
print(ScalarOnRplus(lambda t: t / (1 + t))(np.array([3.0])))
