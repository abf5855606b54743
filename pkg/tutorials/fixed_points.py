"""
Fixed-point iteration measured with d
=====================================

Picard iteration of a contraction, stopped when consecutive iterates
are within tol in the scalar metric.  The trace records every step so
the observed rate can be compared with the contraction constant.
"""

from conemetric import ProductConeMetric, banach_iterate, verify_rate_bounds

cm = ProductConeMetric(1.0, 1.0)
trace = banach_iterate(cm, lambda x: x / 2, 1.0, tol=1e-8)
print(trace.converged, len(trace.distances), trace.fixed_point, trace.estimated_rate)

# a priori and a posteriori bounds hold at alpha = 0.5 but not below
print(verify_rate_bounds(trace, 0.5).ok, verify_rate_bounds(trace, 0.4).ok)

# an expanding map is reported as divergent
bad = banach_iterate(cm, lambda x: 2 * x + 1, 1.0, max_iter=50)
print(bad.converged, bad.diverged)
