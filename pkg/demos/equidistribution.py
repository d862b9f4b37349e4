"""Arc measures on the genus-2 surface approach the Liouville measure.

The distance between the shell-averaged arc measure and Liouville, tested
against five functions, shrinks as T grows. The mass outside a small ball
of moments decays exponentially. Run with ``python3 demos/equidistribution.py``.
"""
import numpy as np

from geoflow_lab import ArcEnsemble, SurfaceModel, empirical_measure, equidistribution_report
from geoflow_lab.large_deviations import ldp_curve
from geoflow_lab.potentials import default_test_family

genus2 = SurfaceModel.genus2()
ens = ArcEnsemble.build(genus2, 10.0, pairs=4, seed=2)

rep = equidistribution_report(ens, 0.0, [7.0, 8.5, 10.0])
for T, d in zip(rep.T, rep.distance):
    print(f"T={T:4.1f}  distance to Liouville={d:.5f}")
print(f"slope of log distance: {rep.speed:.3f}")

family = default_test_family(5, genus2)
center = empirical_measure(ens, 0.0, 10.0, 0.5, family).pairings
curve = ldp_curve(ens, 0.0, family, center, 0.3, [7.0, 8.5, 10.0], compute_bound=False)
print("\nmass outside the moment ball of radius 0.3:", np.round(curve.mass, 4))
print(f"slope of its log: {curve.speed:.3f}")
