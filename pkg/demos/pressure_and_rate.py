"""Pressure of beta cos(theta) on the torus and the rate function it generates.

On the flat torus the arcs from x to y point in every direction, so the
pressure of beta cos(theta) is |beta|. Its Legendre transform is 0 on
[-1, 1] and +inf outside. Run with ``python3 demos/pressure_and_rate.py``.
"""
import numpy as np

from geoflow_lab import ArcEnsemble, QFunction, SurfaceModel, pressure_estimate, rate_profile
from geoflow_lab.large_deviations import legendre_roundtrip
from geoflow_lab.potentials import DirectionHarmonic, TestFamily

torus = SurfaceModel.torus()
ens = ArcEnsemble.build(torus, 100.0, pairs=8, seed=3)
grid = np.arange(50.0, 100.01, 2.5)

for beta in (-2.0, -1.0, 0.0, 1.0, 2.0):
    est = pressure_estimate(ens, f"lin:{beta}*dirharm:1", grid)
    print(f"beta={beta:+.1f}  pressure={est.value:.4f}")

family = TestFamily(torus, (DirectionHarmonic(1),))
Q = QFunction(ens, 0.0, family, grid)
profile = rate_profile(Q, np.arange(-1.2, 1.21, 0.3)[:, None])
print("\nalpha     J      boundary")
for a, j, flag in zip(profile.alpha[:, 0], profile.J, profile.boundary):
    print(f"{a:+.2f}  {j:8.4f}  {bool(flag)}")

rows = legendre_roundtrip(rate_profile(Q), Q, np.linspace(-3, 3, 13))
print(f"\nworst |Q - J*| on beta in [-3, 3]: {np.max(np.abs(rows[:, 1] - rows[:, 2])):.4f}")
