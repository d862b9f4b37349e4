"""Arc counts on the flat torus and on the genus-2 octagon surface.

Flat torus: counts grow like pi T^2, so the slope of log count is 0.
Genus 2: counts grow like e^T, so the slope is 1.
Run with ``python3 demos/arc_growth.py``; takes about half a minute.
"""
import numpy as np

from geoflow_lab import ArcEnsemble, SurfaceModel, entropy_estimate, pressure_curve

torus = SurfaceModel.torus()
genus2 = SurfaceModel.genus2()

# torus: the pooled log partition of F = 0 grows only like log T
grid = np.arange(50.0, 100.01, 10.0)
curve = pressure_curve(ArcEnsemble.build(torus, 100.0, pairs=8, seed=1), "const:0", grid)
for T, z, n in zip(curve.T, curve.logZ, curve.arc_count_mean):
    print(f"torus   T={T:5.1f}  log Z={z:7.3f}  arcs per pair in the shell={n:8.1f}")
est = entropy_estimate(torus, np.arange(50.0, 100.01, 2.5), pairs=8, seed=1)
print(f"torus entropy estimate: {est.value:.4f}\n")

# genus 2: each extra unit of length multiplies the count by about e
ens = ArcEnsemble.build(genus2, 10.0, pairs=4, seed=1)
curve = pressure_curve(ens, "const:0", np.arange(7.0, 10.01, 1.0))
for T, z, n in zip(curve.T, curve.logZ, curve.arc_count_mean):
    print(f"genus-2 T={T:5.1f}  log Z={z:7.3f}  arcs per pair in the shell={n:8.1f}")
est = entropy_estimate(ensemble=ens, T_grid=np.arange(7.0, 10.01, 0.5))
print(f"genus-2 entropy estimate: {est.value:.4f}")
