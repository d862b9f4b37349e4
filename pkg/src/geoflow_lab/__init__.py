"""Growth of weighted geodesic-arc counts on the flat torus and a genus-2 surface.

Counting the geodesic arcs between two points, weighted by the exponential of
a potential integrated along them, recovers topological entropy and pressure;
the same arc ensembles give large-deviation rate functions and
equidistribution toward equilibrium states.
"""

from .errors import (
    CapExceededError, ConstructionError, DegenerateArcError, EmptyEnsembleError,
    EnsembleMismatchError, FamilyMismatchError, GeoflowError, InsufficientGridError,
    MemoryBudgetError, NonConcaveError, NumericOverflowError, RejectionStallError,
)
from .hyperbolic import (
    Isometry, TangentVector, apply, canonical, compose, dist, geodesic_between,
    geodesic_point, invert, octagon_generators,
)
from .surfaces import SMCoordinate, SurfaceModel, area, contains, sample_point
from .arcs import (
    ArcSet, GeodesicArc, brute_force, enumerate_genus2, enumerate_torus, shell_filter,
)
from .potentials import (
    Potential, TestFamily, arc_average, default_test_family, eval_potential,
    integrate_along_arc, parse_potential,
)
from .ensemble import ArcEnsemble
from .pressure import (
    PressureCurve, PressureEstimate, entropy_estimate, log_partition, pressure_curve,
    pressure_estimate, pressure_fit,
)
from .large_deviations import (
    EmpiricalMeasure, QFunction, empirical_measure, equidistribution_report, ldp_curve,
    rate_legendre, rate_profile,
)

__version__ = "0.1.0"
