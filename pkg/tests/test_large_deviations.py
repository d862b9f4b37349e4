import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoflow_lab import large_deviations as ld
from geoflow_lab import potentials as pot
from geoflow_lab import pressure as pr
from geoflow_lab.ensemble import ArcEnsemble
from geoflow_lab.errors import (EmptyEnsembleError, EnsembleMismatchError, FamilyMismatchError,
                                NonConcaveError)
from geoflow_lab.large_deviations import EmpiricalMeasure, MomentVector
from geoflow_lab.surfaces import SurfaceModel

# 1-D quadrature in the distance to the center, octagon sector by sector
LIOUVILLE_RADIAL = {1: -0.8523310530516433, 2: 0.7151834355753733, 3: -0.6815137660809583}
TORUS_GRID = np.arange(50.0, 100.01, 2.5)


@pytest.fixture(scope="module")
def torus100(torus):
    return ArcEnsemble.build(torus, 100.0, pairs=16, seed=3)


@pytest.fixture(scope="module")
def cos_family(torus):
    return pot.TestFamily(torus, (pot.DirectionHarmonic(1),))


@pytest.fixture(scope="module")
def Q_cos(torus100, cos_family):
    return ld.QFunction(torus100, 0.0, cos_family, TORUS_GRID)


@pytest.fixture(scope="module")
def Q_cos_profile(Q_cos):
    return ld.rate_profile(Q_cos)


class FakeQ:
    """Q(beta) with two separated wells; not convex."""

    n = 1
    noise = 1e-6

    def __call__(self, b):
        b = float(np.atleast_1d(b)[0])
        return min((b - 2) ** 2, (b + 2) ** 2)


def random_measure(family, rng):
    return EmpiricalMeasure(family, rng.uniform(-1, 1, family.n))


class TestQ:
    def test_zero(self, Q_cos):
        assert Q_cos(0.0) == 0.0
        assert ld.q_value(np.zeros(1), Q_cos) == 0.0

    @pytest.mark.parametrize("beta", [-2.0, -1.0, 1.0, 2.0])
    def test_torus_oracle(self, Q_cos, beta):
        assert Q_cos(beta) == pytest.approx(abs(beta), abs=0.1)

    def test_midpoint_convexity(self, Q_cos):
        betas = np.linspace(-3, 3, 13)
        for b1 in betas:
            for b2 in betas:
                assert Q_cos(0.5 * (b1 + b2)) <= 0.5 * (Q_cos(b1) + Q_cos(b2)) + 0.02

    def test_matches_pressure_estimates(self, torus100, Q_cos):
        F = pot.parse_potential("lin:1.5*dirharm:1")
        shifted = pr.pressure_estimate(torus100, F, TORUS_GRID)
        base = pr.pressure_estimate(torus100, "const:0", TORUS_GRID)
        assert ld.pressure_difference(shifted, base) == pytest.approx(Q_cos(1.5), abs=1e-9)

    def test_mismatch(self, torus100, torus):
        other = ArcEnsemble.build(torus, 100.0, pairs=4, seed=99)
        a = pr.pressure_estimate(torus100, "dirharm:1", TORUS_GRID)
        b = pr.pressure_estimate(other, "const:0", TORUS_GRID)
        with pytest.raises(EnsembleMismatchError):
            ld.pressure_difference(a, b)


class TestRate:
    @pytest.mark.parametrize("alpha", [-0.9, 0.0, 0.9])
    def test_inside(self, Q_cos, alpha):
        assert ld.rate_legendre(alpha, Q_cos).value <= 0.05

    def test_outside_flagged(self, Q_cos):
        p = ld.rate_legendre(1.2, Q_cos)
        assert p.boundary
        assert p.value >= 1

    def test_equilibrium(self, torus100, Q_cos, cos_family):
        m = ld.empirical_measure(torus100, 0.0, 100.0, 0.5, cos_family)
        assert ld.rate_legendre(m.pairings, Q_cos).value <= 0.05

    def test_roundtrip(self, Q_cos, Q_cos_profile):
        rows = ld.legendre_roundtrip(Q_cos_profile, Q_cos, np.linspace(-3, 3, 25))
        assert np.max(np.abs(rows[:, 1] - rows[:, 2])) <= 0.05

    def test_nonconcave(self):
        with pytest.raises(NonConcaveError):
            ld.rate_legendre(0.0, FakeQ())

    def test_dimension(self, Q_cos):
        with pytest.raises(ValueError):
            ld.rate_legendre([0.0, 0.0], Q_cos)

    def test_profile_csv(self, Q_cos_profile):
        text = Q_cos_profile.to_csv(header=["h"])
        lines = text.splitlines()
        assert lines[1] == "alpha_1,J,beta_1,boundary"
        assert len(lines) == 2 + Q_cos_profile.alpha.shape[0]
        assert "inf" in text

    def test_min_over(self, Q_cos_profile):
        a = Q_cos_profile.alpha[:, 0]
        assert Q_cos_profile.min_over(a > 1.1) == math.inf
        assert Q_cos_profile.min_over(np.abs(a) < 0.5) <= 0.05
        assert Q_cos_profile.min_over(np.zeros(a.size, dtype=bool)) == math.inf

    def test_genus2_equilibrium(self, genus2_ensemble):
        fam = pot.default_test_family(1, genus2_ensemble.model)
        Q = ld.QFunction(genus2_ensemble, "radial:1", fam, np.arange(8, 12.01, 0.5))
        m = ld.empirical_measure(genus2_ensemble, "radial:1", 12.0, 0.5, fam)
        assert ld.rate_legendre(m.pairings, Q).value <= 0.05


class TestEmpiricalMeasure:
    def test_constant_potential(self, torus100):
        a = ld.empirical_measure(torus100, "const:0", 80.0, 0.1, n=4)
        b = ld.empirical_measure(torus100, "const:5", 80.0, 0.1, n=4)
        assert np.max(np.abs(a.pairings - b.pairings)) <= 0.01

    def test_symmetric_lattice(self, torus):
        ens = ArcEnsemble.from_points(torus, 50.0, [(0j, 0j), (0.3 + 0.6j, 0.3 + 0.6j)])
        m = ld.empirical_measure(ens, 0.0, 50.0, 0.5, n=1)
        assert abs(m.pairings[0]) <= 0.05

    def test_flow_shift(self, torus100, genus2_small):
        for ens, T, delta in ((torus100, 60.0, 0.5), (genus2_small, 9.0, 0.5)):
            m0 = ld.empirical_measure(ens, 0.0, T, delta, n=5)
            m1 = ld.empirical_measure(ens, 0.0, T, delta, n=5, shift=1.0)
            assert np.max(np.abs(m1.pairings - m0.pairings)) <= 2 * 1.0 / (T - delta) + 1e-9

    def test_bounds_and_provenance(self, torus100):
        m = ld.empirical_measure(torus100, "dirharm:1", 70.0, 0.5, n=8)
        assert m.moments.within_unit_cube()
        assert m.provenance["T"] == 70.0 and m.provenance["pairs"] == 16

    def test_deterministic(self, torus):
        a = ld.empirical_measure(ArcEnsemble.build(torus, 30.0, 4, seed=2), "dirharm:1", 30.0, n=6)
        b = ld.empirical_measure(ArcEnsemble.build(torus, 30.0, 4, seed=2), "dirharm:1", 30.0, n=6)
        assert a.pairings.tobytes() == b.pairings.tobytes()

    def test_empty(self, torus):
        ens = ArcEnsemble.from_points(torus, 1.5, [(0j, 0j)])
        with pytest.raises(EmptyEnsembleError):
            ld.empirical_measure(ens, 0.0, 0.9, 0.5)

    def test_modes(self, torus100):
        cum = ld.empirical_measure(torus100, 0.0, 40.0, None, n=3, mode=pr.CUMULATIVE)
        unw = ld.empirical_measure(torus100, "dirharm:1", 40.0, 0.5, n=3, weighted=False)
        one = ld.empirical_measure(torus100, 0.0, 40.0, 0.5, n=3, pair=2)
        for m in (cum, unw, one):
            assert m.moments.within_unit_cube()
        assert one.provenance["pair"] == 2

    def test_moment_vector(self):
        assert MomentVector([0.5, -1.0]).within_unit_cube()
        assert not MomentVector([1.2]).within_unit_cube()


class TestNuMass:
    def test_total(self, torus100):
        assert ld.nu_mass(torus100, "dirharm:1", 60.0, 0.5, None, ld.everything) == 1.0

    def test_none(self, torus100):
        assert ld.nu_mass(torus100, "dirharm:1", 60.0, 0.5, None, ld.nothing) == 0.0

    def test_complement(self, torus100):
        c = np.zeros(5)
        a = ld.nu_mass(torus100, "dirharm:1", 60.0, 0.5, None, ld.ball(c, 0.4))
        b = ld.nu_mass(torus100, "dirharm:1", 60.0, 0.5, None, ld.outside_ball(c, 0.4))
        assert abs(a + b - 1.0) <= 1e-12

    def test_box(self, torus100):
        inside = ld.nu_mass(torus100, 0.0, 60.0, 0.5, None, ld.box(-np.ones(5), np.ones(5)))
        assert inside == 1.0


class TestLDPCurve:
    @pytest.fixture(scope="class")
    @classmethod
    def ldp_setup(cls, torus, cos_family):
        ens = ArcEnsemble.build(torus, 50.0, pairs=16, seed=3)
        Q = ld.QFunction(ens, 0.0, cos_family, np.arange(30.0, 50.01, 2.5))
        return ens, Q

    def test_upper_bound(self, ldp_setup, cos_family):
        ens, Q = ldp_setup
        curve = ld.ldp_curve(ens, 0.0, cos_family, [0.0], 0.5, [30.0, 40.0, 50.0], Q=Q)
        assert np.all(curve.rate <= curve.bound + 0.2)
        assert curve.bound <= 0

    def test_empty_set(self, ldp_setup, cos_family):
        ens, Q = ldp_setup
        curve = ld.ldp_curve(ens, 0.0, cos_family, [0.0], 3.0, [30.0, 40.0, 50.0], Q=Q)
        np.testing.assert_array_equal(curve.mass, 0.0)
        assert np.all(np.isneginf(curve.rate))
        assert curve.bound == -math.inf
        assert math.isnan(curve.speed)

    def test_nested(self, ldp_setup, cos_family):
        ens, _ = ldp_setup
        masses = [ld.ldp_curve(ens, 0.0, cos_family, [0.0], r, [40.0], compute_bound=False).mass[0]
                  for r in (0.9, 0.7, 0.5, 0.3, 0.1)]
        assert masses == sorted(masses)

    def test_csv(self, ldp_setup, cos_family):
        ens, Q = ldp_setup
        curve = ld.ldp_curve(ens, 0.0, cos_family, [0.0], 0.5, [30.0, 40.0, 50.0], Q=Q)
        assert curve.to_csv().splitlines()[0] == "T,nu_K,rate,bound"


class TestDistance:
    def test_zero(self, torus, rng):
        m = random_measure(pot.default_test_family(5, torus), rng)
        assert ld.measure_distance(m, m) == 0.0

    def test_mismatch(self, torus, genus2, rng):
        with pytest.raises(FamilyMismatchError):
            ld.measure_distance(random_measure(pot.default_test_family(3, torus), rng),
                                random_measure(pot.default_test_family(4, torus), rng))
        with pytest.raises(FamilyMismatchError):
            ld.measure_distance(random_measure(pot.default_test_family(3, torus), rng),
                                random_measure(pot.default_test_family(3, genus2), rng))

    def test_value(self, torus):
        fam = pot.default_test_family(3, torus)
        d = ld.measure_distance(EmpiricalMeasure(fam, np.array([1.0, 0.0, -1.0])),
                                EmpiricalMeasure(fam, np.zeros(3)))
        assert d == 0.5 + 0.125


class TestLiouville:
    @pytest.mark.parametrize("spec", ["dirharm:1", "dirharm:3:0.4"])
    def test_direction_harmonics(self, genus2, torus, spec):
        for m in (genus2, torus):
            assert abs(ld.liouville_pairing(m, spec)) < 1e-14

    def test_direction_times_bump(self, genus2):
        assert abs(ld.liouville_pairing(genus2, "dirharm:1:0*bump")) < 1e-14

    @pytest.mark.parametrize("spec", ["posharm:1:0", "posharm:2:-1:0.3"])
    def test_torus_position(self, torus, spec):
        assert abs(ld.liouville_pairing(torus, spec)) < 1e-12

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_radial_values(self, genus2, j):
        assert ld.liouville_pairing(genus2, f"radial:{j}") == pytest.approx(LIOUVILLE_RADIAL[j], abs=1e-9)

    @pytest.mark.parametrize("spec", ["radial:1", "radial:4", "bump"])
    def test_refinement(self, genus2, spec):
        a = ld.liouville_pairing(genus2, spec, n=64)
        b = ld.liouville_pairing(genus2, spec, n=128)
        assert abs(a - b) < 1e-8

    def test_measure(self, torus):
        m = ld.liouville_measure(pot.default_test_family(32, torus))
        assert np.max(np.abs(m.pairings)) < 1e-12


class TestEquidistribution:
    def test_self_reference(self, torus100):
        rep = ld.equidistribution_report(torus100, 0.0, [60.0, 80.0, 100.0], reference="self")
        assert rep.distance[-1] == 0.0

    def test_torus_liouville(self, torus100):
        rep = ld.equidistribution_report(torus100, 0.0, [50.0])
        assert rep.distance[0] < 0.05

    def test_genus2_liouville(self, genus2_ensemble):
        rep = ld.equidistribution_report(genus2_ensemble, 0.0, [8.0, 10.0, 12.0])
        assert np.all(np.diff(rep.distance) < 0)
        assert rep.distance[-1] < 0.05
        assert rep.speed_sign == -1

    def test_explicit_reference(self, torus100):
        with pytest.raises(FamilyMismatchError):
            ld.equidistribution_report(torus100, 0.0, [50.0], reference=np.zeros(3))
        with pytest.raises(ValueError):
            ld.equidistribution_report(torus100, 0.0, [50.0], reference="uniform")

    def test_csv(self, torus100):
        rep = ld.equidistribution_report(torus100, 0.0, [50.0, 75.0])
        lines = rep.to_csv().splitlines()
        assert lines[0].startswith("# log_d_slope=")
        assert lines[1] == "T,distance,dev_1,dev_2,dev_3,dev_4,dev_5"


@pytest.mark.invariant
class TestInvariants:
    def test_rate_nonnegative(self, Q_cos_profile):
        assert np.all(Q_cos_profile.J >= 0)

    def test_rate_convex(self, Q_cos_profile):
        J = Q_cos_profile.J
        left, mid, right = J[:-2], J[1:-1], J[2:]
        fin = np.isfinite(left) & np.isfinite(right)
        assert np.all(mid[fin] <= 0.5 * (left[fin] + right[fin]) + 1e-6)

    def test_rate_convex_2d(self):
        ens = _torus_ens()
        fam = pot.default_test_family(2, ens.model)
        Q = ld.QFunction(ens, 0.0, fam, np.arange(30.0, 40.01, 2.5))
        ticks = np.arange(-0.8, 0.81, 0.4)
        alphas = np.stack(np.meshgrid(ticks, ticks, indexing="ij"), -1).reshape(-1, 2)
        prof = ld.rate_profile(Q, alphas)
        J = prof.J.reshape(ticks.size, ticks.size)
        assert np.all(J >= 0)
        for M in (J, J.T):
            assert np.all(M[1:-1] <= 0.5 * (M[:-2] + M[2:]) + 1e-6)

    def test_rate_at_equilibrium(self, torus100):
        # non-constant torus potentials put the equilibrium on a corner of the moment
        # cube, where the objective is flat up to noise; F = 0 keeps it interior
        fam = pot.default_test_family(3, torus100.model)
        Q = ld.QFunction(torus100, 0.0, fam, TORUS_GRID)
        m = ld.empirical_measure(torus100, 0.0, 100.0, 0.5, fam)
        assert ld.rate_legendre(m.pairings, Q).value <= 0.05

    def test_roundtrip(self, Q_cos, Q_cos_profile):
        rows = ld.legendre_roundtrip(Q_cos_profile, Q_cos, np.linspace(-3, 3, 61))
        assert np.max(np.abs(rows[:, 1] - rows[:, 2])) <= 0.05

    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 1.5))
    def test_total_mass_and_complement(self, seed, r):
        ens = _torus_ens()
        c = np.random.default_rng(seed).uniform(-0.5, 0.5, 5)
        assert ld.nu_mass(ens, "dirharm:1", 40.0, 0.5, None, ld.everything) == 1.0
        a = ld.nu_mass(ens, "dirharm:1", 40.0, 0.5, None, ld.ball(c, r))
        b = ld.nu_mass(ens, "dirharm:1", 40.0, 0.5, None, ld.outside_ball(c, r))
        assert abs(a + b - 1.0) <= 1e-12

    @given(st.lists(st.floats(-1, 1), min_size=15, max_size=15))
    def test_metric(self, v):
        fam = pot.default_test_family(5, SurfaceModel.torus())
        x, y, z = (EmpiricalMeasure(fam, np.array(v[i:i + 5])) for i in (0, 5, 10))
        d = ld.measure_distance
        assert d(x, y) >= 0
        assert d(x, y) == d(y, x)
        assert d(x, z) <= d(x, y) + d(y, z) + 1e-14
        assert d(x, y) <= 2 * (1 - 2.0 ** -5) + 1e-14

    @given(st.floats(-5, 5))
    def test_constant_equivariance(self, c):
        ens = _torus_ens()
        delta = 0.1
        pred = ld.outside_ball(np.zeros(5), 0.3)
        base = ld.nu_mass(ens, "const:0", 40.0, delta, None, pred)
        shifted = ld.nu_mass(ens, f"const:{c!r}", 40.0, delta, None, pred)
        bound = math.exp(abs(c) * delta)
        assert base / bound - 1e-12 <= shifted <= base * bound + 1e-12


_ENS = {}


def _torus_ens():
    if "t" not in _ENS:
        _ENS["t"] = ArcEnsemble.build(SurfaceModel.torus(), 40.0, pairs=4, seed=17)
    return _ENS["t"]
