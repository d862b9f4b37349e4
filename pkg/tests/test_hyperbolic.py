import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoflow_lab import hyperbolic as hyp
from geoflow_lab.errors import DegenerateArcError, NumericOverflowError
from geoflow_lab.hyperbolic import Isometry, TangentVector
from geoflow_lab.surfaces import SurfaceModel, contains_array

# closed forms evaluated to 30 digits
TANH_HALF = 0.46211715726000975850
LN3 = 1.0986122886681096914
# regular octagon with angles pi/4: cosh(L/2) = cot(pi/8), cosh R = cot(pi/8)^2
TRANSLATION_LENGTH = 3.0571418389619963225
CIRCUMRADIUS = 2.4484524476780757900


def disk_points(max_radius=0.95):
    return st.builds(
        lambda r, t: cmath.rect(r, t),
        st.floats(0.0, max_radius), st.floats(0.0, 2 * math.pi),
    )


def isometries():
    return st.builds(
        lambda d, t, phi: Isometry.rotation(phi) @ Isometry.translation(d, t),
        st.floats(0.0, 4.0), st.floats(0.0, 2 * math.pi), st.floats(0.0, 2 * math.pi),
    )


def random_isometry(rng):
    return (Isometry.rotation(rng.uniform(0, 2 * np.pi))
            @ Isometry.translation(rng.uniform(0, 4), rng.uniform(0, 2 * np.pi)))


def random_point(rng, r=0.9):
    return complex(r * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))


class TestApply:
    def test_identity(self):
        assert hyp.apply(Isometry.identity(), 0.3 + 0.1j) == 0.3 + 0.1j

    def test_real_translation_of_origin(self):
        g = Isometry(math.cosh(0.5), math.sinh(0.5))
        assert hyp.apply(g, 0.0) == pytest.approx(TANH_HALF, abs=1e-15)

    def test_homomorphism(self, rng):
        for _ in range(100):
            g, h, z = random_isometry(rng), random_isometry(rng), random_point(rng)
            assert abs(hyp.apply(hyp.compose(g, h), z) - hyp.apply(g, hyp.apply(h, z))) < 1e-10

    def test_rejects_boundary_points(self):
        with pytest.raises(ValueError):
            hyp.apply(Isometry.identity(), 1.0)

    def test_denominator_underflow(self):
        with pytest.raises(NumericOverflowError):
            hyp.mobius_arrays(np.array([0j]), np.array([0j]), np.array([0.5 + 0j]))

    def test_determinant_is_checked(self):
        with pytest.raises(ValueError):
            Isometry(2.0, 0.0)


class TestDist:
    def test_zero(self):
        assert hyp.dist(0, 0) == 0.0

    def test_half(self):
        assert hyp.dist(0, 0.5) == pytest.approx(LN3, abs=1e-14)

    def test_matches_arccosh_formula(self, rng):
        for _ in range(50):
            z, w = random_point(rng), random_point(rng)
            ref = math.acosh(1 + 2 * abs(z - w) ** 2 / ((1 - abs(z) ** 2) * (1 - abs(w) ** 2)))
            assert hyp.dist(z, w) == pytest.approx(ref, rel=1e-9, abs=1e-7)

    def test_isometry_invariance(self, rng):
        for _ in range(100):
            g, z, w = random_isometry(rng), random_point(rng, 0.6), random_point(rng, 0.6)
            assert abs(hyp.dist(g(z), g(w)) - hyp.dist(z, w)) < 1e-10


class TestGroupLaws:
    def test_inverse(self, rng):
        for _ in range(50):
            g = random_isometry(rng)
            e = hyp.compose(g, hyp.invert(g))
            assert abs(e.a - 1) < 1e-12 and abs(e.b) < 1e-12

    def test_identity_law(self, rng):
        h = random_isometry(rng)
        assert hyp.compose(Isometry.identity(), h) == h

    def test_associativity(self, rng):
        for _ in range(50):
            f, g, h = (random_isometry(rng) for _ in range(3))
            l, r = (f @ g) @ h, f @ (g @ h)
            scale = max(1.0, abs(l.a))
            assert abs(l.a - r.a) < 1e-12 * scale and abs(l.b - r.b) < 1e-12 * scale

    def test_canonical_sign(self):
        g = Isometry(-math.cosh(1.0), -math.sinh(1.0))
        assert g.a.real > 0
        h = Isometry(-1j, 0.0)
        assert h.a == 1j


class TestGeodesics:
    def test_between_origin_and_half(self):
        t, length = hyp.geodesic_between(0, 0.5)
        assert t.angle == pytest.approx(0.0, abs=1e-15)
        assert length == pytest.approx(LN3, abs=1e-14)

    def test_between_origin_and_half_i(self):
        t, length = hyp.geodesic_between(0, 0.5j)
        assert t.angle == pytest.approx(math.pi / 2, abs=1e-15)
        assert length == pytest.approx(LN3, abs=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateArcError):
            hyp.geodesic_between(0.2, 0.2)

    def test_endpoint_consistency(self, rng):
        for _ in range(100):
            z, w = random_point(rng), random_point(rng)
            t, length = hyp.geodesic_between(z, w)
            p, _ = hyp.geodesic_point(t, length)
            assert abs(p - w) < 1e-9

    def test_time_zero(self):
        t = TangentVector(0.3 - 0.2j, 1.1)
        p, a = hyp.geodesic_point(t, 0.0)
        assert p == t.base and a == pytest.approx(t.angle, abs=1e-15)

    def test_diameter(self):
        p, a = hyp.geodesic_point(TangentVector(0, 0), LN3)
        assert p == pytest.approx(0.5, abs=1e-15) and a == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("s", [0.1, 1.0, 5.0])
    def test_unit_speed(self, rng, s):
        for _ in range(20):
            t = TangentVector(random_point(rng, 0.7), rng.uniform(0, 2 * np.pi))
            p, _ = hyp.geodesic_point(t, s)
            assert hyp.dist(t.base, p) == pytest.approx(s, abs=1e-9)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            hyp.geodesic_point(TangentVector(0, 0), -1.0)


class TestOctagon:
    def test_geometry_closed_forms(self):
        geo = hyp.octagon_geometry()
        assert geo.circumradius == pytest.approx(CIRCUMRADIUS, abs=1e-11)
        assert geo.translation_length == pytest.approx(TRANSLATION_LENGTH, abs=1e-11)

    def test_relator(self):
        rel = hyp.relator(hyp.octagon_generators())
        assert abs(rel.a - 1) + abs(rel.b) < 1e-9

    def test_equal_displacements(self):
        d = [g.displacement(0.0) for g in hyp.octagon_generators()]
        assert max(d) - min(d) < 1e-9
        assert d[0] == pytest.approx(TRANSLATION_LENGTH, abs=1e-9)

    def test_inverse_pairs(self):
        gens = hyp.octagon_generators()
        for i, j in enumerate(hyp.INVERSE_INDEX):
            e = gens[i] @ gens[j]
            assert abs(e.a - 1) + abs(e.b) < 1e-12

    def test_generators_move_domain_off_itself(self, rng):
        model = SurfaceModel.genus2()
        rv = hyp.octagon_geometry().vertex_radius
        z = rv * np.sqrt(rng.random(20000)) * np.exp(2j * np.pi * rng.random(20000))
        inside = z[contains_array(model, z)]
        # stay clear of the edges so that interiors are compared
        inside = inside[np.abs(inside) < 0.95 * hyp.octagon_geometry().edge_radius]
        for g in hyp.octagon_generators():
            img = hyp.mobius_arrays(g.a, g.b, inside)
            assert not contains_array(model, img).any()


@pytest.mark.invariant
class TestInvariants:
    def test_triangle_inequality_bulk(self, rng):
        n = 1000
        pts = 0.95 * np.sqrt(rng.random((3, n))) * np.exp(2j * np.pi * rng.random((3, n)))
        d = hyp.dist_arrays
        assert np.all(d(pts[0], pts[2]) <= d(pts[0], pts[1]) + d(pts[1], pts[2]) + 1e-10)

    @given(disk_points(), disk_points(), disk_points())
    def test_triangle_inequality(self, z, u, w):
        assert hyp.dist(z, w) <= hyp.dist(z, u) + hyp.dist(u, w) + 1e-10

    @given(disk_points(0.8), disk_points(0.8),
           st.lists(st.integers(0, 7), min_size=0, max_size=3))
    def test_invariance_under_words(self, z, w, word):
        g = Isometry.identity()
        for k in word:
            g = g @ hyp.octagon_generators()[k]
        # distances of images are compared relative to the conditioning of the pair
        assert hyp.dist(g(z), g(w)) == pytest.approx(hyp.dist(z, w), abs=1e-10, rel=1e-10)

    @given(isometries())
    def test_canonical_idempotent(self, g):
        once = hyp.canonical(g)
        twice = hyp.canonical(once)
        assert (once.a, once.b) == (twice.a, twice.b)

    @given(disk_points(0.7), st.floats(0, 2 * math.pi), st.floats(0, 3), st.floats(0, 3))
    def test_flow_semigroup(self, z, theta, s1, s2):
        t = TangentVector(z, theta)
        p12, a12 = hyp.geodesic_point(t, s1 + s2)
        p1, a1 = hyp.geodesic_point(t, s1)
        p2, a2 = hyp.geodesic_point(TangentVector(p1, a1), s2)
        assert abs(p12 - p2) < 1e-8
        assert abs(cmath.exp(1j * a12) - cmath.exp(1j * a2)) < 1e-8
