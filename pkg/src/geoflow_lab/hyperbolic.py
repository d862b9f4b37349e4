"""Poincaré disk arithmetic in curvature -1.

Isometries are stored as SU(1,1) pairs ``(a, b)`` acting by

    z -> (a z + b) / (conj(b) z + conj(a)),    |a|^2 - |b|^2 = 1.

Scalar objects (:class:`Isometry`, :class:`TangentVector`) cover the
public API; the ``*_arrays`` helpers do the same arithmetic on numpy
arrays and are what the enumerators use in their inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConstructionError, DegenerateArcError, NumericOverflowError

BOUNDARY_EPS = 1e-12
DET_TOL = 1e-12
OVERFLOW_TOL = 1e-300


def disk_point(z) -> complex:
    """Validate and return a point of the open unit disk."""
    z = complex(z)
    if not abs(z) < 1.0 - BOUNDARY_EPS:
        raise ValueError(f"point {z!r} is not inside the open unit disk")
    return z


# ---------------------------------------------------------------------------
# vectorized helpers

def canonicalize_arrays(a, b):
    """Pick the projective representative with Re(a) > 0 (or Re(a) == 0, Im(a) > 0)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    flip = (a.real < 0) | ((a.real == 0) & (a.imag < 0))
    sign = np.where(flip, -1.0, 1.0)
    return a * sign, b * sign


def compose_arrays(a1, b1, a2, b2):
    """Coefficients of g1 o g2 (no canonicalization)."""
    return a1 * a2 + b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2)


def mobius_arrays(a, b, z):
    den = np.conj(b) * z + np.conj(a)
    if np.any(np.abs(den) < OVERFLOW_TOL):
        raise NumericOverflowError("Möbius denominator underflow")
    return (a * z + b) / den


def derivative_arg_arrays(a, b, z):
    """arg g'(z); a tangent direction theta at z maps to theta + arg g'(z)."""
    return -2.0 * np.angle(np.conj(b) * z + np.conj(a))


def dist_arrays(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    # 2 artanh |(z - w) / (1 - conj(w) z)| is better conditioned than arccosh near 0
    r = np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)
    return 2.0 * np.arctanh(np.minimum(r, 1.0 - 1e-16))


def dist_from_origin_arrays(z):
    return 2.0 * np.arctanh(np.minimum(np.abs(z), 1.0 - 1e-16))


def geodesic_point_arrays(base, angle, s):
    """Flow the unit tangent (base, angle) for time s.

    Conjugates to the diameter through 0, where the flow is
    ``u(s) = exp(i angle) tanh(s/2)``, and maps back with the
    translation taking 0 to ``base``.
    """
    u = np.exp(1j * angle) * np.tanh(0.5 * s)
    den = 1.0 + np.conj(base) * u
    point = (u + base) / den
    direction = angle - 2.0 * np.angle(den)
    return point, direction


def geodesic_between_arrays(z, w):
    """Initial angle at z and length of the geodesic segment from z to w."""
    u = (w - z) / (1.0 - np.conj(z) * w)
    return np.mod(np.angle(u), 2 * np.pi), 2.0 * np.arctanh(np.minimum(np.abs(u), 1.0 - 1e-16))


# ---------------------------------------------------------------------------
# scalar API

@dataclass(frozen=True)
class Isometry:
    """Orientation preserving isometry of the disk, stored canonically."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        det = abs(a) ** 2 - abs(b) ** 2
        if abs(det - 1.0) > DET_TOL * max(1.0, abs(a) ** 2):
            raise ValueError(f"|a|^2 - |b|^2 = {det!r}, expected 1")
        ca, cb = canonicalize_arrays(a, b)
        object.__setattr__(self, "a", complex(ca))
        object.__setattr__(self, "b", complex(cb))

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0)

    @classmethod
    def rotation(cls, angle: float) -> "Isometry":
        """Rotation about 0 by ``angle``."""
        return cls(np.exp(0.5j * angle), 0.0)

    @classmethod
    def translation(cls, length: float, direction: float = 0.0) -> "Isometry":
        """Translation by ``length`` along the diameter at angle ``direction``."""
        t = cls(np.cosh(0.5 * length), np.sinh(0.5 * length))
        r = cls.rotation(direction)
        return compose(compose(r, t), invert(r))

    def __call__(self, z):
        return apply(self, z)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def inverse(self) -> "Isometry":
        return invert(self)

    def displacement(self, z=0.0) -> float:
        """Hyperbolic distance between z and its image."""
        return dist(z, apply(self, z))

    def key(self, resolution: float = 1e-9) -> tuple:
        """Coefficients rounded to ``resolution``; for display and sorting."""
        q = np.round(np.array([self.a.real, self.a.imag, self.b.real, self.b.imag]) / resolution)
        return tuple(int(v) for v in q)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b.conjugate(), self.a.conjugate()]])


def canonical(g: Isometry) -> Isometry:
    a, b = canonicalize_arrays(g.a, g.b)
    return Isometry(complex(a), complex(b))


def apply(g: Isometry, z) -> complex:
    return complex(mobius_arrays(g.a, g.b, disk_point(z)))


def compose(g: Isometry, h: Isometry) -> Isometry:
    a, b = compose_arrays(g.a, g.b, h.a, h.b)
    # renormalize onto |a|^2 - |b|^2 = 1 to stop determinant drift
    s = np.sqrt(abs(a) ** 2 - abs(b) ** 2)
    return Isometry(complex(a / s), complex(b / s))


def invert(g: Isometry) -> Isometry:
    return Isometry(g.a.conjugate(), -g.b)


def dist(z, w) -> float:
    return float(dist_arrays(disk_point(z), disk_point(w)))


@dataclass(frozen=True)
class TangentVector:
    """Unit tangent vector at ``base`` pointing at Euclidean angle ``angle``."""

    base: complex
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "base", disk_point(self.base))
        object.__setattr__(self, "angle", float(np.mod(self.angle, 2 * np.pi)))


def geodesic_between(z, w) -> tuple[TangentVector, float]:
    z, w = disk_point(z), disk_point(w)
    if dist(z, w) <= 1e-12:
        raise DegenerateArcError("geodesic between coincident points")
    angle, length = geodesic_between_arrays(z, w)
    return TangentVector(z, float(angle)), float(length)


def geodesic_point(t: TangentVector, s: float) -> tuple[complex, float]:
    if s < 0:
        raise ValueError("arclength must be non-negative")
    p, d = geodesic_point_arrays(t.base, t.angle, s)
    return disk_point(p), float(np.mod(d, 2 * np.pi))


# ---------------------------------------------------------------------------
# regular octagon group

def octagon_vertex_angle(circumradius: float, sides: int = 8) -> float:
    """Interior angle of the regular hyperbolic polygon with given circumradius."""
    return 2.0 * np.arctan(1.0 / (np.cosh(circumradius) * np.tan(np.pi / sides)))


def solve_circumradius(angle: float = np.pi / 4, sides: int = 8, tol: float = 1e-12) -> float:
    """Bisection for the circumradius giving the requested interior angle."""
    lo, hi = 0.0, 20.0
    if not octagon_vertex_angle(hi, sides) < angle < octagon_vertex_angle(lo, sides):
        raise ConstructionError("requested angle is not attainable")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if octagon_vertex_angle(mid, sides) > angle:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class OctagonGeometry:
    circumradius: float  # center to vertex
    inradius: float  # center to edge midpoint
    translation_length: float  # generator displacement of the center

    @property
    def vertex_radius(self) -> float:
        """Euclidean radius of the vertices in the disk."""
        return float(np.tanh(0.5 * self.circumradius))

    @property
    def edge_radius(self) -> float:
        return float(np.tanh(0.5 * self.inradius))


@lru_cache(maxsize=None)
def octagon_geometry() -> OctagonGeometry:
    R = solve_circumradius(np.pi / 4, 8)
    r = float(np.arctanh(np.tanh(R) * np.cos(np.pi / 8)))
    return OctagonGeometry(R, r, 2.0 * r)


def _side_pairing(i: int, j: int, length: float) -> Isometry:
    # rotate side j to face angle pi, push across by one translation, rotate onto side i
    theta = np.pi / 4
    return (Isometry.rotation(i * theta)
            @ Isometry(np.cosh(0.5 * length), np.sinh(0.5 * length))
            @ Isometry.rotation(np.pi - j * theta))


GENERATOR_NAMES = ("a1", "b1", "a2", "b2", "A1", "B1", "A2", "B2")
INVERSE_INDEX = (4, 5, 6, 7, 0, 1, 2, 3)


def relator(gens) -> Isometry:
    a1, b1, a2, b2, A1, B1, A2, B2 = gens
    return a1 @ b1 @ A1 @ B1 @ a2 @ b2 @ A2 @ B2


@lru_cache(maxsize=None)
def octagon_generators() -> tuple[Isometry, ...]:
    """Side pairings of the regular octagon with angle pi/4, centered at 0.

    Boundary word a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1; returned in the
    order of :data:`GENERATOR_NAMES` (generators, then inverses).
    """
    L = octagon_geometry().translation_length
    a1 = _side_pairing(0, 2, L)
    b1 = _side_pairing(3, 1, L)
    a2 = _side_pairing(4, 6, L)
    b2 = _side_pairing(7, 5, L)
    gens = (a1, b1, a2, b2, a1.inverse(), b1.inverse(), a2.inverse(), b2.inverse())
    rel = relator(gens)
    residual = abs(rel.a - 1.0) + abs(rel.b)
    if residual > 1e-9:
        raise ConstructionError(f"surface relator residual {residual:.3e}")
    return gens


def generator_arrays() -> tuple[np.ndarray, np.ndarray]:
    gens = octagon_generators()
    return (np.array([g.a for g in gens], dtype=complex),
            np.array([g.b for g in gens], dtype=complex))
