"""Continuous potentials on the unit tangent bundle and their arc integrals.

A potential is evaluated on arrays of ``(point, angle)`` pairs where the
point lies in the fundamental domain of the model. Genus-2 potentials that
depend on the direction are localized by a radial bump around the octagon
center: the surface carries no continuous global angle, and the bump
vanishes before the edges, so the product is smooth on SM. Functions of the
distance rho to the center are smooth on the surface only when they are
constant beyond the inradius, which the bump and its polynomials are.

Spec strings (CLI grammar)::

    const:<c>
    dirharm:<j>[:<phase>]           cos(j theta - phase)
    posharm:<k1>:<k2>[:<phase>]     torus only, cos(2 pi (k1 u + k2 v) / side - phase)
    bump                            genus 2 only, smooth bump around the octagon center
    radial:<j>                      genus 2 only, T_j(2 bump - 1), T_j the Chebyshev polynomial
    lin:<c1>*<atom>*<atom>+<c2>*<atom>...

Phases accept floats and multiples of pi (``pi/2``, ``3pi/4``). Inside a
``lin:`` term, several atoms joined by ``*`` form a product.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import hyperbolic as hyp
from .errors import DegenerateArcError
from .surfaces import SMCoordinate, SurfaceModel, fold

DEFAULT_STEP = 0.05
TILE_DENSITY = 16.0  # Gauss nodes per unit length on genus-2 tile pieces
BUMP_POWER = 3  # cos^(2p) profile, C^(2p-1) at the cutoff


class Potential:
    sup_norm_bound: float = 1.0

    def evaluate(self, model: SurfaceModel, points, angles):
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError

    @property
    def direction_only(self) -> bool:
        return False

    def outer_value(self):
        """Constant value outside the inscribed ball of the octagon, or None."""
        return None

    def __repr__(self):
        return f"Potential({self.spec!r})"

    def __eq__(self, other):
        return isinstance(other, Potential) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Constant(float(other))
        return LinearCombination(((1.0, self), (1.0, other)))

    __radd__ = __add__

    def __rmul__(self, c):
        return LinearCombination(((float(c), self),))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return LinearCombination(((float(other), self),))
        return Product((self, other))


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass(frozen=True, eq=False)
class Constant(Potential):
    c: float

    @property
    def sup_norm_bound(self):
        return abs(self.c)

    @property
    def direction_only(self):
        return True

    @property
    def spec(self):
        return f"const:{_fmt(self.c)}"

    def outer_value(self):
        return float(self.c)

    def evaluate(self, model, points, angles):
        return np.full(np.shape(angles), float(self.c))


@dataclass(frozen=True, eq=False)
class DirectionHarmonic(Potential):
    j: int = 1
    phase: float = 0.0

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("direction harmonic order must be >= 1")

    @property
    def direction_only(self):
        return True

    @property
    def spec(self):
        return f"dirharm:{self.j}:{_fmt(self.phase)}"

    def evaluate(self, model, points, angles):
        return np.cos(self.j * np.asarray(angles) - self.phase)


@dataclass(frozen=True, eq=False)
class PositionHarmonic(Potential):
    """Plane wave cos(2 pi (k1 u + k2 v) / side - phase) on the torus."""

    k1: int
    k2: int
    phase: float = 0.0

    def __post_init__(self):
        if self.k1 == 0 and self.k2 == 0:
            raise ValueError("position harmonic needs a nonzero wave vector")

    @property
    def spec(self):
        return f"posharm:{self.k1}:{self.k2}:{_fmt(self.phase)}"

    def wave_vector(self, model: SurfaceModel) -> complex:
        if not model.is_torus:
            raise ValueError("position harmonics are defined on the torus; use radial:<j> on genus 2")
        return 2 * np.pi * complex(self.k1, self.k2) / model.torus_side

    def evaluate(self, model, points, angles):
        k = self.wave_vector(model)
        p = np.asarray(points)
        return np.cos(k.real * p.real + k.imag * p.imag - self.phase)


def bump(rho, power: int = BUMP_POWER):
    """cos(pi rho / (2 r_in))^(2 power) inside the inscribed ball, 0 outside."""
    r_in = hyp.octagon_geometry().inradius
    rho = np.asarray(rho, dtype=float)
    inside = rho < r_in
    c = np.cos(0.5 * np.pi * np.where(inside, rho, 0.0) / r_in)
    return np.where(inside, c ** (2 * power), 0.0)


@dataclass(frozen=True, eq=False)
class Bump(Potential):
    """bump(rho), rho the distance to the octagon center."""

    @property
    def spec(self):
        return "bump"

    def outer_value(self):
        return 0.0

    def evaluate(self, model, points, angles):
        if model.is_torus:
            raise ValueError("the bump is defined on the genus-2 surface")
        return bump(hyp.dist_from_origin_arrays(np.asarray(points)))


@dataclass(frozen=True, eq=False)
class RadialHarmonic(Potential):
    """T_j(2 bump(rho) - 1): equal to 1 at the center and to (-1)^j beyond the inradius."""

    j: int = 1

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("radial order must be >= 1")

    @property
    def spec(self):
        return f"radial:{self.j}"

    def outer_value(self):
        return float((-1) ** self.j)

    def evaluate(self, model, points, angles):
        if model.is_torus:
            raise ValueError("radial profiles are defined on the genus-2 surface")
        u = 2.0 * bump(hyp.dist_from_origin_arrays(np.asarray(points))) - 1.0
        return np.polynomial.chebyshev.chebval(u, [0.0] * self.j + [1.0])


@dataclass(frozen=True, eq=False)
class Product(Potential):
    factors: tuple

    @property
    def sup_norm_bound(self):
        return float(np.prod([f.sup_norm_bound for f in self.factors]))

    @property
    def direction_only(self):
        return all(f.direction_only for f in self.factors)

    @property
    def spec(self):
        return "*".join(f.spec for f in self.factors)

    def outer_value(self):
        vals = [f.outer_value() for f in self.factors]
        if any(v == 0.0 for v in vals):
            return 0.0
        return None if None in vals else float(np.prod(vals))

    def evaluate(self, model, points, angles):
        out = np.ones(np.shape(angles))
        for f in self.factors:
            out = out * f.evaluate(model, points, angles)
        return out


@dataclass(frozen=True, eq=False)
class LinearCombination(Potential):
    terms: tuple  # ((coef, Potential), ...)

    @property
    def sup_norm_bound(self):
        return float(sum(abs(c) * f.sup_norm_bound for c, f in self.terms))

    @property
    def direction_only(self):
        return all(f.direction_only for _, f in self.terms)

    @property
    def spec(self):
        return "lin:" + "+".join(f"{_fmt(c)}*{f.spec}" for c, f in self.terms)

    def outer_value(self):
        vals = [f.outer_value() for _, f in self.terms]
        return None if None in vals else float(sum(c * v for (c, _), v in zip(self.terms, vals)))

    def evaluate(self, model, points, angles):
        out = np.zeros(np.shape(angles))
        for c, f in self.terms:
            out = out + c * f.evaluate(model, points, angles)
        return out


# ---------------------------------------------------------------------------
# parsing

_PI_RE = re.compile(r"^([+-]?\d*\.?\d*)\*?pi(?:/(\d+(?:\.\d*)?))?$")


def _parse_phase(text: str) -> float:
    text = text.strip().lower()
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        d = float(m.group(2)) if m.group(2) else 1.0
        return c * math.pi / d
    return float(text)


def _parse_atom(text: str) -> Potential:
    parts = text.strip().split(":")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "const" and len(args) == 1:
            return Constant(float(args[0]))
        if kind == "dirharm" and 1 <= len(args) <= 2:
            return DirectionHarmonic(int(args[0]), _parse_phase(args[1]) if len(args) == 2 else 0.0)
        if kind == "posharm" and 2 <= len(args) <= 3:
            return PositionHarmonic(int(args[0]), int(args[1]),
                                    _parse_phase(args[2]) if len(args) == 3 else 0.0)
        if kind == "radial" and len(args) == 1:
            return RadialHarmonic(int(args[0]))
        if kind == "bump" and not args:
            return Bump()
    except ValueError as exc:
        raise ValueError(f"bad potential atom {text!r}: {exc}") from None
    raise ValueError(f"bad potential atom {text!r}")


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _parse_term(text: str) -> tuple[float, Potential]:
    coef = 1.0
    atoms = []
    for tok in text.split("*"):
        tok = tok.strip()
        if _is_number(tok):
            coef *= float(tok)
        else:
            atoms.append(_parse_atom(tok))
    if not atoms:
        return coef, Constant(1.0)
    return coef, atoms[0] if len(atoms) == 1 else Product(tuple(atoms))


def parse_potential(text: str) -> Potential:
    """Parse a potential spec string (see module docstring)."""
    text = text.strip()
    if not text:
        raise ValueError("empty potential spec")
    if text.lower().startswith("lin:"):
        body = text[4:]
        # '+' separates terms; a '+' right after ':' or '*' or 'e' belongs to a number
        terms = [t for t in re.split(r"(?<![:*eE])\+", body) if t.strip()]
        if not terms:
            raise ValueError(f"empty linear combination {text!r}")
        return LinearCombination(tuple(_parse_term(t) for t in terms))
    coef, pot = _parse_term(text)
    return pot if coef == 1.0 else LinearCombination(((coef, pot),))


# ---------------------------------------------------------------------------
# evaluation and arc integrals

def eval_potential(F: Potential, v: SMCoordinate, model: SurfaceModel) -> float:
    return float(F.evaluate(model, np.array([v.point]), np.array([v.angle]))[0])


def evaluate_on_flow(potentials, model: SurfaceModel, base, angle, s):
    """Evaluate potentials at phi_s(base, angle) for arrays broadcasting together.

    ``base`` is a lift of the start point (the fundamental-domain
    representative for arcs starting at x); points are folded back into the
    domain before evaluation.
    """
    base, angle, s = np.broadcast_arrays(np.asarray(base, dtype=complex),
                                         np.asarray(angle, dtype=float),
                                         np.asarray(s, dtype=float))
    if model.is_torus:
        pts = base + s * np.exp(1j * angle)
        dirs = angle
    else:
        pts, dirs = hyp.geodesic_point_arrays(base, angle, s)
    if all(f.direction_only for f in potentials):
        pts_f, dirs_f = pts, np.mod(dirs, 2 * np.pi)
    else:
        pts_f, dirs_f = fold(model, pts, dirs)
    return [f.evaluate(model, pts_f, dirs_f) for f in potentials]


def simpson_panels(length, h: float = DEFAULT_STEP) -> np.ndarray:
    return np.maximum(1, np.ceil(np.asarray(length) / h).astype(int))


def _simpson_weights(n_panels: int) -> np.ndarray:
    w = np.ones(2 * n_panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (6.0 * n_panels)


def arc_integrals(potentials, model: SurfaceModel, bases, angles, lengths,
                  h: float = DEFAULT_STEP, shift: float = 0.0,
                  chunk_nodes: int = 2_000_000) -> np.ndarray:
    """Composite Simpson integrals of each potential over each arc.

    Returns an array of shape (len(potentials), n_arcs). Each arc uses
    ceil(l / h) Simpson panels over s in [shift, shift + l].
    """
    potentials = list(potentials)
    bases = np.broadcast_to(np.asarray(bases, dtype=complex), np.shape(lengths))
    angles = np.asarray(angles, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    out = np.zeros((len(potentials), lengths.size))
    if lengths.size == 0:
        return out
    panels = simpson_panels(lengths, h)
    for n in np.unique(panels):
        idx = np.flatnonzero(panels == n)
        w = _simpson_weights(int(n))
        t = np.linspace(0.0, 1.0, 2 * n + 1)
        per = max(1, chunk_nodes // t.size)
        for start in range(0, idx.size, per):
            sel = idx[start:start + per]
            L = lengths[sel][:, None]
            s = shift + L * t[None, :]
            vals = evaluate_on_flow(potentials, model, bases[sel][:, None], angles[sel][:, None], s)
            for k, v in enumerate(vals):
                out[k, sel] = L[:, 0] * (v @ w)
    return out


# ---------------------------------------------------------------------------
# genus-2 arcs, integrated tile by tile

def _hyperboloid(z, angle):
    """Hyperboloid-model position and unit velocity of the tangent (z, angle)."""
    x, y = z.real, z.imag
    r2 = x * x + y * y
    D = 1.0 - r2
    c, s = np.cos(angle), np.sin(angle)
    q = (x * c + y * s) / D
    pos = np.stack([(1.0 + r2) / D, 2.0 * x / D, 2.0 * y / D])
    vel = np.stack([2.0 * q, c + 2.0 * x * q, s + 2.0 * y * q])
    return pos, vel


def _minkowski(X, N):
    """<X, N_k> for X of shape (3, n) and N of shape (3, k); returns (k, n)."""
    return -N[0][:, None] * X[0][None] + N[1][:, None] * X[1][None] + N[2][:, None] * X[2][None]


@lru_cache(maxsize=None)
def _edge_normals():
    # edge k of the octagon is the bisector of 0 and g_k^{-1} 0
    ga, gb = hyp.generator_arrays()
    inv = np.array(hyp.INVERSE_INDEX)
    centers = hyp.mobius_arrays(ga[inv], gb[inv], 0.0)
    C, _ = _hyperboloid(centers, np.zeros(8))
    return np.array([1.0, 0.0, 0.0])[:, None] - C


def _exit_times(p, th):
    """Time to leave the octagon along (p, th), and the edge crossed."""
    pos, vel = _hyperboloid(p, th)
    N = _edge_normals()
    A, B = _minkowski(pos, N), _minkowski(vel, N)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(B < 0, -A / B, np.inf)
    r = np.maximum(r, 0.0)
    s = np.where(r < 1, np.arctanh(np.minimum(r, 1 - 1e-16)), np.inf)
    k = np.argmin(s, axis=0)
    return s[k, np.arange(p.size)], k


def tile_pieces(bases, angles, lengths, shift: float = 0.0, max_steps: int = 100_000):
    """Cut genus-2 arcs into the pieces lying in single octagon tiles.

    Returns ``(arc, start, angle, length)`` arrays, one entry per piece: the
    piece is phi_s(start, angle) for s in [0, length], written in
    fundamental-domain coordinates.
    """
    model = SurfaceModel.genus2()
    lengths = np.asarray(lengths, dtype=float)
    bases = np.broadcast_to(np.asarray(bases, dtype=complex), lengths.shape)
    angles = np.asarray(angles, dtype=float)
    if shift:
        bases, angles = hyp.geodesic_point_arrays(bases, angles, shift)
    p, th = fold(model, bases, angles)
    ga, gb = hyp.generator_arrays()
    arc = np.arange(lengths.size)
    rem = lengths.copy()
    out = []
    for _ in range(max_steps):
        if arc.size == 0:
            break
        se, k = _exit_times(p, th)
        out.append((arc, p, th, np.minimum(se, rem)))
        go = se < rem
        arc, p, th, se, k, rem = arc[go], p[go], th[go], se[go], k[go], rem[go] - se[go]
        q, d = hyp.geodesic_point_arrays(p, th, se)
        d = d + hyp.derivative_arg_arrays(ga[k], gb[k], q)
        p, th = hyp.mobius_arrays(ga[k], gb[k], q), np.mod(d, 2 * np.pi)
    else:
        raise RuntimeError("tile walk did not terminate")
    if not out:
        z = np.zeros(0)
        return z.astype(int), z.astype(complex), z, z
    return tuple(np.concatenate(c) for c in zip(*out))


def _ball_window(p, th, tau):
    """Sub-interval of [0, tau] where the piece is inside the inscribed ball."""
    c = np.cosh(hyp.octagon_geometry().inradius)
    pos, vel = _hyperboloid(p, th)
    # cosh(dist to center) = P0 cosh s + V0 sinh s; solve for e^s
    P0, V0 = pos[0], vel[0]
    disc = c * c - (P0 * P0 - V0 * V0)
    sq = np.sqrt(np.maximum(disc, 0.0))
    hit = disc > 0
    lo = np.where(hit, np.log(np.maximum(c - sq, 1e-300) / (P0 + V0)), 0.0)
    hi = np.where(hit, np.log((c + sq) / (P0 + V0)), 0.0)
    lo = np.clip(lo, 0.0, tau)
    return lo, np.clip(hi, lo, tau)


def _gauss_pieces(potentials, arc, p, th, lo, hi, n_arcs, density, out):
    L = hi - lo
    m = np.clip(np.ceil(L * density).astype(int), 2, 256)
    m[L <= 0] = 0
    model = SurfaceModel.genus2()
    for order in np.unique(m[m > 0]):
        idx = np.flatnonzero(m == order)
        x, w = np.polynomial.legendre.leggauss(int(order))
        s = lo[idx, None] + 0.5 * L[idx, None] * (x[None, :] + 1.0)
        ww = 0.5 * L[idx, None] * w[None, :]
        pts, dirs = hyp.geodesic_point_arrays(p[idx, None], th[idx, None], s)
        dirs = np.mod(dirs, 2 * np.pi)
        for k, f in enumerate(potentials):
            v = f.evaluate(model, pts, dirs)
            out[k] += np.bincount(arc[idx], weights=(v * ww).sum(axis=1), minlength=n_arcs)


def genus2_tile_integrals(potentials, bases, angles, lengths, shift: float = 0.0,
                          density: float = TILE_DENSITY) -> np.ndarray:
    """Arc integrals on the genus-2 surface by Gauss-Legendre on tile pieces.

    Each arc is walked through the octagon tiles in closed form and each piece
    is cut where it enters and leaves the inscribed ball. Inside a piece the
    integrand is smooth, so Gauss-Legendre with ``density`` nodes per unit
    length converges fast; potentials constant outside the ball only need the
    inner pieces. Agrees with fine Simpson to ~1e-7 per arc at the default.
    """
    potentials = list(potentials)
    lengths = np.asarray(lengths, dtype=float)
    out = np.zeros((len(potentials), lengths.size))
    if lengths.size == 0:
        return out
    arc, p, th, tau = tile_pieces(bases, angles, lengths, shift)
    lo, hi = _ball_window(p, th, tau)
    n = lengths.size
    outer = [f.outer_value() for f in potentials]
    ball = [k for k, v in enumerate(outer) if v is not None]
    free = [k for k, v in enumerate(outer) if v is None]
    if ball:
        outside = np.bincount(arc, weights=tau - (hi - lo), minlength=n)
        sub = np.zeros((len(ball), n))
        _gauss_pieces([potentials[k] for k in ball], arc, p, th, lo, hi, n, density, sub)
        for i, k in enumerate(ball):
            out[k] = sub[i] + outer[k] * outside
    if free:
        sub = np.zeros((len(free), n))
        fs = [potentials[k] for k in free]
        zero = np.zeros_like(lo)
        for a, b in ((zero, lo), (lo, hi), (hi, tau)):
            _gauss_pieces(fs, arc, p, th, a, b, n, density, sub)
        for i, k in enumerate(free):
            out[k] = sub[i]
    return out


def _exact_torus_terms(F: Potential):
    """Split F into (coef, direction factor, plane wave or None) terms, or None if impossible."""
    if isinstance(F, LinearCombination):
        terms = []
        for c, f in F.terms:
            sub = _exact_torus_terms(f)
            if sub is None:
                return None
            terms.extend((c * c2, d, p) for c2, d, p in sub)
        return terms
    if isinstance(F, Product):
        dirs, waves = [], []
        for f in F.factors:
            (dirs if f.direction_only else waves).append(f)
        if len(waves) > 1 or (waves and not isinstance(waves[0], PositionHarmonic)):
            return None
        d = Product(tuple(dirs)) if dirs else Constant(1.0)
        return [(1.0, d, waves[0] if waves else None)]
    if F.direction_only:
        return [(1.0, F, None)]
    if isinstance(F, PositionHarmonic):
        return [(1.0, Constant(1.0), F)]
    return None


def exact_torus_integrals(F: Potential, model: SurfaceModel, bases, angles, lengths,
                          shift: float = 0.0):
    """Closed-form integrals along straight torus arcs, or None when F has no closed form.

    Directions are constant along torus geodesics; a plane wave integrates to
    l cos(A + w (s0 + l/2)) sinc(w l / 2) with w the wave vector along the arc.
    """
    terms = _exact_torus_terms(F)
    if terms is None:
        return None
    bases = np.asarray(bases, dtype=complex)
    angles = np.asarray(angles, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    total = np.zeros(lengths.shape)
    for c, d, wave in terms:
        dvals = d.evaluate(model, bases, angles)
        if wave is None:
            total += c * dvals * lengths
            continue
        k = wave.wave_vector(model)
        omega = k.real * np.cos(angles) + k.imag * np.sin(angles)
        A = k.real * bases.real + k.imag * bases.imag - wave.phase
        mid = shift + 0.5 * lengths
        total += c * dvals * lengths * np.cos(A + omega * mid) * np.sinc(omega * lengths / (2 * np.pi))
    return total


def integrate_along_arc(F: Potential, arc, model: SurfaceModel, h: float = DEFAULT_STEP,
                        shift: float = 0.0) -> float:
    """Integral of F over phi_s(arc start) for s in [shift, shift + length]."""
    if not h > 0:
        raise ValueError("step must be positive")
    return float(arc_integrals([F], model, arc.base, np.array([arc.angle]),
                               np.array([arc.length]), h=h, shift=shift)[0, 0])


def arc_average(F: Potential, arc, model: SurfaceModel, h: float = DEFAULT_STEP,
                shift: float = 0.0) -> float:
    """The pairing of F with the normalized Lebesgue measure on the arc."""
    if not arc.length > 0:
        raise DegenerateArcError("arc of non-positive length")
    return integrate_along_arc(F, arc, model, h, shift) / arc.length


# ---------------------------------------------------------------------------
# test family

_TORUS_FAMILY = (
    "dirharm:1:0", "dirharm:1:pi/2", "posharm:1:0:0", "posharm:1:0:pi/2",
    "posharm:0:1:0", "posharm:0:1:pi/2", "dirharm:2:0", "dirharm:2:pi/2",
    "posharm:1:1:0", "posharm:1:1:pi/2", "posharm:1:-1:0", "posharm:1:-1:pi/2",
    "dirharm:3:0", "dirharm:3:pi/2", "posharm:2:0:0", "posharm:2:0:pi/2",
    "posharm:0:2:0", "posharm:0:2:pi/2", "dirharm:1:0*posharm:1:0:0", "dirharm:1:pi/2*posharm:0:1:0",
    "dirharm:4:0", "dirharm:4:pi/2", "posharm:2:1:0", "posharm:2:1:pi/2",
    "posharm:1:2:0", "posharm:1:2:pi/2", "dirharm:1:0*posharm:0:1:0", "dirharm:1:pi/2*posharm:1:0:0",
    "dirharm:2:0*posharm:1:0:0", "dirharm:2:0*posharm:0:1:0", "posharm:2:-1:0", "posharm:1:-2:0",
)

_GENUS2_FAMILY = (
    "dirharm:1:0*bump", "dirharm:1:pi/2*bump", "radial:1", "radial:2",
    "dirharm:2:0*bump", "dirharm:2:pi/2*bump", "radial:3", "dirharm:1:0*radial:1*bump",
    "dirharm:1:pi/2*radial:1*bump", "dirharm:3:0*bump", "dirharm:3:pi/2*bump", "radial:4",
    "dirharm:2:0*radial:1*bump", "dirharm:2:pi/2*radial:1*bump", "dirharm:1:0*radial:2*bump",
    "dirharm:1:pi/2*radial:2*bump", "dirharm:4:0*bump", "dirharm:4:pi/2*bump", "radial:5",
    "dirharm:3:0*radial:1*bump", "dirharm:3:pi/2*radial:1*bump", "dirharm:2:0*radial:2*bump",
    "dirharm:2:pi/2*radial:2*bump", "dirharm:1:0*radial:3*bump", "dirharm:1:pi/2*radial:3*bump",
    "dirharm:5:0*bump", "dirharm:5:pi/2*bump", "radial:6", "dirharm:4:0*radial:1*bump",
    "dirharm:4:pi/2*radial:1*bump", "dirharm:3:0*radial:2*bump", "dirharm:3:pi/2*radial:2*bump",
)


@dataclass(frozen=True)
class TestFamily:
    """Sup-norm-one test functions g_1..g_n, with stable indexing."""

    __test__ = False  # not a pytest class

    model: SurfaceModel
    members: tuple

    @property
    def n(self) -> int:
        return len(self.members)

    def specs(self) -> list[str]:
        return [g.spec for g in self.members]

    def sub(self, indices) -> "TestFamily":
        """Sub-family by 0-based indices."""
        return TestFamily(self.model, tuple(self.members[i] for i in indices))


def default_test_family(n: int, model: SurfaceModel) -> TestFamily:
    """First n members of the fixed family for the model; contains no constants.

    Torus: cos/sin of the direction and of plane waves in a fixed order,
    starting cos theta, sin theta, cos 2 pi u, sin 2 pi u. Genus 2: direction
    harmonics times the radial bump, and radial profiles.
    """
    if not 1 <= n <= 32:
        raise ValueError("family size must lie in [1, 32]")
    table = _TORUS_FAMILY if model.is_torus else _GENUS2_FAMILY
    return TestFamily(model, tuple(parse_potential(s) for s in table[:n]))
