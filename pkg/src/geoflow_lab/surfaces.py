"""The two model surfaces: the flat torus and the genus-2 octagon surface.

Surface points are complex numbers in both models. On the torus
``u + iv`` are the coordinates in ``[0, side)^2``; on the genus-2
surface the point is a disk coordinate inside the regular octagon
centered at 0, which is the Dirichlet domain of 0 for the octagon group.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import hyperbolic as hyp
from .errors import RejectionStallError

GENUS2 = "genus2"
TORUS = "torus"

_EDGE_TOL = 1e-12
# edges E_i = D ∩ g_i^{-1} D with i in this set belong to the half-open domain
_KEPT_EDGES = frozenset(range(4))


@dataclass(frozen=True)
class SurfaceModel:
    kind: str
    torus_side: float = 1.0

    def __post_init__(self):
        if self.kind not in (GENUS2, TORUS):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if not self.torus_side > 0:
            raise ValueError("torus side must be positive")

    @classmethod
    def genus2(cls) -> "SurfaceModel":
        return cls(GENUS2)

    @classmethod
    def torus(cls, side: float = 1.0) -> "SurfaceModel":
        return cls(TORUS, float(side))

    @classmethod
    def parse(cls, text: str) -> "SurfaceModel":
        """Parse ``genus2``, ``torus`` or ``torus:<side>``."""
        text = text.strip().lower()
        if text == GENUS2:
            return cls.genus2()
        if text == TORUS:
            return cls.torus()
        if text.startswith(TORUS + ":"):
            return cls.torus(float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse surface {text!r}")

    @property
    def is_torus(self) -> bool:
        return self.kind == TORUS

    def __str__(self):
        return f"torus:{self.torus_side:g}" if self.is_torus else GENUS2


@dataclass(frozen=True)
class SMCoordinate:
    """A point of the unit tangent bundle: surface point plus direction angle."""

    point: complex
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "point", complex(self.point))
        object.__setattr__(self, "angle", float(np.mod(self.angle, 2 * np.pi)))


def area(model: SurfaceModel) -> float:
    if model.is_torus:
        return model.torus_side ** 2
    return 4.0 * np.pi  # Gauss-Bonnet, genus 2, curvature -1


# ---------------------------------------------------------------------------
# fundamental domains

def _generator_images(z):
    ga, gb = hyp.generator_arrays()
    return hyp.mobius_arrays(ga[:, None], gb[:, None], np.asarray(z, dtype=complex)[None, :])


def contains_array(model: SurfaceModel, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if model.is_torus:
        s = model.torus_side
        return (z.real >= 0) & (z.real < s) & (z.imag >= 0) & (z.imag < s)
    inside_disk = np.abs(z) < 1.0 - hyp.BOUNDARY_EPS
    zz = np.where(inside_disk, z, 0.0)
    r = np.abs(zz)
    img = np.abs(_generator_images(zz))
    tol = _EDGE_TOL * np.maximum(1.0, 1.0 / (1.0 - r**2))
    outside = np.any(img < r[None, :] - tol, axis=0)
    on_edge = np.abs(img - r[None, :]) <= tol
    dropped = np.zeros(8, dtype=bool)
    dropped[[i for i in range(8) if i not in _KEPT_EDGES]] = True
    on_dropped = np.any(on_edge & dropped[:, None], axis=0)
    return inside_disk & ~outside & ~on_dropped


def contains(model: SurfaceModel, p) -> bool:
    """Membership in the canonical (half-open) fundamental domain."""
    return bool(contains_array(model, p)[0])


def fold(model: SurfaceModel, z, angle=None, max_iter: int = 200):
    """Map points (and optionally directions) into the fundamental domain.

    For the genus-2 surface this repeatedly applies the side pairing that
    brings the point closest to the center; it stops once no generator
    decreases ``|z|``, i.e. the point is in the Dirichlet domain of 0.
    Boundary points may land on either copy of an edge.
    """
    z = np.array(z, dtype=complex, copy=True)
    ang = None if angle is None else np.array(np.broadcast_to(angle, z.shape), dtype=float)
    if model.is_torus:
        s = model.torus_side
        z = np.mod(z.real, s) + 1j * np.mod(z.imag, s)
        return z if ang is None else (z, np.mod(ang, 2 * np.pi))

    ga, gb = hyp.generator_arrays()
    flat = z.reshape(-1)
    flat_ang = None if ang is None else ang.reshape(-1)
    active = np.arange(flat.size)
    for _ in range(max_iter):
        if active.size == 0:
            break
        w = flat[active]
        img = hyp.mobius_arrays(ga[:, None], gb[:, None], w[None, :])
        mags = np.abs(img)
        best = np.argmin(mags, axis=0)
        cols = np.arange(active.size)
        move = mags[best, cols] < np.abs(w) * (1.0 - 1e-15)
        if not move.any():
            break
        idx = active[move]
        k = best[move]
        if flat_ang is not None:
            flat_ang[idx] += hyp.derivative_arg_arrays(ga[k], gb[k], flat[idx])
        flat[idx] = img[k, cols[move]]
        active = idx
    else:
        raise RuntimeError("folding did not converge")
    if ang is None:
        return flat.reshape(z.shape)
    return flat.reshape(z.shape), np.mod(flat_ang, 2 * np.pi).reshape(z.shape)


# ---------------------------------------------------------------------------
# sampling

def _area_density(z):
    return 4.0 / (1.0 - np.abs(z) ** 2) ** 2


def sample_points(model: SurfaceModel, rng: np.random.Generator, size: int,
                  max_proposals: int = 1_000_000) -> np.ndarray:
    """Draw ``size`` points distributed by normalized Riemannian area.

    Genus 2 uses rejection sampling from the uniform planar disk through
    the octagon vertices against the density 4 / (1 - |z|^2)^2.
    """
    if model.is_torus:
        uv = rng.random((size, 2)) * model.torus_side
        return uv[:, 0] + 1j * uv[:, 1]

    rv = hyp.octagon_geometry().vertex_radius
    dmax = float(_area_density(rv))
    out = []
    have = proposals = 0
    while have < size:
        batch = max(64, 4 * (size - have))
        r = rv * np.sqrt(rng.random(batch))
        phi = 2 * np.pi * rng.random(batch)
        u = rng.random(batch)
        z = r * np.exp(1j * phi)
        ok = contains_array(model, z) & (u * dmax < _area_density(z))
        proposals += batch
        acc = z[ok]
        out.append(acc)
        have += acc.size
        if proposals >= max_proposals and have < 1e-4 * proposals:
            raise RejectionStallError(f"acceptance {have}/{proposals}")
    return np.concatenate(out)[:size]


def sample_point(model: SurfaceModel, rng: np.random.Generator) -> complex:
    return complex(sample_points(model, rng, 1)[0])


def pair_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for pair ``index``; does not depend on the pair count."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_pairs(model: SurfaceModel, pairs: int, seed: int) -> list[tuple[complex, complex]]:
    out = []
    for i in range(pairs):
        x, y = sample_points(model, pair_rng(seed, i), 2)
        out.append((complex(x), complex(y)))
    return out


# ---------------------------------------------------------------------------
# deterministic quadrature over the fundamental domain

@lru_cache(maxsize=16)
def _domain_rule(model: SurfaceModel, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    if model.is_torus:
        s = model.torus_side
        t, wt = 0.5 * s * (x + 1), 0.5 * s * w
        U, V = np.meshgrid(t, t, indexing="ij")
        W = np.outer(wt, wt)
        return (U + 1j * V).ravel(), W.ravel()

    geo = hyp.octagon_geometry()
    half = np.pi / 8
    psi = half * x
    wpsi = half * w
    rho_edge = np.arctanh(np.tanh(geo.inradius) / np.cos(psi))
    pts, wts = [], []
    for k in range(8):
        rho = 0.5 * rho_edge[:, None] * (x[None, :] + 1)
        wrho = 0.5 * rho_edge[:, None] * w[None, :]
        phi = k * np.pi / 4 + psi[:, None]
        pts.append(np.tanh(0.5 * rho) * np.exp(1j * phi))
        wts.append(wpsi[:, None] * wrho * np.sinh(rho))
    return np.concatenate([p.ravel() for p in pts]), np.concatenate([q.ravel() for q in wts])


def domain_quadrature(model: SurfaceModel, n: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and Riemannian area weights of an n x n Gauss rule (per sector for genus 2)."""
    z, w = _domain_rule(model, int(n))
    return z.copy(), w.copy()


def area_quadrature(model: SurfaceModel, n: int = 64) -> float:
    return float(domain_quadrature(model, n)[1].sum())


def area_average(model: SurfaceModel, f, n: int = 64) -> float:
    """Area-normalized average of a function of the point, by quadrature."""
    z, w = domain_quadrature(model, n)
    return float(np.sum(w * f(z)) / np.sum(w))
