"""Enumeration of the geodesic arcs of length <= T joining two surface points.

On both model surfaces geodesics between lifted points are unique, so arcs
from x to y correspond one-to-one to deck elements: lattice vectors on the
torus, elements of the octagon group on the genus-2 surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import hyperbolic as hyp
from .errors import CapExceededError, MemoryBudgetError
from .surfaces import SurfaceModel, contains

GENUS2_T_CAP = 14.0
MAX_VISITED = 6_000_000
# distinct group elements at desk-scale T are >= 1e-4 apart in coefficient space,
# float drift in products is ~1e-10
DEDUPE_TOL = 1e-6
LABEL_RESOLUTION = 1e-9


@dataclass(frozen=True)
class GeodesicArc:
    length: float
    base: complex
    angle: float
    label: object  # Isometry on genus 2, (n1, n2) on the torus


@dataclass
class ArcSet:
    """Arcs of one query, sorted by length and then by label.

    The data is held column-wise: ``lengths``, ``angles`` and the label
    columns are aligned arrays. ``labels_ab`` holds the canonical
    SU(1,1) coefficients (genus 2) and ``labels_n`` the lattice vectors
    (torus); the other one is None.
    """

    model: SurfaceModel
    x: complex
    y: complex
    T: float
    delta: float | None
    lengths: np.ndarray
    angles: np.ndarray
    labels_ab: np.ndarray | None = None
    labels_n: np.ndarray | None = None
    # (parents, generators, element index per arc) of the search tree; words are rebuilt on demand
    trace: tuple | None = field(default=None, repr=False)

    def __len__(self):
        return self.lengths.size

    @property
    def base(self) -> complex:
        return self.x

    def label_keys(self) -> np.ndarray:
        """Integer sort keys: lattice vectors, or coefficients rounded to 1e-9."""
        if self.labels_n is not None:
            return self.labels_n
        ab = self.labels_ab
        cols = np.stack([ab[:, 0].real, ab[:, 0].imag, ab[:, 1].real, ab[:, 1].imag], axis=1)
        return np.round(cols / LABEL_RESOLUTION).astype(np.int64)

    @property
    def arcs(self) -> list[GeodesicArc]:
        out = []
        for i in range(len(self)):
            if self.labels_n is not None:
                label = (int(self.labels_n[i, 0]), int(self.labels_n[i, 1]))
            else:
                label = hyp.Isometry(self.labels_ab[i, 0], self.labels_ab[i, 1])
            out.append(GeodesicArc(float(self.lengths[i]), self.x, float(self.angles[i]), label))
        return out

    def subset(self, mask, T=None, delta=None) -> "ArcSet":
        idx = np.arange(len(self))[np.asarray(mask)]
        trace = None
        if self.trace is not None:
            parents, gens, elem = self.trace
            trace = (parents, gens, elem[idx])
        return ArcSet(
            self.model, self.x, self.y,
            self.T if T is None else T,
            self.delta if delta is None else delta,
            self.lengths[idx], self.angles[idx],
            None if self.labels_ab is None else self.labels_ab[idx],
            None if self.labels_n is None else self.labels_n[idx],
            trace,
        )

    def words(self) -> list[tuple[int, ...]]:
        """Generator index words of the genus-2 labels (as found by the search)."""
        if self.trace is None:
            raise ValueError("arc set carries no search trace")
        parents, gens, elem = self.trace
        out = []
        for i in elem:
            w = []
            while parents[i] >= 0:
                w.append(int(gens[i]))
                i = parents[i]
            out.append(tuple(reversed(w)))
        return out

    def word_strings(self) -> list[str]:
        """Generator words (genus 2) or lattice vectors (torus) as text."""
        if self.labels_n is not None:
            return [f"({n1},{n2})" for n1, n2 in self.labels_n]
        return [".".join(hyp.GENERATOR_NAMES[k] for k in w) or "e" for w in self.words()]


def _sorted(s: ArcSet) -> ArcSet:
    keys = s.label_keys()
    order = np.lexsort(tuple(keys[:, j] for j in reversed(range(keys.shape[1]))) + (s.lengths,))
    return s.subset(order)


# ---------------------------------------------------------------------------
# torus

def enumerate_torus(model: SurfaceModel, x, y, T: float) -> ArcSet:
    """All lattice vectors n with 0 < |y + side n - x| <= T."""
    if not T > 0:
        raise ValueError("T must be positive")
    s = model.torus_side
    d0 = complex(y) - complex(x)
    m = int(np.ceil(T / s)) + 1
    rng = np.arange(-m, m + 1)
    n1, n2 = np.meshgrid(rng, rng, indexing="ij")
    n1, n2 = n1.ravel(), n2.ravel()
    dx = d0.real + s * n1
    dy = d0.imag + s * n2
    lengths = np.hypot(dx, dy)
    keep = (lengths <= T) & (lengths > 0)
    angles = np.mod(np.arctan2(dy[keep], dx[keep]), 2 * np.pi)
    out = ArcSet(model, complex(x), complex(y), float(T), None, lengths[keep], angles,
                 labels_n=np.stack([n1[keep], n2[keep]], axis=1))
    return _sorted(out)


def lattice_scan(model: SurfaceModel, x, y, T: float) -> list[tuple[int, int]]:
    """Plain double loop over lattice vectors; the independent torus oracle."""
    s = model.torus_side
    x, y = complex(x), complex(y)
    out = []
    m = int(T // s) + 2
    for i in range(-m, m + 1):
        for j in range(-m, m + 1):
            d = abs(y + s * complex(i, j) - x)
            if 0 < d <= T:
                out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# genus 2

def _new_mask(tree_pts, cand, tol):
    """Rows of ``cand`` (n, 4 real) not within tol of tree_pts, up to sign, and unique among themselves."""
    n = cand.shape[0]
    fresh = np.ones(n, dtype=bool)
    if tree_pts is not None and tree_pts.shape[0]:
        tree = cKDTree(tree_pts)
        for sgn in (1.0, -1.0):
            d, _ = tree.query(sgn * cand, k=1, distance_upper_bound=tol)
            fresh &= ~np.isfinite(d)
    both = np.concatenate([cand, -cand])
    pairs = cKDTree(both).query_pairs(tol, output_type="ndarray")
    if pairs.size:
        i, j = pairs[:, 0] % n, pairs[:, 1] % n
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        hi = hi[lo != hi]
        fresh[hi] = False
    return fresh


def _real4(a, b):
    return np.stack([a.real, a.imag, b.real, b.imag], axis=1)


def _arcs_from_elements(model, x, y, T, a, b, trace=None):
    gy = hyp.mobius_arrays(a, b, y)
    angles, lengths = hyp.geodesic_between_arrays(x, gy)
    keep = (lengths <= T) & (lengths > 1e-12)
    idx = np.flatnonzero(keep)
    ca, cb = hyp.canonicalize_arrays(a[idx], b[idx])
    out = ArcSet(model, x, y, float(T), None, lengths[idx], angles[idx],
                 labels_ab=np.stack([ca, cb], axis=1),
                 trace=None if trace is None else (trace[0], trace[1], trace[2][idx]))
    return _sorted(out)


@dataclass
class SearchStats:
    visited: int = 0
    layers: int = 0
    max_kept_layer: int = 0


def _check_genus2_query(model, x, y, T, cap):
    if model.is_torus:
        raise ValueError("genus-2 enumerator called with a torus model")
    if not T > 0:
        raise ValueError("T must be positive")
    if T > cap:
        raise CapExceededError(f"T={T} exceeds the genus-2 cap {cap}")
    for p in (x, y):
        if not contains(model, p):
            raise ValueError(f"point {p!r} is not in the fundamental octagon")


def enumerate_genus2(model: SurfaceModel, x, y, T: float, cap: float = GENUS2_T_CAP,
                     max_visited: int = MAX_VISITED, stats: SearchStats | None = None) -> ArcSet:
    """Breadth-first search of the Cayley graph of the octagon group.

    An element g is expanded only while the tile gD can meet the closed
    ball B(x, T), tested through d(x, g0) <= T + circumradius. The tiles
    meeting a ball form an edge-connected set containing D, so every g with
    d(x, g y) <= T is reached.
    """
    x, y = complex(x), complex(y)
    _check_genus2_query(model, x, y, T, cap)
    geo = hyp.octagon_geometry()
    horizon = T + geo.circumradius + 1e-9
    ga, gb = hyp.generator_arrays()
    inv = np.array(hyp.INVERSE_INDEX)

    all_a = [np.array([1.0 + 0j])]
    all_b = [np.array([0.0 + 0j])]
    parent = [np.array([-1])]
    gen = [np.array([-1])]
    prev_pts = None
    cur_a, cur_b, cur_last = all_a[0], all_b[0], np.array([-1])
    cur_pts = _real4(cur_a, cur_b)
    offset, total = 0, 1
    layers = 0
    while cur_a.size:
        layers += 1
        k = np.arange(8)
        pa = np.repeat(cur_a, 8)
        pb = np.repeat(cur_b, 8)
        kk = np.tile(k, cur_a.size)
        pidx = np.repeat(np.arange(cur_a.size) + offset, 8)
        last = np.repeat(cur_last, 8)
        ok = (last < 0) | (kk != inv[np.maximum(last, 0)])
        pa, pb, kk, pidx = pa[ok], pb[ok], kk[ok], pidx[ok]
        ca, cb = hyp.compose_arrays(pa, pb, ga[kk], gb[kk])
        ca, cb = hyp.canonicalize_arrays(ca, cb)
        center = cb / np.conj(ca)
        near = hyp.dist_arrays(x, center) <= horizon
        ca, cb, kk, pidx = ca[near], cb[near], kk[near], pidx[near]
        pts = _real4(ca, cb)
        known = cur_pts if prev_pts is None else np.concatenate([prev_pts, cur_pts])
        fresh = _new_mask(known, pts, DEDUPE_TOL)
        ca, cb, kk, pidx = ca[fresh], cb[fresh], kk[fresh], pidx[fresh]
        offset = total
        total += ca.size
        if total > max_visited:
            raise MemoryBudgetError(f"visited set exceeds {max_visited} elements")
        all_a.append(ca)
        all_b.append(cb)
        parent.append(pidx)
        gen.append(kk)
        prev_pts, cur_pts = cur_pts, pts[fresh]
        cur_a, cur_b, cur_last = ca, cb, kk

    a = np.concatenate(all_a)
    b = np.concatenate(all_b)
    parents = np.concatenate(parent)
    gens = np.concatenate(gen)
    layer_of = np.concatenate([np.full(arr.size, i) for i, arr in enumerate(all_a)])
    out = _arcs_from_elements(model, x, y, T, a, b, (parents, gens, np.arange(a.size)))
    if stats is not None:
        stats.visited = int(a.size)
        stats.layers = layers
        kept = hyp.dist_arrays(x, hyp.mobius_arrays(a, b, y)) <= T
        stats.max_kept_layer = int(layer_of[kept].max()) if kept.any() else 0
    return out


def brute_force(model: SurfaceModel, x, y, T: float, word_bound: int,
                stats: SearchStats | None = None) -> ArcSet:
    """All reduced words of length <= word_bound, filtered by length, then deduplicated."""
    x, y = complex(x), complex(y)
    if word_bound < 0 or word_bound > 8:
        raise ValueError("word_bound must lie in [0, 8]")
    ga, gb = hyp.generator_arrays()
    inv = np.array(hyp.INVERSE_INDEX)
    a_layers = [np.array([1.0 + 0j])]
    b_layers = [np.array([0.0 + 0j])]
    cur_a, cur_b, cur_last = a_layers[0], b_layers[0], np.array([-1])
    for depth in range(word_bound):
        pa = np.repeat(cur_a, 8)
        pb = np.repeat(cur_b, 8)
        last = np.repeat(cur_last, 8)
        kk = np.tile(np.arange(8), cur_a.size)
        if depth:
            ok = kk != inv[last]
            pa, pb, kk = pa[ok], pb[ok], kk[ok]
        cur_a, cur_b = hyp.compose_arrays(pa, pb, ga[kk], gb[kk])
        cur_last = kk
        a_layers.append(cur_a)
        b_layers.append(cur_b)
    visited = sum(arr.size for arr in a_layers)
    # word_bound = 0 only has the identity, which is never an arc when x = y
    a = np.concatenate(a_layers)
    b = np.concatenate(b_layers)
    dist = hyp.dist_arrays(x, hyp.mobius_arrays(a, b, y))
    keep = np.flatnonzero((dist <= T) & (dist > 1e-12))
    a, b = hyp.canonicalize_arrays(a[keep], b[keep])
    fresh = _new_mask(None, _real4(a, b), DEDUPE_TOL) if a.size else np.zeros(0, dtype=bool)
    if stats is not None:
        stats.visited = int(visited)
        stats.layers = word_bound
    return _arcs_from_elements(model, x, y, T, a[fresh], b[fresh])


def distinct_elements(word_bound: int) -> tuple[int, int]:
    """(number of reduced words, number of distinct group elements) up to word_bound."""
    s = SearchStats()
    got = brute_force(SurfaceModel.genus2(), 0.0, 0.0, np.inf, word_bound, stats=s)
    return s.visited, len(got) + 1  # + identity


def same_labels(s1: ArcSet, s2: ArcSet, tol: float = DEDUPE_TOL) -> bool:
    """Whether two arc sets carry the same deck elements (tolerant comparison)."""
    if len(s1) != len(s2):
        return False
    if s1.labels_n is not None:
        return {tuple(r) for r in s1.labels_n} == {tuple(r) for r in s2.labels_n}
    if len(s1) == 0:
        return True
    p1 = _real4(s1.labels_ab[:, 0], s1.labels_ab[:, 1])
    p2 = _real4(s2.labels_ab[:, 0], s2.labels_ab[:, 1])
    d = np.minimum(cKDTree(p2).query(p1)[0], cKDTree(-p2).query(p1)[0])
    d2 = np.minimum(cKDTree(p1).query(p2)[0], cKDTree(-p1).query(p2)[0])
    return bool(np.all(d <= tol) and np.all(d2 <= tol))


def enumerate_arcs(model: SurfaceModel, x, y, T: float, **kwargs) -> ArcSet:
    if model.is_torus:
        return enumerate_torus(model, x, y, T)
    return enumerate_genus2(model, x, y, T, **kwargs)


def shell_filter(s: ArcSet, T: float, delta: float) -> ArcSet:
    """Arcs with T - delta < length <= T."""
    if T > s.T:
        raise ValueError(f"arc set horizon {s.T} is below T={T}")
    mask = (s.lengths > T - delta) & (s.lengths <= T)
    return s.subset(mask, T=T, delta=delta)
