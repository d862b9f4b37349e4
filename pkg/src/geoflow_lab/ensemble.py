"""Arc ensembles: the arcs of many sampled point pairs, enumerated once.

Every estimator in the package works on an :class:`ArcEnsemble`. The arcs
of all pairs are enumerated up to ``T_max`` once and stored column-wise,
pair after pair, each pair sorted by length. Shells and cumulative sets at
smaller T are index ranges into these columns, and arc integrals of
potentials are computed lazily and cached, so the pressure of ``F + beta g``
for many ``beta`` costs one integration per potential.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import arcs as arcmod
from . import potentials as pot
from .surfaces import SurfaceModel, area, sample_pairs

DEFAULT_PAIRS = 64
INTEGRAL_CHUNK = 50_000


def default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(eq=False)
class ArcEnsemble:
    model: SurfaceModel
    T_max: float
    points: np.ndarray  # (pairs, 2) complex: x, y
    seed: int | None
    lengths: np.ndarray
    angles: np.ndarray
    offsets: np.ndarray  # pair i owns arcs offsets[i]:offsets[i+1]
    sets: list = field(default_factory=list, repr=False)
    threads: int = 1
    step: float = pot.DEFAULT_STEP
    _cache: dict = field(default_factory=dict, repr=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_points(cls, model: SurfaceModel, T_max: float, points, seed=None,
                    threads: int | None = None, **enum_kwargs) -> "ArcEnsemble":
        """Enumerate the arcs of the given (x, y) pairs up to ``T_max``."""
        pts = np.asarray(points, dtype=complex).reshape(-1, 2)
        if pts.shape[0] < 1:
            raise ValueError("an ensemble needs at least one pair")
        if not T_max > 0:
            raise ValueError("T_max must be positive")
        threads = default_threads() if threads is None else max(1, int(threads))

        def run(xy):
            return arcmod.enumerate_arcs(model, xy[0], xy[1], T_max, **enum_kwargs)

        if threads > 1 and pts.shape[0] > 1:
            with ThreadPoolExecutor(threads) as ex:
                sets = list(ex.map(run, pts))  # map keeps pair order
        else:
            sets = [run(xy) for xy in pts]
        counts = np.array([len(s) for s in sets])
        offsets = np.concatenate([[0], np.cumsum(counts)])
        lengths = np.concatenate([s.lengths for s in sets]) if sets else np.zeros(0)
        angles = np.concatenate([s.angles for s in sets]) if sets else np.zeros(0)
        return cls(model, float(T_max), pts, seed, lengths, angles, offsets, sets, threads)

    @classmethod
    def build(cls, model: SurfaceModel, T_max: float, pairs: int = DEFAULT_PAIRS,
              seed: int = 0, threads: int | None = None, **enum_kwargs) -> "ArcEnsemble":
        """Sample ``pairs`` point pairs by area from ``seed`` and enumerate them.

        Pair i depends only on ``(seed, i)``, so a larger ensemble with the
        same seed extends a smaller one.
        """
        if pairs < 1:
            raise ValueError("pairs must be >= 1")
        pts = sample_pairs(model, int(pairs), int(seed))
        return cls.from_points(model, T_max, pts, seed=int(seed), threads=threads, **enum_kwargs)

    # -- bookkeeping -------------------------------------------------------

    @property
    def pairs(self) -> int:
        return self.points.shape[0]

    @property
    def area(self) -> float:
        return area(self.model)

    @property
    def pair_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.pairs), np.diff(self.offsets))

    @property
    def bases(self) -> np.ndarray:
        return np.repeat(self.points[:, 0], np.diff(self.offsets))

    def __len__(self):
        return self.lengths.size

    @property
    def key(self) -> str:
        """Identifies the ensemble: model, horizon, seed and the exact point pairs."""
        h = hashlib.sha1(np.ascontiguousarray(self.points).tobytes()).hexdigest()[:16]
        return f"{self.model}|T={self.T_max!r}|seed={self.seed}|pairs={self.pairs}|{h}"

    def pair_slice(self, i: int) -> slice:
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def ranges(self, lo: float, hi: float):
        """Per pair, the index range of arcs with lo < length <= hi."""
        if hi > self.T_max + 1e-12:
            raise ValueError(f"ensemble horizon {self.T_max} is below T={hi}")
        starts = np.empty(self.pairs, dtype=int)
        stops = np.empty(self.pairs, dtype=int)
        for i in range(self.pairs):
            a, b = self.offsets[i], self.offsets[i + 1]
            ls = self.lengths[a:b]
            starts[i] = a + np.searchsorted(ls, lo, side="right")
            stops[i] = a + np.searchsorted(ls, hi, side="right")
        return starts, stops

    def select(self, T: float, delta: float | None = None) -> np.ndarray:
        """Indices of the shell T - delta < l <= T, or of all l <= T if delta is None."""
        lo = -np.inf if delta is None else T - delta
        starts, stops = self.ranges(lo, T)
        if not starts.size:
            return np.zeros(0, dtype=int)
        return np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)])

    # -- arc integrals -----------------------------------------------------

    def _compute(self, F: pot.Potential, idx: np.ndarray, shift: float) -> np.ndarray:
        lengths = self.lengths[idx]
        if isinstance(F, pot.Constant) and shift == 0.0:
            return F.c * lengths
        if isinstance(F, pot.LinearCombination):
            # term by term so that constants stay exact: int (F + c) = int F + c l
            out = np.zeros(idx.size)
            for c, f in F.terms:
                out += c * self._compute(f, idx, shift)
            return out
        bases = self.bases[idx]
        angles = self.angles[idx]
        if self.model.is_torus:
            exact = pot.exact_torus_integrals(F, self.model, bases, angles, lengths, shift)
            if exact is not None:
                return exact
            return pot.arc_integrals([F], self.model, bases, angles, lengths,
                                     h=self.step, shift=shift)[0]
        return pot.genus2_tile_integrals([F], bases, angles, lengths, shift=shift)[0]

    def integrals(self, F: pot.Potential, index=None, shift: float = 0.0) -> np.ndarray:
        """Integrals of F over the arcs ``index`` (all arcs by default).

        Values are cached per (F, shift) and filled in on demand, so
        shells requested later reuse earlier work.
        """
        idx = np.arange(len(self)) if index is None else np.asarray(index, dtype=int)
        key = (F.spec, float(shift))
        store = self._cache.get(key)
        if store is None:
            store = np.full(len(self), np.nan)
            self._cache[key] = store
        todo = idx[np.isnan(store[idx])]
        if todo.size:
            todo = np.unique(todo)
            chunks = [todo[i:i + INTEGRAL_CHUNK] for i in range(0, todo.size, INTEGRAL_CHUNK)]
            if self.threads > 1 and len(chunks) > 1:
                with ThreadPoolExecutor(self.threads) as ex:
                    vals = list(ex.map(lambda c: self._compute(F, c, shift), chunks))
            else:
                vals = [self._compute(F, c, shift) for c in chunks]
            for c, v in zip(chunks, vals):
                store[c] = v
        return store[idx]

    def averages(self, F: pot.Potential, index=None, shift: float = 0.0) -> np.ndarray:
        """Pairings of F with the normalized Lebesgue measure of each arc."""
        idx = np.arange(len(self)) if index is None else np.asarray(index, dtype=int)
        return self.integrals(F, idx, shift) / self.lengths[idx]
