"""Entropy and pressure as growth rates of weighted arc counts.

For a potential F the partition function at horizon T is the area-normalized
average over sampled pairs of ``sum exp(int_gamma F)``, summed over the arcs
of the shell ``T - delta < l <= T`` (or over all arcs of length <= T in
cumulative mode). Its exponential growth rate in T is the pressure P(F);
for F = 0 it is the topological entropy.

Two growth-rate extractors are provided. :func:`pressure_fit` is the plain
least-squares slope of log Z against T. :func:`pressure_estimate` defaults to
the root of ``P -> slope of log Z_T(F - P)``: the P at which the weighted
counts stop growing. Both cancel the polynomial prefactor of Z, but only the
root turns the arc-wise identity ``int (F + c) = int F + c l`` into the exact
shift ``P(F + c) = P(F) + c``; the slope is off by up to ``c delta / (T_hi - T_lo)``
because lengths spread across each shell.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from . import potentials as pot
from .ensemble import ArcEnsemble
from .errors import EmptyEnsembleError, InsufficientGridError

SHELL = "shell"
CUMULATIVE = "cumulative"
DEFAULT_DELTA = 0.5
EMPTY_FLAG_FRACTION = 0.5
MIN_FIT_POINTS = 4


def as_potential(F) -> pot.Potential:
    if isinstance(F, pot.Potential):
        return F
    if isinstance(F, (int, float)):
        return pot.Constant(float(F))
    return pot.parse_potential(str(F))


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included) or a comma separated list."""
    text = text.strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} is not start:stop:step")
        start, stop, step = parts
        if not step > 0 or stop < start:
            raise ValueError(f"bad grid {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        grid = start + step * np.arange(n)
    else:
        grid = np.array([float(v) for v in text.split(",") if v.strip()])
    check_grid(grid)
    return grid


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("T grid must be a non-empty 1-D sequence")
    if np.any(grid <= 0):
        raise ValueError("T grid values must be positive")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("T grid must be strictly increasing")
    return grid


def _index_for(ens: ArcEnsemble, T: float, delta: float | None, mode: str):
    if mode == SHELL:
        if delta is None or not delta > 0:
            raise ValueError("shell mode needs delta > 0")
        return ens.ranges(T - delta, T)
    if mode == CUMULATIVE:
        return ens.ranges(-np.inf, T)
    raise ValueError(f"unknown mode {mode!r}")


def pair_log_sums(values: np.ndarray, starts, stops) -> np.ndarray:
    """Per pair, log of sum exp(values[start:stop]); -inf for an empty range."""
    out = np.full(len(starts), -np.inf)
    for i, (a, b) in enumerate(zip(starts, stops)):
        if b > a:
            v = values[a:b]
            m = v.max()
            out[i] = m + np.log(np.sum(np.exp(v - m)))
    return out


def _normalize(pair_lse: np.ndarray, ens: ArcEnsemble) -> float:
    # empty shells enter the average as zeros
    if not np.isfinite(pair_lse).any():
        return -np.inf
    return float(logsumexp(pair_lse) - np.log(ens.pairs) - 2.0 * np.log(ens.area))


def _log_partition(ens, F, T, delta, mode, pair):
    F = as_potential(F)
    starts, stops = _index_for(ens, T, delta, mode)
    if pair is not None:
        starts, stops = starts[pair:pair + 1], stops[pair:pair + 1]
    idx = np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)])
    w = np.zeros(len(ens))
    w[idx] = ens.integrals(F, idx)
    lse = pair_log_sums(w, starts, stops)
    if pair is not None:
        value = float(lse[0])
    else:
        value = _normalize(lse, ens)
    if not np.isfinite(value):
        raise EmptyEnsembleError(f"no arcs with {'T - delta < l <= T' if mode == SHELL else 'l <= T'} at T={T}")
    return value


def log_partition(ens: ArcEnsemble, F, T: float, delta: float = DEFAULT_DELTA,
                  pair: int | None = None) -> float:
    """log of (1 / area^2) (1 / pairs) sum_pairs sum_shell exp(int F).

    With ``pair`` set, the un-normalized log sum of that pair's shell.
    Raises EmptyEnsembleError when every shell is empty.
    """
    return _log_partition(ens, F, T, delta, SHELL, pair)


def log_partition_cumulative(ens: ArcEnsemble, F, T: float, pair: int | None = None) -> float:
    """As :func:`log_partition`, summing over all arcs of length <= T."""
    return _log_partition(ens, F, T, None, CUMULATIVE, pair)


# ---------------------------------------------------------------------------
# curves

@dataclass
class PressureCurve:
    potential: str
    delta: float | None
    mode: str
    T: np.ndarray
    logZ: np.ndarray
    arc_count_mean: np.ndarray
    empty_shell_fraction: np.ndarray
    pairs: int
    seed: int | None
    ensemble_key: str
    pair_logZ: np.ndarray | None = field(default=None, repr=False)  # (pairs, len(T)), un-normalized

    @property
    def flagged(self) -> bool:
        """More than half the pairs have an empty shell somewhere on the grid."""
        return bool(np.any(self.empty_shell_fraction > EMPTY_FLAG_FRACTION))

    def provenance(self) -> tuple:
        return (self.ensemble_key, self.mode, self.delta, tuple(np.round(self.T, 12)))

    def for_pair(self, i: int) -> "PressureCurve":
        if self.pair_logZ is None:
            raise ValueError("curve was built without per-pair values")
        lz = self.pair_logZ[i]
        return PressureCurve(self.potential, self.delta, self.mode, self.T, lz,
                             np.isfinite(lz).astype(float), (~np.isfinite(lz)).astype(float),
                             1, self.seed, f"{self.ensemble_key}|pair={i}")

    def to_csv(self, fh=None, header: list[str] | None = None) -> str:
        """Columns T, logZ, arc_count_mean, empty_shell_fraction; '#' header lines first."""
        buf = io.StringIO()
        for line in header or []:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "logZ", "arc_count_mean", "empty_shell_fraction"])
        for row in zip(self.T, self.logZ, self.arc_count_mean, self.empty_shell_fraction):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def pressure_curve(ens: ArcEnsemble, F, T_grid, delta: float | None = DEFAULT_DELTA,
                   mode: str = SHELL, pointwise: bool = False) -> PressureCurve:
    """log Z over a T grid; grid points with no arcs at all get -inf."""
    F = as_potential(F)
    T_grid = check_grid(T_grid)
    if mode == CUMULATIVE:
        delta = None
    ranges = [_index_for(ens, T, delta, mode) for T in T_grid]
    idx = np.unique(np.concatenate(
        [np.arange(a, b) for s, e in ranges for a, b in zip(s, e)] + [np.zeros(0, dtype=int)]))
    w = np.zeros(len(ens))
    w[idx] = ens.integrals(F, idx)
    logZ, counts, empty, per_pair = [], [], [], []
    for starts, stops in ranges:
        lse = pair_log_sums(w, starts, stops)
        logZ.append(_normalize(lse, ens))
        n = stops - starts
        counts.append(n.mean())
        empty.append(np.mean(n == 0))
        per_pair.append(lse)
    return PressureCurve(F.spec, delta, mode, T_grid, np.array(logZ), np.array(counts),
                         np.array(empty), ens.pairs, ens.seed, ens.key,
                         np.array(per_pair).T if pointwise else None)


# ---------------------------------------------------------------------------
# growth-rate extraction

@dataclass
class PressureEstimate:
    value: float
    naive_value: float
    slope_stderr: float
    window: tuple
    method: str
    T_max: float
    provenance: tuple = ()

    @property
    def accepted(self) -> bool:
        """Consistency gate between the fitted and the one-point (1/T) log Z value."""
        return bool(abs(self.value - self.naive_value) < 5 * self.slope_stderr + 2.0 / self.T_max)

    def as_dict(self) -> dict:
        return {
            "value": self.value, "naive_value": self.naive_value,
            "slope_stderr": self.slope_stderr, "window": list(self.window),
            "method": self.method, "accepted": self.accepted,
        }


def _line_fit(T, y):
    """Least-squares slope, intercept and slope standard error."""
    T = np.asarray(T, dtype=float)
    y = np.asarray(y, dtype=float)
    Tc = T - T.mean()
    sxx = float(Tc @ Tc)
    slope = float(Tc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * T.mean())
    resid = y - (intercept + slope * T)
    stderr = float(np.sqrt(resid @ resid / (T.size - 2) / sxx)) if T.size > 2 else 0.0
    return slope, intercept, stderr


def _window_mask(T, window):
    if window is None:
        return np.ones(T.size, dtype=bool)
    lo, hi = window
    return (T >= lo - 1e-12) & (T <= hi + 1e-12)


def pressure_fit(curve: PressureCurve, window=None) -> PressureEstimate:
    """Least-squares slope of log Z against T over ``window`` (whole grid by default)."""
    T = np.asarray(curve.T, dtype=float)
    y = np.asarray(curve.logZ, dtype=float)
    if not np.isfinite(y).any():
        raise EmptyEnsembleError("every grid point has an empty arc set")
    use = _window_mask(T, window) & np.isfinite(y)
    if use.sum() < MIN_FIT_POINTS:
        raise InsufficientGridError(f"{int(use.sum())} finite grid points in the window, need {MIN_FIT_POINTS}")
    slope, _, stderr = _line_fit(T[use], y[use])
    last = np.flatnonzero(np.isfinite(y))[-1]
    Tm = float(T[last])
    return PressureEstimate(slope, float(y[last]) / Tm, stderr,
                            (float(T[use][0]), float(T[use][-1])), "slope", Tm,
                            curve.provenance() + (curve.potential,))


class ShellStack:
    """The arcs of several grid points stacked for repeated weighted sums.

    Holds, for each grid value T, the arc lengths of its shell (or
    cumulative set) as one segment of a flat array; ``log_sums`` then
    returns ``log sum exp(w - P l)`` per segment with a single pass.
    """

    def __init__(self, ens: ArcEnsemble, T, delta: float | None):
        self.T = np.asarray(T, dtype=float)
        self.index = [ens.select(t, delta) for t in self.T]
        sizes = np.array([i.size for i in self.index])
        if np.any(sizes == 0):
            raise EmptyEnsembleError("a grid point has no arcs")
        self.flat = np.concatenate(self.index)
        self.starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.segment = np.repeat(np.arange(sizes.size), sizes)
        # lengths measured from the segment's T keep the exponents small
        self.rel = ens.lengths[self.flat] - self.T[self.segment]

    def log_sums(self, w: np.ndarray, P: float) -> np.ndarray:
        v = w - P * self.rel
        m = np.maximum.reduceat(v, self.starts)
        s = np.add.reduceat(np.exp(v - m[self.segment]), self.starts)
        return m + np.log(s) - P * self.T

    def root(self, w: np.ndarray) -> tuple[float, float]:
        """P with zero least-squares slope of log sum exp(w - P l) in T, and the slope stderr."""

        def g(P):
            return _line_fit(self.T, self.log_sums(w, P))[0]

        p0 = g(0.0)
        lo, hi = p0 - 1.0, p0 + 1.0
        for _ in range(60):
            if g(lo) > 0 > g(hi):
                break
            lo, hi = lo - (hi - lo), hi + (hi - lo)
        else:
            raise InsufficientGridError("no sign change of the growth slope")
        P = brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
        return float(P), _line_fit(self.T, self.log_sums(w, P))[2]


def pressure_estimate(ens: ArcEnsemble, F, T_grid, delta: float | None = DEFAULT_DELTA,
                      mode: str = SHELL, window=None, method: str = "root") -> PressureEstimate:
    """Pressure of F from the arc ensemble.

    ``method="root"`` (default) solves for the exponent that makes the
    weighted counts flat in T; ``method="slope"`` is :func:`pressure_fit`.
    Both report the naive ``log Z(T_max) / T_max`` for comparison.
    """
    F = as_potential(F)
    curve = pressure_curve(ens, F, T_grid, delta, mode)
    if method == "slope":
        return pressure_fit(curve, window)
    if method != "root":
        raise ValueError(f"unknown method {method!r}")
    T = curve.T
    if not np.isfinite(curve.logZ).any():
        raise EmptyEnsembleError("every grid point has an empty arc set")
    use = _window_mask(T, window) & np.isfinite(curve.logZ)
    if use.sum() < MIN_FIT_POINTS:
        raise InsufficientGridError(f"{int(use.sum())} finite grid points in the window, need {MIN_FIT_POINTS}")
    stack = ShellStack(ens, T[use], None if mode == CUMULATIVE else delta)
    P, stderr = stack.root(ens.integrals(F, stack.flat))
    last = np.flatnonzero(np.isfinite(curve.logZ))[-1]
    Tm = float(T[last])
    return PressureEstimate(P, float(curve.logZ[last]) / Tm, stderr,
                            (float(T[use][0]), float(T[use][-1])), "root", Tm,
                            curve.provenance())


def entropy_estimate(model=None, T_grid=None, delta: float = DEFAULT_DELTA, pairs: int = 64,
                     seed: int = 0, pointwise: bool = False, ensemble: ArcEnsemble | None = None,
                     window=None, threads: int | None = None, mode: str = SHELL):
    """Topological entropy as the slope of the F = 0 log-partition.

    With ``pointwise=True`` returns one estimate per pair, from that pair's
    own counts.
    """
    T_grid = check_grid(T_grid)
    if ensemble is None:
        ensemble = ArcEnsemble.build(model, float(T_grid[-1]), pairs, seed, threads)
    curve = pressure_curve(ensemble, pot.Constant(0.0), T_grid, delta, mode, pointwise=pointwise)
    if not pointwise:
        return pressure_fit(curve, window)
    return [pressure_fit(curve.for_pair(i), window) for i in range(ensemble.pairs)]
