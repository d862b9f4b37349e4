"""Rate functions, arc-ensemble measures and equidistribution diagnostics.

Measures on the unit tangent bundle are represented by their pairings with
a fixed test family ``g_1..g_n``. Each arc carries the moment vector of its
normalized Lebesgue measure, ``(int_gamma g_k) / l``; the arc ensemble then
gives

* weighted averages of these vectors (the measures ``m_{delta,T}``, or the
  unweighted ``mu_{delta,T}``),
* the weighted mass of arcs whose moment vector falls in a set, and
* through pressure differences ``Q(beta) = P(F + beta . g) - P(F)``, the
  contracted rate function ``J_g(alpha) = sup_beta (beta . alpha - Q(beta))``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import potentials as pot
from .ensemble import ArcEnsemble
from .errors import (
    EmptyEnsembleError, EnsembleMismatchError, FamilyMismatchError, NonConcaveError,
)
from .pressure import (
    CUMULATIVE, DEFAULT_DELTA, SHELL, PressureEstimate, ShellStack, _line_fit, as_potential,
    check_grid,
)
from .surfaces import SurfaceModel, domain_quadrature

DEFAULT_BOX = 4.0
BETA_TOL = 1e-4
MAX_CYCLES = 50
SCAN_POINTS = 41
# outward slope of beta . alpha - Q at the box edge above which J is taken as +inf
INFINITE_SLOPE = 0.05
ALPHA_STEP = 0.05
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MomentVector:
    """Pairings (alpha_1..alpha_n) with a test family."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_1d(np.asarray(self.values, dtype=float)))

    @property
    def n(self) -> int:
        return self.values.size

    def within_unit_cube(self, tol: float = 1e-12) -> bool:
        """Whether the vector can be the moments of a probability measure (|alpha_k| <= 1)."""
        return bool(np.all(np.abs(self.values) <= 1.0 + tol))


@dataclass
class EmpiricalMeasure:
    family: pot.TestFamily
    pairings: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def moments(self) -> MomentVector:
        return MomentVector(self.pairings)


def _family(family, ens: ArcEnsemble, n: int = 5) -> pot.TestFamily:
    if family is None:
        return pot.default_test_family(n, ens.model)
    if isinstance(family, pot.TestFamily):
        return family
    return pot.TestFamily(ens.model, tuple(as_potential(g) for g in family))


def _index(ens: ArcEnsemble, T: float, delta: float | None, mode: str, pair: int | None):
    if mode == SHELL:
        if delta is None or not delta > 0:
            raise ValueError("shell mode needs delta > 0")
        starts, stops = ens.ranges(T - delta, T)
    elif mode == CUMULATIVE:
        starts, stops = ens.ranges(-np.inf, T)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if pair is not None:
        starts, stops = starts[pair:pair + 1], stops[pair:pair + 1]
    idx = np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)] + [np.zeros(0, dtype=int)])
    if idx.size == 0:
        raise EmptyEnsembleError(f"no arcs at T={T}")
    return idx


def arc_moments(ens: ArcEnsemble, family: pot.TestFamily, index, shift: float = 0.0) -> np.ndarray:
    """Moment vectors of the arcs ``index``, shape (n_arcs, n)."""
    index = np.asarray(index, dtype=int)
    return np.stack([ens.averages(g, index, shift) for g in family.members], axis=1)


def arc_weights(ens: ArcEnsemble, F, index, weighted: bool = True) -> np.ndarray:
    """Normalized weights exp(int F) / sum exp(int F) of the arcs ``index``."""
    index = np.asarray(index, dtype=int)
    if not weighted:
        return np.full(index.size, 1.0 / index.size)
    w = ens.integrals(as_potential(F), index)
    w = np.exp(w - w.max())
    return w / w.sum()


def empirical_measure(ens: ArcEnsemble, F=0.0, T: float | None = None,
                      delta: float | None = DEFAULT_DELTA, family=None, n: int = 5,
                      mode: str = SHELL, weighted: bool = True, pair: int | None = None,
                      shift: float = 0.0) -> EmpiricalMeasure:
    """Weighted average of the arc measures over the selected arcs.

    ``mode="shell"`` with weights gives m_{delta,T}; ``mode="cumulative"``
    gives m_T; ``weighted=False`` gives the unweighted mu_{delta,T}, and
    ``pair`` restricts to a single pair. ``shift`` moves every arc window
    to [shift, shift + l] along the flow.
    """
    T = ens.T_max if T is None else float(T)
    fam = _family(family, ens, n)
    F = as_potential(F)
    idx = _index(ens, T, delta, mode, pair)
    w = arc_weights(ens, F, idx, weighted)
    mom = arc_moments(ens, fam, idx, shift)
    prov = {"ensemble": ens.key, "F": F.spec, "T": T, "delta": delta if mode == SHELL else None,
            "mode": mode, "weighted": weighted, "pair": pair, "shift": shift,
            "pairs": ens.pairs, "seed": ens.seed}
    return EmpiricalMeasure(fam, w @ mom, prov)


# ---------------------------------------------------------------------------
# moment predicates

def ball(center, r: float):
    """Open ball |alpha - center| < r."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    return lambda a: np.linalg.norm(a - c, axis=-1) < r


def outside_ball(center, r: float):
    """Closed complement |alpha - center| >= r."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    return lambda a: np.linalg.norm(a - c, axis=-1) >= r


def box(lo, hi):
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return lambda a: np.all((a >= lo) & (a <= hi), axis=-1)


def everything(a):
    return np.ones(a.shape[0], dtype=bool)


def nothing(a):
    return np.zeros(a.shape[0], dtype=bool)


def nu_mass(ens: ArcEnsemble, F, T: float, delta: float | None, family, predicate,
            weighted: bool = True, mode: str = SHELL, pair: int | None = None) -> float:
    """Weighted fraction of arcs whose moment vector satisfies ``predicate``."""
    fam = _family(family, ens)
    idx = _index(ens, T, delta, mode, pair)
    w = arc_weights(ens, F, idx, weighted)
    mask = np.asarray(predicate(arc_moments(ens, fam, idx)), dtype=bool)
    if mask.all():
        return 1.0
    if not mask.any():
        return 0.0
    return float(np.sum(w[mask]))


def measure_distance(m1: EmpiricalMeasure, m2: EmpiricalMeasure) -> float:
    """sum_k 2^-k |m1(g_k) - m2(g_k)| over the family members."""
    if m1.family.specs() != m2.family.specs() or m1.family.model != m2.family.model:
        raise FamilyMismatchError("measures are paired with different families")
    return pairing_distance(m1.pairings, m2.pairings)


def pairing_distance(p1, p2) -> float:
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    k = np.arange(1, p1.size + 1)
    return float(np.sum(2.0 ** -k * np.abs(p1 - p2)))


# ---------------------------------------------------------------------------
# pressure differences and the rate function

class QFunction:
    """beta -> P(F + beta . g) - P(F), all pressures on one arc ensemble.

    The integrals of F and of every g_k are computed once on the arcs of
    the T grid; each evaluation then only re-weights and solves for the
    growth root. Values are memoized by beta.
    """

    def __init__(self, ens: ArcEnsemble, F, family, T_grid, delta: float | None = DEFAULT_DELTA,
                 mode: str = SHELL):
        self.ens = ens
        self.F = as_potential(F)
        self.family = _family(family, ens)
        self.T = check_grid(T_grid)
        self.delta = delta if mode == SHELL else None
        self.mode = mode
        self.stack = ShellStack(ens, self.T, self.delta)
        flat = self.stack.flat
        self.wF = ens.integrals(self.F, flat)
        self.G = np.stack([ens.integrals(g, flat) for g in self.family.members])
        self.base, self.noise = self.stack.root(self.wF)
        self._memo = {}

    @property
    def n(self) -> int:
        return self.family.n

    def provenance(self) -> tuple:
        return (self.ens.key, self.mode, self.delta, tuple(np.round(self.T, 12)))

    def pressure(self, beta) -> float:
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        key = tuple(beta.tolist())
        if key not in self._memo:
            if not np.any(beta):
                self._memo[key] = self.base
            else:
                self._memo[key] = self.stack.root(self.wF + beta @ self.G)[0]
        return self._memo[key]

    def __call__(self, beta) -> float:
        return self.pressure(beta) - self.base


def q_value(beta, Q: QFunction) -> float:
    return Q(beta)


def pressure_difference(shifted: PressureEstimate, base: PressureEstimate) -> float:
    """P(F + omega) - P(F) from two estimates; they must share one arc ensemble and grid."""
    if shifted.provenance[:4] != base.provenance[:4]:
        raise EnsembleMismatchError("pressure estimates come from different arc ensembles")
    return shifted.value - base.value


@dataclass
class RatePoint:
    value: float
    beta: np.ndarray
    boundary: bool
    cycles: int


def _golden(f, a: float, b: float, tol: float):
    """Maximize a unimodal f on [a, b]."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _check_unimodal(values: np.ndarray, floor: float):
    # local maxima of the scan separated by a dip deeper than the noise floor
    inner = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])) + 1
    peaks = list(inner)
    if values[0] > values[1]:
        peaks.insert(0, 0)
    if values[-1] > values[-2]:
        peaks.append(values.size - 1)
    for i, j in zip(peaks, peaks[1:]):
        dip = min(values[i], values[j]) - values[i:j + 1].min()
        if dip > 5 * floor:
            raise NonConcaveError(
                f"two local maxima of beta . alpha - Q separated by a dip of {dip:.3g}")


def rate_legendre(alpha, Q: QFunction, B: float = DEFAULT_BOX, tol: float = BETA_TOL,
                  max_cycles: int = MAX_CYCLES, scan: int = SCAN_POINTS,
                  noise_floor: float | None = None) -> RatePoint:
    """sup over the box [-B, B]^n of beta . alpha - Q(beta), by coordinate cycling.

    Each coordinate is bracketed by a coarse scan and refined by golden
    section. A maximizer on the box boundary is flagged; if the objective
    still rises outward there (slope above INFINITE_SLOPE) the value is
    +inf, meaning alpha is outside the reachable moments.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.size != Q.n:
        raise ValueError(f"alpha has {alpha.size} entries, family has {Q.n}")
    floor = max(Q.noise, 1e-4) if noise_floor is None else noise_floor
    beta = np.zeros(Q.n)
    grid = np.linspace(-B, B, scan)
    h = grid[1] - grid[0]

    def objective(b):
        return float(b @ alpha - Q(b))

    best = objective(beta)
    cycles = 0
    for cycles in range(1, max_cycles + 1):
        old = beta.copy()
        for k in range(Q.n):
            def line(t, k=k):
                b = beta.copy()
                b[k] = t
                return objective(b)

            vals = np.array([line(t) for t in grid])
            _check_unimodal(vals, floor)
            j = int(np.argmax(vals))
            lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, scan - 1)]
            t, v = _golden(line, lo, hi, tol)
            if vals[j] > v:
                t, v = grid[j], vals[j]
            beta[k] = t
            best = v
        if np.max(np.abs(beta - old)) < tol:
            break

    boundary = bool(np.any(np.abs(np.abs(beta) - B) < 10 * tol))
    value = best
    if boundary:
        for k in np.flatnonzero(np.abs(np.abs(beta) - B) < 10 * tol):
            inner = beta.copy()
            inner[k] -= np.sign(beta[k]) * 2 * h
            if (best - objective(inner)) / (2 * h) > INFINITE_SLOPE:
                value = np.inf
    return RatePoint(float(max(value, 0.0)), beta, boundary, cycles)


@dataclass
class RateProfile:
    indices: tuple
    alpha: np.ndarray  # (m, n)
    J: np.ndarray  # (m,), +inf outside the reachable moments
    beta: np.ndarray  # (m, n)
    boundary: np.ndarray  # (m,) bool

    def min_over(self, mask) -> float:
        """inf of J over the grid points selected by ``mask``; +inf for an empty set."""
        mask = np.asarray(mask, dtype=bool)
        return float(self.J[mask].min()) if mask.any() else np.inf

    def to_csv(self, fh=None, header: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in header or []:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        n = self.alpha.shape[1]
        w.writerow([f"alpha_{i + 1}" for i in range(n)] + ["J"]
                   + [f"beta_{i + 1}" for i in range(n)] + ["boundary"])
        for a, j, b, f in zip(self.alpha, self.J, self.beta, self.boundary):
            w.writerow([repr(float(v)) for v in a] + [repr(float(j))]
                       + [repr(float(v)) for v in b] + [int(f)])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def alpha_grid(n: int, lo: float = -1.2, hi: float = 1.2, step: float = ALPHA_STEP) -> np.ndarray:
    """Tensor grid with the given step per coordinate, shape (m, n)."""
    ticks = np.round(np.arange(lo, hi + step / 2, step), 12)
    mesh = np.meshgrid(*([ticks] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def rate_profile(Q: QFunction, alphas=None, B: float = DEFAULT_BOX, polish: bool = True,
                 indices=None, **kwargs) -> RateProfile:
    """J_g on a grid of moment vectors.

    With ``polish`` every finite value is replaced by the largest
    ``beta . alpha - Q(beta)`` over all maximizers found on the grid (and
    beta = 0). That is still a lower bound for the supremum, and it makes
    the profile a maximum of affine functions: convex and nonnegative.
    """
    alphas = alpha_grid(Q.n) if alphas is None else np.atleast_2d(np.asarray(alphas, dtype=float))
    if alphas.shape[1] != Q.n and alphas.shape[0] == 1:
        alphas = alphas.T
    pts = [rate_legendre(a, Q, B, **kwargs) for a in alphas]
    J = np.array([p.value for p in pts])
    beta = np.array([p.beta for p in pts])
    flags = np.array([p.boundary for p in pts])
    if polish:
        finite = np.isfinite(J)
        cands = np.vstack([np.zeros((1, Q.n)), beta[finite]])
        qs = np.array([Q(b) for b in cands])
        lin = alphas[finite] @ cands.T - qs[None, :]
        J[finite] = np.maximum(lin.max(axis=1), 0.0)
        beta[finite] = cands[np.argmax(lin, axis=1)]
    idx = tuple(range(Q.n)) if indices is None else tuple(indices)
    return RateProfile(idx, alphas, J, beta, flags)


def legendre_roundtrip(profile: RateProfile, Q: QFunction, betas) -> np.ndarray:
    """Rows (beta..., Q(beta), sup_alpha beta . alpha - J(alpha)) over the finite grid."""
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    if betas.shape[1] != Q.n:
        betas = betas.reshape(-1, Q.n)
    finite = np.isfinite(profile.J)
    a, J = profile.alpha[finite], profile.J[finite]
    rows = []
    for b in betas:
        rows.append(list(b) + [Q(b), float(np.max(a @ b - J))])
    return np.array(rows)


# ---------------------------------------------------------------------------
# large-deviation curves and equidistribution

def rate_on_complement(Q: QFunction, center, r: float, step: float = ALPHA_STEP,
                       B: float = DEFAULT_BOX, equilibrium=None, **kwargs) -> float:
    """J_g of K = {|alpha - center| >= r} within the cube [-1, 1]^n, on a grid.

    J is convex with its minimum at the equilibrium moments, so when those
    lie outside K the infimum over K sits on the inner rim; only grid points
    with r <= |alpha - center| <= r + step sqrt(n) are evaluated. An empty
    K gives +inf.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    grid = alpha_grid(Q.n, -1.0, 1.0, step)
    dist = np.linalg.norm(grid - center, axis=1)
    in_K = dist >= r
    if not in_K.any():
        return np.inf
    if equilibrium is not None:
        eq = np.atleast_1d(np.asarray(equilibrium, dtype=float))
        if np.linalg.norm(eq - center) >= r:
            return max(rate_legendre(eq, Q, B, **kwargs).value, 0.0)
    rim = in_K & (dist <= r + step * np.sqrt(Q.n) + 1e-12)
    return float(min(rate_legendre(a, Q, B, **kwargs).value for a in grid[rim]))


@dataclass
class LDPCurve:
    T: np.ndarray
    mass: np.ndarray  # nu_T(K)
    rate: np.ndarray  # (1/T) log nu_T(K), -inf when the mass is 0
    bound: float  # -J_g(K)
    speed: float  # slope of log nu_T(K) against T, nan with fewer than 2 finite rows

    def rows(self):
        return list(zip(self.T, self.mass, self.rate, np.full(self.T.size, self.bound)))

    def to_csv(self, fh=None, header: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in header or []:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "nu_K", "rate", "bound"])
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def ldp_curve(ens: ArcEnsemble, F, family, center, r: float, T_grid,
              delta: float | None = DEFAULT_DELTA, Q: QFunction | None = None,
              weighted: bool = True, mode: str = SHELL, compute_bound: bool = True,
              **rate_kwargs) -> LDPCurve:
    """(1/T) log nu_T(K) for K = {|alpha - center| >= r}, with the bound -J_g(K).

    ``Q`` defaults to pressure differences over the same T grid (it needs
    at least four points).
    """
    T_grid = check_grid(T_grid)
    fam = _family(family, ens)
    pred = outside_ball(center, r)
    mass = np.array([nu_mass(ens, F, T, delta, fam, pred, weighted, mode) for T in T_grid])
    with np.errstate(divide="ignore"):
        logm = np.log(mass)
    rate = logm / T_grid
    ok = np.isfinite(logm)
    speed = _line_fit(T_grid[ok], logm[ok])[0] if ok.sum() >= 2 else np.nan
    bound = np.nan
    if compute_bound:
        if Q is None:
            Q = QFunction(ens, F, fam, T_grid, delta, mode)
        bound = -rate_on_complement(Q, center, r, **rate_kwargs)
    return LDPCurve(T_grid, mass, rate, bound, float(speed))


def liouville_pairing(model: SurfaceModel, g, n: int = 64, n_angle: int = 64) -> float:
    """Average of g over the unit tangent bundle: area quadrature times uniform angles.

    The angle rule is the trapezoid rule on the circle, exact for direction
    harmonics of order below ``n_angle``.
    """
    g = as_potential(g)
    z, w = domain_quadrature(model, n)
    th = 2 * np.pi * np.arange(n_angle) / n_angle
    vals = g.evaluate(model, z[:, None], np.broadcast_to(th[None, :], (z.size, n_angle)))
    return float(np.sum(w * vals.mean(axis=1)) / np.sum(w))


def liouville_measure(family: pot.TestFamily, n: int = 64) -> EmpiricalMeasure:
    vals = np.array([liouville_pairing(family.model, g, n) for g in family.members])
    return EmpiricalMeasure(family, vals, {"reference": "liouville", "nodes": n})


@dataclass
class EquidistributionReport:
    T: np.ndarray
    distance: np.ndarray
    deviations: np.ndarray  # (len(T), n): m_T(g_k) - reference(g_k)
    reference: np.ndarray
    speed: float  # slope of log d against T
    intercept: float

    @property
    def speed_sign(self) -> int:
        return int(np.sign(self.speed)) if np.isfinite(self.speed) else 0

    def to_csv(self, fh=None, header: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in header or []:
            buf.write(f"# {line}\n")
        buf.write(f"# log_d_slope={self.speed!r} intercept={self.intercept!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        n = self.deviations.shape[1]
        w.writerow(["T", "distance"] + [f"dev_{k + 1}" for k in range(n)])
        for t, d, dev in zip(self.T, self.distance, self.deviations):
            w.writerow([repr(float(t)), repr(float(d))] + [repr(float(v)) for v in dev])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def equidistribution_report(ens: ArcEnsemble, F=0.0, T_grid=None,
                            delta: float | None = DEFAULT_DELTA, family=None, n: int = 5,
                            reference="liouville", mode: str = SHELL,
                            weighted: bool = True) -> EquidistributionReport:
    """Distance of m_{delta,T} to a reference measure along a T grid.

    ``reference`` is ``"liouville"``, ``"self"`` (the measure at the largest
    T of the grid) or an explicit pairing vector.
    """
    T_grid = check_grid(T_grid if T_grid is not None else [ens.T_max])
    fam = _family(family, ens, n)
    ms = [empirical_measure(ens, F, T, delta, fam, mode=mode, weighted=weighted).pairings
          for T in T_grid]
    if isinstance(reference, str):
        if reference == "liouville":
            ref = liouville_measure(fam).pairings
        elif reference == "self":
            ref = ms[-1]
        else:
            raise ValueError(f"unknown reference {reference!r}")
    else:
        ref = np.asarray(reference, dtype=float)
        if ref.size != fam.n:
            raise FamilyMismatchError("reference pairings do not match the family size")
    dev = np.array(ms) - ref[None, :]
    dist = np.array([pairing_distance(m, ref) for m in ms])
    ok = dist > 0
    if ok.sum() >= 2:
        speed, icpt, _ = _line_fit(T_grid[ok], np.log(dist[ok]))
    else:
        speed, icpt = np.nan, np.nan
    return EquidistributionReport(T_grid, dist, dev, ref, float(speed), float(icpt))
