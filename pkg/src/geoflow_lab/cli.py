"""Command-line driver.

Subcommands::

    enumerate   arcs of one query (--x/--y) or of sampled pairs, as CSV
    pressure    log-partition curve (CSV) and pressure estimate (JSON)
    rate        rate-function profile J_g over an alpha grid (CSV)
    equidist    distance of the arc measures to a reference along T (CSV)

Settings come from flags, then from a ``--config`` file of ``key = value``
lines (keys are the long flag names, with ``-`` or ``_``), then defaults.
Every output starts with ``#`` lines echoing the resolved configuration
and the package version. Exit codes: 0 ok, 2 bad configuration, 3 resource
cap, 4 empty ensemble.

Potential grammar (``--potential``)::

    const:<c> | dirharm:<j>[:<phase>] | posharm:<k1>:<k2>[:<phase>]   (torus)
    bump | radial:<j>                                               (genus 2)
    lin:<c1>*<atom>[*<atom>...]+<c2>*<atom>...

T grids are ``start:stop:step`` (stop included) or comma separated values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from . import arcs as arcmod
from . import large_deviations as ld
from . import potentials as pot
from . import pressure as pr
from .ensemble import ArcEnsemble
from .errors import CapExceededError, EmptyEnsembleError, MemoryBudgetError
from .surfaces import SurfaceModel, contains

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_EMPTY = 0, 2, 3, 4

ASSUMPTION_NOTE = ("uniqueness of equilibrium states for F + beta.g is assumed, not checked; "
                   "growth rates are finite-T fits")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    surface: str = "torus"
    potential: str = "const:0"
    T_grid: str = ""
    T: float | None = None
    delta: float = pr.DEFAULT_DELTA
    pairs: int = 64
    seed: int = 42
    family_n: int = 5
    g: str = "1"
    alpha: str = "-1.2:1.2:0.05"
    beta_grid: str = ""
    box: float = ld.DEFAULT_BOX
    reference: str = "liouville"
    mode: str = pr.SHELL
    method: str = "root"
    pointwise: bool = False
    x: str | None = None
    y: str | None = None
    cap: float = arcmod.GENUS2_T_CAP
    threads: int | None = None
    out: str | None = None

    # -- parsed views ------------------------------------------------------

    def model(self) -> SurfaceModel:
        try:
            return SurfaceModel.parse(self.surface)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def grid(self) -> np.ndarray:
        if not self.T_grid:
            if self.T is None:
                raise ConfigError("no T grid given")
            return pr.check_grid([self.T])
        try:
            return pr.parse_grid(self.T_grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def potential_obj(self) -> pot.Potential:
        try:
            return pot.parse_potential(self.potential)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def g_indices(self) -> list[int]:
        try:
            idx = [int(v) - 1 for v in self.g.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad --g {self.g!r}") from None
        if not idx or min(idx) < 0 or max(idx) >= self.family_n:
            raise ConfigError(f"--g indices must lie in 1..{self.family_n}")
        return idx

    def validate(self):
        for name in ("delta", "pairs", "family_n", "box", "cap"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 1 <= self.family_n <= 32:
            raise ConfigError("family_n must lie in 1..32")
        if self.mode not in (pr.SHELL, pr.CUMULATIVE):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.method not in ("root", "slope"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.T is not None and not self.T > 0:
            raise ConfigError("T must be positive")
        if (self.x is None) != (self.y is None):
            raise ConfigError("--x and --y go together")
        model = self.model()
        self.potential_obj()
        if self.T_grid or self.T is not None:
            grid = self.grid()
            if not model.is_torus and grid[-1] > self.cap:
                raise CapExceededError(f"T={grid[-1]} exceeds the genus-2 cap {self.cap}")

    def header(self) -> list[str]:
        lines = [f"geoflow_lab {__version__}"]
        for k, v in asdict(self).items():
            if k == "out":
                continue
            lines.append(f"{k} = {v}")
        return lines


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, text: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = str(kinds[name])
    if kind == "bool":
        try:
            return _BOOL[text.strip().lower()]
        except KeyError:
            raise ConfigError(f"bad boolean for {name}: {text!r}") from None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None
    return text.strip()


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment."""
    names = {f.name for f in fields(RunConfig)} - {"command"}
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "T_grid" or key.lower() == "t_grid":
            key = "T_grid"
        if key not in names:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _parse_point(text: str, model: SurfaceModel) -> complex:
    text = text.strip()
    try:
        if "," in text:
            u, v = (float(s) for s in text.split(","))
            z = complex(u, v)
        else:
            z = complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"bad point {text!r}; use u,v or a complex number") from None
    if model.is_torus:
        s = model.torus_side
        z = complex(z.real % s, z.imag % s)
    if not contains(model, z):
        raise ConfigError(f"point {text!r} is not in the fundamental domain")
    return z


# ---------------------------------------------------------------------------
# subcommands

def _ensemble(cfg: RunConfig, T_max: float) -> ArcEnsemble:
    model = cfg.model()
    kw = {} if model.is_torus else {"cap": cfg.cap}
    if cfg.x is not None:
        pts = [(_parse_point(cfg.x, model), _parse_point(cfg.y, model))]
        return ArcEnsemble.from_points(model, T_max, pts, seed=None, threads=cfg.threads, **kw)
    return ArcEnsemble.build(model, T_max, cfg.pairs, cfg.seed, cfg.threads, **kw)


def cmd_enumerate(cfg: RunConfig) -> dict:
    T = cfg.T if cfg.T is not None else float(cfg.grid()[-1])
    ens = _ensemble(cfg, T)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pair_index", "x", "y", "length", "angle", "label"])
    for i, s in enumerate(ens.sets):
        labels = s.word_strings()
        for l, a, lab in zip(s.lengths, s.angles, labels):
            w.writerow([i, repr(s.x), repr(s.y), repr(float(l)), repr(float(a)), lab])
    return {"csv": buf.getvalue()}


def cmd_pressure(cfg: RunConfig) -> dict:
    grid = cfg.grid()
    F = cfg.potential_obj()
    ens = _ensemble(cfg, float(grid[-1]))
    mode = cfg.mode
    curve = pr.pressure_curve(ens, F, grid, cfg.delta, mode, pointwise=cfg.pointwise)
    est = pr.pressure_estimate(ens, F, grid, cfg.delta, mode, method=cfg.method)
    slope = pr.pressure_fit(curve)
    summary = est.as_dict()
    summary.update({
        "potential": F.spec, "surface": str(ens.model), "seed": cfg.seed, "pairs": ens.pairs,
        "delta": cfg.delta if mode == pr.SHELL else None, "mode": mode,
        "slope_fit": slope.value, "flagged_empty_shells": curve.flagged,
        "assumptions": ASSUMPTION_NOTE, "version": __version__,
    })
    if cfg.pointwise:
        summary["pair_slopes"] = [pr.pressure_fit(curve.for_pair(i)).value for i in range(ens.pairs)]
    return {"csv": curve.to_csv(), "json": summary}


def _ticks(text: str, name: str) -> np.ndarray:
    """``start:stop:step`` (stop included) or comma separated values; signs allowed."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if not step > 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return np.round(start + step * np.arange(n), 12)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ConfigError(f"bad {name} grid {text!r}") from None


def _tensor(ticks: np.ndarray, n: int) -> np.ndarray:
    mesh = np.meshgrid(*([ticks] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def cmd_rate(cfg: RunConfig) -> dict:
    grid = cfg.grid()
    F = cfg.potential_obj()
    ens = _ensemble(cfg, float(grid[-1]))
    idx = cfg.g_indices()
    fam = pot.default_test_family(cfg.family_n, ens.model).sub(idx)
    Q = ld.QFunction(ens, F, fam, grid, cfg.delta, cfg.mode)
    alphas = _tensor(_ticks(cfg.alpha, "alpha"), len(idx))
    prof = ld.rate_profile(Q, alphas, cfg.box, indices=[i + 1 for i in idx])
    out = {"csv": prof.to_csv()}
    summary = {"g": [i + 1 for i in idx], "members": fam.specs(), "potential": F.spec,
               "pressure_F": Q.base, "noise": Q.noise, "assumptions": ASSUMPTION_NOTE,
               "version": __version__}
    if cfg.beta_grid:
        betas = _tensor(_ticks(cfg.beta_grid, "beta_grid"), len(idx))
        rt = ld.legendre_roundtrip(prof, Q, betas)
        summary["roundtrip_max_error"] = float(np.max(np.abs(rt[:, -2] - rt[:, -1])))
    out["json"] = summary
    return out


def cmd_equidist(cfg: RunConfig) -> dict:
    grid = cfg.grid()
    F = cfg.potential_obj()
    ens = _ensemble(cfg, float(grid[-1]))
    fam = pot.default_test_family(cfg.family_n, ens.model)
    rep = ld.equidistribution_report(ens, F, grid, cfg.delta, fam, reference=cfg.reference,
                                     mode=cfg.mode)
    return {"csv": rep.to_csv()}


COMMANDS = {"enumerate": cmd_enumerate, "pressure": cmd_pressure,
            "rate": cmd_rate, "equidist": cmd_equidist}


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoflow-lab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--surface")
        s.add_argument("--potential")
        s.add_argument("--T-grid", dest="T_grid")
        s.add_argument("--T", type=float)
        s.add_argument("--delta", type=float)
        s.add_argument("--pairs", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--family-n", dest="family_n", type=int)
        s.add_argument("--mode", choices=[pr.SHELL, pr.CUMULATIVE])
        s.add_argument("--x")
        s.add_argument("--y")
        s.add_argument("--cap", type=float)
        s.add_argument("--threads", type=int)
        s.add_argument("--out")
        if name == "pressure":
            s.add_argument("--method", choices=["root", "slope"])
            s.add_argument("--pointwise", action="store_const", const=True)
        if name == "rate":
            s.add_argument("--g")
            s.add_argument("--alpha")
            s.add_argument("--beta-grid", dest="beta_grid")
            s.add_argument("--box", type=float)
        if name == "equidist":
            s.add_argument("--reference", choices=["liouville", "self"])
    return p


def resolve(argv) -> RunConfig:
    """Flags over config file over defaults."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:  # --help
            raise
        raise ConfigError("bad arguments") from exc
    values = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for k, v in vars(ns).items():
        if k in ("config", "command") or v is None:
            continue
        values[k] = v
    cfg = RunConfig(command=ns.command, **values)
    cfg.validate()
    return cfg


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_path(out: str | None) -> str | None:
    if out is None or out == "-":
        return None
    stem = out[:-4] if out.endswith(".csv") else out
    return stem + ".json"


def run(argv=None) -> int:
    try:
        cfg = resolve(argv)
        result = COMMANDS[cfg.command](cfg)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except MemoryBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except EmptyEnsembleError as exc:
        print(f"error: empty ensemble: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ValueError as exc:  # ConfigError and parse failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = "".join(f"# {line}\n" for line in cfg.header())
    _write(cfg.out, header + result["csv"])
    if "json" in result:
        text = json.dumps({"config": asdict(cfg), **result["json"]}, indent=2, default=float) + "\n"
        jp = _json_path(cfg.out)
        if jp is None:
            sys.stdout.write(text)
        else:
            _write(jp, text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
