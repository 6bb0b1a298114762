"""
Command-line front end.

    corrdecay [--config PATH] [--out PATH] [--format csv|jsonl] [--seed N]
              [--threads N] COMMAND [options]

Commands: cphi, certify, density, pressure, zeros, oracle, mc, compare.
Exit codes: 0 success, 1 runtime error, 2 config error.  The whole config
is validated before any computation, and output files are written
atomically, so a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .activity import ActivityField, PiecewiseConstant, apply_boundary
from .contraction import certify_neighborhood
from .mc import McConfig, run_birth_death
from .observables import EngineParams, thermo_point
from .oracle import density_oracle, mean_density, partition_series, partition_zeros
from .potential import Potential, PotentialError, critical_activity, temperedness_constant
from .quadrature import QuadratureScheme, Region
from .recursion import density_sequence, integrated_density

FORMATS = ("csv", "jsonl")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: Potential | None = None
    region: Region | None = None
    activity: ActivityField | None = None
    lambdas: list = field(default_factory=list)
    engine: str = "oracle"
    depth: int = 8
    scheme: QuadratureScheme | None = None
    prune_tol: float = 1e-10
    node_budget: int = 5_000_000
    center: tuple | None = None
    K: int = 12
    samples_per_order: int = 8192
    h: float | None = None
    grid_resolution: int = 64
    mc: McConfig = field(default_factory=McConfig)
    fmt: str = "csv"
    out: str | None = None
    seed: int = 0
    threads: int = 1

    def region_center(self) -> tuple:
        return tuple(0.5 * (a + b) for a, b in zip(self.region.lo, self.region.hi))


# -- config parsing ---------------------------------------------------------

def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _num(sec, key, kind=float, default=None):
    if key not in sec:
        return default
    raw = sec[key].strip()
    try:
        if kind is complex:
            return complex(raw.replace(" ", "").replace("i", "j"))
        if kind is int:
            try:
                return int(raw)
            except ValueError:
                # accept 1e6-style integers
                x = float(raw)
                if not x.is_integer():
                    raise
                return int(x)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: cannot parse {raw!r}") from None


def _parse_potential(sec, base_dir: Path) -> Potential:
    kind = sec.get("kind", "hard-core").strip()
    d = _num(sec, "dimension", int, 1)
    if d not in (1, 2, 3):
        raise ConfigError("potential.dimension must be 1, 2 or 3")
    try:
        if kind == "hard-core":
            if sec.getboolean("normalized", fallback=False):
                return Potential.normalized_hard_sphere(d)
            return Potential.hard_core(d, _num(sec, "range", float, 1.0))
        if kind in ("gaussian", "exponential-decay"):
            return Potential(kind, d, _num(sec, "range", float, 1.0),
                             _num(sec, "amplitude", float, 1.0),
                             mayer_cutoff_tol=_num(sec, "mayer_cutoff_tol", float, 1e-12))
        if kind == "tabulated":
            if "table" not in sec:
                raise ConfigError("potential.table is required for tabulated potentials")
            path = base_dir / sec["table"].strip()
            if not path.is_file():
                raise ConfigError(f"table file not found: {path}")
            return Potential.from_table_file(path, d)
    except PotentialError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown potential kind {kind!r}")


def _parse_region(sec, d: int) -> Region:
    kind = sec.get("kind", "interval").strip()
    try:
        if kind in ("interval", "box"):
            lo, hi = _floats(sec.get("lo", ""), "region.lo"), _floats(sec.get("hi", ""), "region.hi")
            if len(lo) != d or len(hi) != d:
                raise ConfigError(f"region bounds must have {d} coordinates")
            return Region.box(lo, hi)
        if kind == "ball":
            c = _floats(sec.get("center", ""), "region.center")
            if len(c) != d:
                raise ConfigError(f"region.center must have {d} coordinates")
            return Region.ball(c, _num(sec, "radius", float, 1.0))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"region: {exc}") from None
    raise ConfigError(f"unknown region kind {kind!r}")


def _parse_activity(sec, region: Region, p: Potential) -> tuple[ActivityField, list]:
    d = region.dimension
    lam = _num(sec, "lambda", complex, 1.0)
    if "pieces" in sec:
        pieces = []
        for item in sec["pieces"].split(";"):
            if not item.strip():
                continue
            parts = item.split(":")
            if len(parts) != 3:
                raise ConfigError(f"activity.pieces: expected lo:hi:value, got {item.strip()!r}")
            lo, hi = _floats(parts[0], "piece lo"), _floats(parts[1], "piece hi")
            if len(lo) != d or len(hi) != d:
                raise ConfigError(f"activity.pieces must have {d} coordinates per bound")
            try:
                val = complex(parts[2].strip().replace("i", "j"))
            except ValueError:
                raise ConfigError(f"activity.pieces: bad value {parts[2]!r}") from None
            pieces.append((lo, hi, val))
        default = _num(sec, "default", complex, 0j)
        f = ActivityField(PiecewiseConstant(tuple(pieces), default), region, p)
    else:
        f = ActivityField.constant(lam, region, p)
    if "boundary" in sec:
        pts = [_floats(s, "activity.boundary") for s in sec["boundary"].split(";") if s.strip()]
        if any(len(y) != d for y in pts):
            raise ConfigError(f"activity.boundary points must have {d} coordinates")
        try:
            f = apply_boundary(f, pts)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    lambdas = list(_floats(sec["lambdas"], "activity.lambdas")) if "lambdas" in sec else []
    return f, lambdas


def load_config(path: str | None, args: argparse.Namespace | None = None) -> RunConfig:
    cfg = RunConfig()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";;"))
    base = Path(".")
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        base = Path(path).resolve().parent
    for sec in cp.sections():
        if sec not in ("potential", "region", "activity", "engine", "output"):
            raise ConfigError(f"unknown section [{sec}]")
    if cp.has_section("potential"):
        cfg.potential = _parse_potential(cp["potential"], base)
        d = cfg.potential.dimension
        if not cp.has_section("region"):
            raise ConfigError("missing [region] section")
        cfg.region = _parse_region(cp["region"], d)
        act = cp["activity"] if cp.has_section("activity") else cp["DEFAULT"]
        cfg.activity, cfg.lambdas = _parse_activity(act, cfg.region, cfg.potential)
    eng = cp["engine"] if cp.has_section("engine") else cp["DEFAULT"]
    cfg.engine = eng.get("engine", "oracle").strip()
    if cfg.engine not in ("oracle", "recursion"):
        raise ConfigError(f"engine.engine must be oracle or recursion, got {cfg.engine!r}")
    cfg.depth = _num(eng, "depth", int, 8)
    d = cfg.potential.dimension if cfg.potential else 1
    try:
        cfg.scheme = QuadratureScheme(
            order_per_dimension=_num(eng, "order", int, 32 if d == 1 else 16),
            rule=eng.get("rule", "gauss-legendre").strip(),
            radial_layers=_num(eng, "radial_layers", int, 2),
            taper=_num(eng, "taper", float, 0.5),
            min_order=_num(eng, "min_order", int, 2))
    except ValueError as exc:
        raise ConfigError(f"engine: {exc}") from None
    cfg.prune_tol = _num(eng, "prune_tol", float, 1e-10)
    cfg.node_budget = _num(eng, "node_budget", int, 5_000_000)
    if "center" in eng:
        cfg.center = _floats(eng["center"], "engine.center")
        if len(cfg.center) != d:
            raise ConfigError(f"engine.center must have {d} coordinates")
    cfg.K = _num(eng, "K", int, 12)
    cfg.samples_per_order = _num(eng, "samples_per_order", int, 8192)
    cfg.h = _num(eng, "h", float, None)
    cfg.grid_resolution = _num(eng, "grid_resolution", int, 64)
    cfg.seed = _num(eng, "seed", int, 0)
    if cfg.depth < 0 or cfg.K < 1 or cfg.samples_per_order < 1 or cfg.grid_resolution < 1:
        raise ConfigError("engine: depth must be >= 0 and K, samples_per_order, grid_resolution >= 1")
    if cfg.depth * cfg.scheme.order_per_dimension ** d >= cfg.node_budget:
        raise ConfigError("engine: depth * order^d must stay below node_budget")
    out = cp["output"] if cp.has_section("output") else cp["DEFAULT"]
    cfg.fmt = out.get("format", "csv").strip()
    cfg.out = out.get("path", None)
    if args is not None:
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "format", None) is not None:
            cfg.fmt = args.format
        if getattr(args, "out", None) is not None:
            cfg.out = args.out
        if getattr(args, "threads", None) is not None:
            cfg.threads = args.threads
    if cfg.fmt not in FORMATS:
        raise ConfigError(f"output format must be csv or jsonl, got {cfg.fmt!r}")
    if cfg.threads < 1:
        raise ConfigError("threads must be positive")
    try:
        cfg.mc = McConfig(steps=_num(eng, "mc_steps", int, 1_000_000),
                          burn_in=_num(eng, "mc_burn_in", int, 10_000),
                          chains=_num(eng, "mc_chains", int, 1), seed=cfg.seed,
                          thinning=_num(eng, "mc_thinning", int, 10))
    except ValueError as exc:
        raise ConfigError(f"engine: {exc}") from None
    if cfg.out:
        parent = Path(cfg.out).resolve().parent
        if not parent.is_dir():
            raise ConfigError(f"output directory does not exist: {parent}")
    return cfg


def _require_model(cfg: RunConfig) -> None:
    if cfg.potential is None:
        raise ConfigError("this command needs a [potential] section")


def _require_real_constant(cfg: RunConfig) -> float:
    f = cfg.activity
    if not f.is_constant or complex(f.base).imag != 0 or complex(f.base).real < 0:
        raise ConfigError("this command needs a real nonnegative constant activity")
    return complex(f.base).real


# -- output -----------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.9g}")
    return v


def render(rows: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_cell(r.get(c)) for c in columns) + "\n")
    else:
        for r in rows:
            buf.write(json.dumps({c: _json_value(r.get(c)) for c in columns}) + "\n")
    return buf.getvalue()


def write_output(text: str, path: str | None) -> None:
    """Write to ``path`` via a temp file and rename, or to stdout."""
    if not path:
        sys.stdout.write(text)
        return
    target = Path(path).resolve()
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands ---------------------------------------------------------------

def cmd_cphi(cfg: RunConfig, args) -> str:
    _require_model(cfg)
    c = temperedness_constant(cfg.potential)
    rows = [{"c_phi": c, "critical_activity": critical_activity(cfg.potential)}]
    return render(rows, ("c_phi", "critical_activity"), cfg.fmt)


def cmd_certify(cfg: RunConfig, args) -> str:
    if args.c_phi is not None:
        c_phi = args.c_phi
    elif cfg.potential is not None:
        c_phi = temperedness_constant(cfg.potential)
    else:
        c_phi = 1.0
    if not c_phi > 0:
        raise ConfigError("certify needs a positive C_phi")
    if args.lambda0 is not None:
        lam0 = args.lambda0
    elif cfg.activity is not None and cfg.activity.is_constant:
        lam0 = complex(cfg.activity.base).real
    else:
        raise ConfigError("certify needs --lambda0 or a constant activity")
    if lam0 < 0:
        raise ConfigError("lambda0 must be nonnegative")
    return certify_neighborhood(lam0, c_phi, cfg.grid_resolution).to_text()


def cmd_density(cfg: RunConfig, args) -> str:
    _require_model(cfg)
    d = cfg.potential.dimension
    v = _floats(args.v, "--v") if args.v else cfg.region_center()
    if len(v) != d:
        raise ConfigError(f"--v must have {d} coordinates")
    depth = cfg.depth if args.depth is None else args.depth
    if depth < 0:
        raise ConfigError("depth must be nonnegative")
    seq = density_sequence(cfg.activity, v, depth, cfg.scheme, prune_tol=cfg.prune_tol,
                           node_budget=cfg.node_budget)
    rows = [{"depth": e.depth, "v": " ".join(f"{c:.9g}" for c in v),
             "value_re": e.value.real, "value_im": e.value.imag,
             "last_step_delta": e.last_step_delta, "in_certified_region": e.in_certified_region,
             "nodes": e.nodes} for e in seq]
    return render(rows, ("depth", "v", "value_re", "value_im", "last_step_delta",
                         "in_certified_region", "nodes"), cfg.fmt)


def _params(cfg: RunConfig) -> EngineParams:
    return EngineParams(cfg.depth, cfg.scheme, cfg.center, cfg.K, cfg.samples_per_order,
                        cfg.seed, cfg.threads, cfg.h)


def cmd_pressure(cfg: RunConfig, args) -> str:
    _require_model(cfg)
    lam = _require_real_constant(cfg)
    lambdas = cfg.lambdas or [lam]
    if any(x < 0 for x in lambdas):
        raise ConfigError("activities must be nonnegative")
    pts = [thermo_point(cfg.activity, x, cfg.region, cfg.engine, _params(cfg)) for x in lambdas]
    return render([p.row() for p in pts],
                  ("lambda", "pressure", "density", "packing_density", "engine", "depth", "K"),
                  cfg.fmt)


def _poly(cfg: RunConfig):
    return partition_series(cfg.activity, cfg.region, cfg.K, cfg.samples_per_order, seed=cfg.seed)


def cmd_zeros(cfg: RunConfig, args) -> str:
    _require_model(cfg)
    roots = partition_zeros(_poly(cfg))
    rows = [{"index": i, "re": z.real, "im": z.imag, "modulus": abs(z)}
            for i, z in enumerate(roots)]
    return render(rows, ("index", "re", "im", "modulus"), cfg.fmt)


def cmd_oracle(cfg: RunConfig, args) -> str:
    _require_model(cfg)
    poly = _poly(cfg)
    rows = [{"name": f"c{k}", "re": complex(c).real, "im": complex(c).imag,
             "stderr": poly.stderr[k] if k < len(poly.stderr) else 0.0}
            for k, c in enumerate(poly.coefficients)]
    z = poly.value
    rows.append({"name": "Z", "re": z.real, "im": z.imag, "stderr": poly.sampling_error})
    rows.append({"name": "tail_estimate", "re": poly.tail_estimate, "im": 0.0, "stderr": 0.0})
    if args.v:
        v = _floats(args.v, "--v")
        rho = density_oracle(cfg.activity, cfg.region, v, cfg.K, cfg.samples_per_order, cfg.seed)
        rows.append({"name": "density", "re": rho.real, "im": rho.imag, "stderr": None})
    return render(rows, ("name", "re", "im", "stderr"), cfg.fmt)


def cmd_mc(cfg: RunConfig, args) -> str:
    _require_model(cfg)
    res = run_birth_death(cfg.activity, cfg.region, cfg.mc, workers=cfg.threads)
    rows = [c.record() for c in res.chains]
    rows.append({"chain": "all", "seed": cfg.seed, "steps": cfg.mc.steps * cfg.mc.chains,
                 "mean_count": res.mean_count, "stderr": res.mean_count_stderr,
                 "acceptance": sum(c.acceptance for c in res.chains) / len(res.chains)})
    return render(rows, ("chain", "seed", "steps", "mean_count", "stderr", "acceptance"), cfg.fmt)


def cmd_compare(cfg: RunConfig, args) -> str:
    """Mean density over the region from all three engines."""
    _require_model(cfg)
    _require_real_constant(cfg)
    vol = cfg.region.volume
    oracle = mean_density(cfg.activity, cfg.region, cfg.K, cfg.samples_per_order, cfg.seed)
    rec = integrated_density(cfg.activity, cfg.depth, cfg.scheme, prune_tol=cfg.prune_tol,
                             node_budget=cfg.node_budget).real
    mc = run_birth_death(cfg.activity, cfg.region, cfg.mc, workers=cfg.threads)
    rows = [
        {"engine": "oracle", "mean_density": oracle.density, "stderr": 0.0,
         "diff_vs_oracle": 0.0},
        {"engine": "recursion", "mean_density": rec, "stderr": None,
         "diff_vs_oracle": rec - oracle.density},
        {"engine": "mc", "mean_density": mc.mean_count / vol, "stderr": mc.mean_count_stderr / vol,
         "diff_vs_oracle": mc.mean_count / vol - oracle.density},
        {"engine": "lower_bound", "mean_density": oracle.lower_bound, "stderr": None,
         "diff_vs_oracle": oracle.lower_bound - oracle.density},
    ]
    return render(rows, ("engine", "mean_density", "stderr", "diff_vs_oracle"), cfg.fmt)


COMMANDS = {"cphi": cmd_cphi, "certify": cmd_certify, "density": cmd_density,
            "pressure": cmd_pressure, "zeros": cmd_zeros, "oracle": cmd_oracle,
            "mc": cmd_mc, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="corrdecay", parents=[common],
                                     description="Correlation-decay densities and pressures "
                                                 "for repulsive gasses.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cphi", parents=[common], help="temperedness constant and e / C_phi")
    p = sub.add_parser("certify", parents=[common], help="contraction certificate")
    p.add_argument("--lambda0", type=float)
    p.add_argument("--c-phi", dest="c_phi", type=float)
    p = sub.add_parser("density", parents=[common], help="recursion density by depth")
    p.add_argument("--v", help="point, comma-separated (default: region center)")
    p.add_argument("--depth", type=int)
    sub.add_parser("pressure", parents=[common], help="pressure and density sweep")
    sub.add_parser("zeros", parents=[common], help="zeros of the partition polynomial")
    p = sub.add_parser("oracle", parents=[common], help="truncated series coefficients")
    p.add_argument("--v", help="also report the oracle density at this point")
    sub.add_parser("mc", parents=[common], help="birth-death Monte Carlo")
    sub.add_parser("compare", parents=[common], help="recursion vs oracle vs Monte Carlo")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(getattr(args, "config", None), args)
        if args.command not in ("certify",):
            _require_model(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        text = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # engine failures surface as exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_output(text, cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
