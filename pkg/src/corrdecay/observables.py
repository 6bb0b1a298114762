"""
Thermodynamic outputs at finite volume.

The pressure is ``log Z / |Lambda|`` (from the series oracle or from the
recursion's log-partition identity), the density is ``lam dp/dlam`` by a
centered finite difference, and for hard spheres the packing density is
the covered volume fraction.  Sweeps are reported parametrically as
(density, pressure) pairs on an activity grid; nothing is inverted.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .activity import ActivityField
from .oracle import DEFAULT_K, DEFAULT_SAMPLES, partition_series, _checked_value
from .potential import Potential, unit_ball_volume
from .quadrature import QuadratureScheme, Region
from .recursion import integrated_density, log_partition_via_identity

ENGINES = ("oracle", "recursion")
REFERENCE_PACKING_D2 = 0.18276
CSV_COLUMNS = ("lambda", "pressure", "density", "packing_density", "engine", "depth", "K")


@dataclass(frozen=True)
class EngineParams:
    """Knobs shared by both engines; each engine ignores the other's fields."""

    depth: int = 8
    scheme: QuadratureScheme | None = None
    center: tuple | None = None
    K: int = DEFAULT_K
    samples_per_order: int = DEFAULT_SAMPLES
    seed: int = 0
    workers: int = 1
    h: float | None = None


@dataclass(frozen=True)
class ThermoPoint:
    lam: float
    pressure: float
    density: float
    packing_density: float | None
    source: str
    depth: int | None = None
    K: int | None = None
    integrated_density: float | None = None

    def row(self) -> dict:
        return {"lambda": self.lam, "pressure": self.pressure, "density": self.density,
                "packing_density": self.packing_density, "engine": self.source,
                "depth": self.depth, "K": self.K}


@dataclass(frozen=True)
class PackingConstants:
    critical_packing: float
    reference_d2: float = REFERENCE_PACKING_D2


def packing_constants(d: int) -> PackingConstants:
    """Packing density below which the pressure is analytic in the density."""
    if d < 1:
        raise ValueError("dimension must be positive")
    return PackingConstants(math.e / (1 + math.e) * 2.0 ** (-d))


def packing_density(p: Potential, density: float) -> float | None:
    """Fraction of space covered by balls of radius r/2 around the particles.

    Equals ``2^-d * density`` for the unit-volume normalization; None for
    soft potentials.
    """
    if not p.is_hard_core:
        return None
    return density * unit_ball_volume(p.dimension) * (p.range / 2) ** p.dimension


def _real_constant(f: ActivityField) -> float:
    if not f.is_constant or complex(f.base).imag != 0:
        raise ValueError("pressure needs a real constant activity")
    return complex(f.base).real


def pressure_finite_volume(f: ActivityField, region: Region | None = None,
                           engine: str = "oracle", params: EngineParams | None = None) -> float:
    """log Z / |Lambda| at the field's (real, constant) activity."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    lam = _real_constant(f)
    region = region or f.support
    params = params or EngineParams()
    if lam == 0:
        return 0.0
    if engine == "oracle":
        z = _checked_value(partition_series(f, region, params.K, params.samples_per_order,
                                            seed=params.seed))
        return math.log(z.real) / region.volume
    lz = log_partition_via_identity(f, region, params.center, params.depth, params.scheme,
                                    workers=params.workers)
    return lz.real / region.volume


def density_from_pressure(f: ActivityField, region: Region | None = None,
                          lam: float | None = None, h: float | None = None,
                          engine: str = "oracle", params: EngineParams | None = None,
                          richardson: bool = False) -> float:
    """lam * dp/dlam by a centered difference (step ``h``, default 1e-3 lam)."""
    lam = _real_constant(f) if lam is None else float(lam)
    if lam == 0:
        return 0.0
    h = 1e-3 * lam if h is None else h
    if not lam - h > 0:
        raise ValueError("finite-difference step must be smaller than the activity")

    def slope(step):
        up = pressure_finite_volume(f.with_base(lam + step), region, engine, params)
        down = pressure_finite_volume(f.with_base(lam - step), region, engine, params)
        return (up - down) / (2 * step)

    d = slope(h)
    if richardson:
        d = (4 * slope(h / 2) - d) / 3
    return lam * d


def thermo_point(f: ActivityField, lam: float, region: Region | None = None,
                 engine: str = "oracle", params: EngineParams | None = None,
                 with_integrated: bool = False) -> ThermoPoint:
    """Pressure and density at one activity.  With ``with_integrated`` the
    recursion engine also reports the volume-averaged recursion density."""
    params = params or EngineParams()
    g = f.with_base(lam)
    p = pressure_finite_volume(g, region, engine, params)
    rho = (density_from_pressure(g, region, lam, params.h, engine, params) if lam > 0
           else 0.0)
    integ = None
    if with_integrated and engine == "recursion" and lam > 0:
        integ = integrated_density(g, params.depth, params.scheme).real
    return ThermoPoint(float(lam), p, rho, packing_density(f.potential, rho), engine,
                       params.depth if engine == "recursion" else None,
                       params.K if engine == "oracle" else None, integ)


def sweep(f: ActivityField, lambdas: Iterable[float], region: Region | None = None,
          engine: str = "oracle", params: EngineParams | None = None) -> list[ThermoPoint]:
    return [thermo_point(f, lam, region, engine, params) for lam in lambdas]


def write_csv(points: Sequence[ThermoPoint], out: TextIO | None = None) -> str:
    """CSV with the fixed column set; floats at 9 significant digits."""
    buf = out or io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for pt in points:
        row = pt.row()
        w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue() if out is None else ""


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)
