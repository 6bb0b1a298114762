"""
Repulsive, tempered pair potentials.

A potential is radial: ``phi(x)`` depends only on ``|x|``.  Four kinds are
supported:

    hard-core          phi = +inf for |x| < r, 0 otherwise
    gaussian           phi = a * exp(-|x|^2 / r^2)
    exponential-decay  phi = a * exp(-|x| / r)
    tabulated          piecewise-linear in |x| from a (radius, value) table

The Mayer function ``1 - exp(-phi)`` lies in [0, 1] and its integral over
R^d is the temperedness constant ``C_phi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import integrate, special

KINDS = ("hard-core", "gaussian", "exponential-decay", "tabulated")


class PotentialError(ValueError):
    pass


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def unit_volume_radius(d: int) -> float:
    """Radius of the ball of volume 1 in R^d."""
    return unit_ball_volume(d) ** (-1.0 / d)


@dataclass(frozen=True)
class Potential:
    kind: str
    dimension: int
    range: float
    amplitude: float = 1.0
    table: tuple[tuple[float, float], ...] | None = None
    mayer_cutoff_tol: float = 1e-12

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PotentialError(f"unknown potential kind {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise PotentialError("dimension must be a positive integer")
        if self.kind != "tabulated" and not self.range > 0:
            raise PotentialError("range must be positive")
        if self.amplitude < 0:
            raise PotentialError("amplitude must be nonnegative (repulsive potential)")
        if not self.mayer_cutoff_tol >= 0:
            raise PotentialError("mayer_cutoff_tol must be nonnegative")
        if self.kind == "tabulated":
            _check_table(self.table)

    # constructors ---------------------------------------------------------

    @classmethod
    def hard_core(cls, dimension: int, diameter: float) -> "Potential":
        return cls("hard-core", dimension, diameter)

    @classmethod
    def normalized_hard_sphere(cls, dimension: int) -> "Potential":
        """Hard spheres whose exclusion ball has unit volume, so C_phi = 1."""
        return cls("hard-core", dimension, unit_volume_radius(dimension))

    @classmethod
    def gaussian(cls, dimension: int, amplitude: float = 1.0, scale: float = 1.0,
                 mayer_cutoff_tol: float = 1e-12) -> "Potential":
        return cls("gaussian", dimension, scale, amplitude,
                   mayer_cutoff_tol=mayer_cutoff_tol)

    @classmethod
    def exponential(cls, dimension: int, amplitude: float = 1.0, scale: float = 1.0,
                    mayer_cutoff_tol: float = 1e-12) -> "Potential":
        return cls("exponential-decay", dimension, scale, amplitude,
                   mayer_cutoff_tol=mayer_cutoff_tol)

    @classmethod
    def ideal(cls, dimension: int) -> "Potential":
        """The non-interacting gas, phi == 0."""
        return cls("gaussian", dimension, 1.0, 0.0)

    @classmethod
    def tabulated(cls, dimension: int, table: Sequence[tuple[float, float]]) -> "Potential":
        table = tuple((float(r), float(v)) for r, v in table)
        return cls("tabulated", dimension, table[-1][0] if table else 0.0, 1.0, table)

    @classmethod
    def from_table_file(cls, path: str | Path, dimension: int) -> "Potential":
        return cls.tabulated(dimension, load_table(path))

    # radial evaluation ----------------------------------------------------

    @property
    def is_hard_core(self) -> bool:
        return self.kind == "hard-core"

    @property
    def is_zero(self) -> bool:
        if self.kind == "tabulated":
            return all(v == 0 for _, v in self.table)
        return self.kind != "hard-core" and self.amplitude == 0

    def phi_radial(self, s: float) -> float:
        """phi at distance ``s >= 0``; may return ``math.inf``."""
        if self.kind == "hard-core":
            return math.inf if s < self.range else 0.0
        if self.kind == "gaussian":
            return self.amplitude * math.exp(-(s / self.range) ** 2)
        if self.kind == "exponential-decay":
            return self.amplitude * math.exp(-s / self.range)
        return _interp_table(self.table, s)

    def mayer_radial(self, s: float) -> float:
        if self.kind == "hard-core":
            return 1.0 if s < self.range else 0.0
        u = self.phi_radial(s)
        if u == 0.0:
            return 0.0
        return -math.expm1(-u)

    def boltzmann_radial(self, s: float) -> float:
        """exp(-phi) at distance s, exactly 0 inside a hard core."""
        if self.kind == "hard-core":
            return 0.0 if s < self.range else 1.0
        return math.exp(-self.phi_radial(s))

    def boltzmann_array(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == "hard-core":
            return (s >= self.range).astype(float)
        if self.kind == "gaussian":
            return np.exp(-self.amplitude * np.exp(-(s / self.range) ** 2))
        if self.kind == "exponential-decay":
            return np.exp(-self.amplitude * np.exp(-s / self.range))
        return np.exp(-np.vectorize(lambda t: _interp_table(self.table, t))(s))

    def support_radius(self) -> float:
        """Radius beyond which the Mayer function is treated as zero."""
        if self.is_zero:
            return 0.0
        if self.kind == "hard-core":
            return self.range
        if self.kind == "tabulated":
            return _table_support(self.table)
        # phi small => mayer ~ phi; solve phi(R) = tol
        tol = self.mayer_cutoff_tol
        if tol <= 0:
            raise PotentialError("infinite-range potential needs a positive mayer_cutoff_tol")
        t = -math.log1p(-tol) if tol < 1 else math.inf
        if self.amplitude <= t:
            return 0.0
        ratio = math.log(self.amplitude / t)
        if self.kind == "gaussian":
            return self.range * math.sqrt(ratio)
        return self.range * ratio

    def tail_bound(self) -> float:
        """Upper bound on the Mayer integral outside ``support_radius``.

        Uses 1 - exp(-u) <= u, so the tail of phi itself majorizes the
        discarded Mayer mass.
        """
        if self.kind in ("hard-core", "tabulated") or self.is_zero:
            return 0.0
        d, a, r, R = self.dimension, self.amplitude, self.range, self.support_radius()
        p = 2.0 if self.kind == "gaussian" else 1.0
        # int_{|x|>R} a exp(-(|x|/r)^p) dx
        shape = d / p
        return (a * sphere_area(d) * r ** d / p * math.gamma(shape)
                * special.gammaincc(shape, (R / r) ** p))


def _check_table(table) -> None:
    if not table or len(table) < 2:
        raise PotentialError("tabulated potential needs at least two rows")
    radii = [r for r, _ in table]
    if radii[0] != 0.0:
        raise PotentialError("tabulated potential must start at radius 0")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise PotentialError("table radii must be strictly increasing")
    if any(not (math.isfinite(v) and v >= 0) for _, v in table):
        raise PotentialError("table values must be finite and nonnegative")


def _interp_table(table, s: float) -> float:
    last_r, last_v = table[-1]
    if s > last_r:
        # a table ending at zero closes off a finite-range potential
        if last_v == 0.0:
            return 0.0
        raise PotentialError(f"untabulated radius {s!r}")
    if s < 0:
        raise PotentialError(f"untabulated radius {s!r}")
    radii = [r for r, _ in table]
    i = min(max(np.searchsorted(radii, s, side="right") - 1, 0), len(table) - 2)
    (r0, v0), (r1, v1) = table[i], table[i + 1]
    return v0 + (v1 - v0) * (s - r0) / (r1 - r0)


def _table_support(table) -> float:
    support = 0.0
    for (r0, v0), (r1, v1) in zip(table, table[1:]):
        if v0 > 0 or v1 > 0:
            support = r1
    if table[-1][1] > 0:
        support = table[-1][0]
    return support


def load_table(path: str | Path) -> list[tuple[float, float]]:
    """Read a two-column (radius, phi) text file; '#' starts a comment."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise PotentialError(f"{path}:{lineno}: expected two columns")
            rows.append((float(parts[0]), float(parts[1])))
    _check_table(rows)
    return rows


def _norm(x) -> float:
    if isinstance(x, (int, float)):
        return abs(float(x))
    return math.hypot(*x) if len(x) > 1 else abs(float(x[0]))


def evaluate_potential(p: Potential, x) -> float:
    """phi(x) for a point x (scalar in 1D, or a coordinate sequence)."""
    return p.phi_radial(_norm(x))


def mayer(p: Potential, x) -> float:
    """1 - exp(-phi(x)); exactly 1 inside a hard core, exactly 0 where phi = 0."""
    return p.mayer_radial(_norm(x))


def temperedness_constant(p: Potential, method: str = "auto") -> float:
    """C_phi = integral of the Mayer function over R^d.

    ``method="auto"`` uses the closed form for hard cores and adaptive radial
    quadrature otherwise; ``method="quadrature"`` forces quadrature.
    """
    if p.is_zero:
        return 0.0
    d = p.dimension
    if p.kind == "hard-core" and method == "auto":
        return unit_ball_volume(d) * p.range ** d
    R = p.support_radius()
    if R == 0.0:
        return 0.0
    points = None
    if p.kind == "tabulated":
        points = [r for r, _ in p.table if 0 < r < R]
    elif p.kind == "hard-core":
        # integrate the indicator exactly up to its jump
        R = p.range

    def integrand(s):
        return s ** (d - 1) * p.mayer_radial(s)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(integrand, 0.0, R, epsabs=0.0, epsrel=1e-10,
                                        limit=500, points=points)
        except integrate.IntegrationWarning as exc:
            raise PotentialError("temperedness integral did not converge") from exc
    if not math.isfinite(value) or err > 1e-8 * abs(value):
        raise PotentialError("temperedness integral did not converge")
    return sphere_area(d) * value


def critical_activity(p: Potential) -> float:
    """e / C_phi, the activity bound below which the pressure is analytic."""
    c = temperedness_constant(p)
    return math.inf if c == 0 else math.e / c
