"""
Complex activity fields with ball-shaped modifications.

A field is a base activity (a complex constant or a piecewise-constant
box field) on a bounded support, followed by an ordered stack of
modifications.  Each modification acts on the open ball of its radius
around its center, either multiplying the activity by ``exp(-phi(c - x))``
(``discount``) or setting it to zero (``annihilate``).  Fields are never
discretized; everything is evaluated pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .potential import Potential
from .quadrature import Point, Region, as_point

DISCOUNT = "discount"
ANNIHILATE = "annihilate"


@dataclass(frozen=True)
class Modification:
    center: Point
    radius: float
    mode: str = DISCOUNT

    def __post_init__(self):
        if self.mode not in (DISCOUNT, ANNIHILATE):
            raise ValueError(f"unknown modification mode {self.mode!r}")
        if not self.radius >= 0:
            raise ValueError("modification radius must be nonnegative")


@dataclass(frozen=True)
class PiecewiseConstant:
    """Activity constant on each axis-parallel box ``[lo, hi)``; ``default`` elsewhere.

    The first box containing a point wins.
    """

    pieces: tuple[tuple[Point, Point, complex], ...]
    default: complex = 0j

    def __call__(self, x: Point) -> complex:
        for lo, hi, val in self.pieces:
            if all(a <= c < b for a, c, b in zip(lo, x, hi)):
                return val
        return self.default

    def values(self, X: np.ndarray) -> np.ndarray:
        out = np.full(len(X), complex(self.default))
        done = np.zeros(len(X), dtype=bool)
        for lo, hi, val in self.pieces:
            inside = np.all((X >= np.asarray(lo)) & (X < np.asarray(hi)), axis=1) & ~done
            out[inside] = val
            done |= inside
        return out

    def sup_abs(self) -> float:
        return max([abs(self.default)] + [abs(v) for _, _, v in self.pieces])

    def scaled(self, t: complex) -> "PiecewiseConstant":
        return PiecewiseConstant(tuple((lo, hi, v * t) for lo, hi, v in self.pieces),
                                 self.default * t)

    def breakpoints_1d(self) -> list[float]:
        return [c for lo, hi, _ in self.pieces for c in (lo[0], hi[0])]


@dataclass(frozen=True)
class ActivityField:
    base: complex | PiecewiseConstant
    support: Region
    potential: Potential
    mods: tuple[Modification, ...] = field(default=())

    def __post_init__(self):
        if self.support.dimension != self.potential.dimension:
            raise ValueError("support and potential dimensions differ")

    @classmethod
    def constant(cls, lam: complex, support: Region, potential: Potential) -> "ActivityField":
        return cls(complex(lam), support, potential)

    @property
    def dimension(self) -> int:
        return self.support.dimension

    @property
    def is_constant(self) -> bool:
        return not isinstance(self.base, PiecewiseConstant)

    def base_value(self, x: Point) -> complex:
        return self.base(x) if isinstance(self.base, PiecewiseConstant) else self.base

    def sup_abs(self) -> float:
        if isinstance(self.base, PiecewiseConstant):
            return self.base.sup_abs()
        return abs(self.base)

    def __call__(self, x: Point) -> complex:
        if not self.support.contains(x):
            return 0j
        val = self.base_value(x)
        if val == 0:
            return 0j
        p = self.potential
        for m in self.mods:
            s = math.dist(m.center, x)
            if s < m.radius:
                if m.mode == ANNIHILATE:
                    return 0j
                b = p.boltzmann_radial(s)
                if b == 0.0:
                    return 0j
                val *= b
        return val

    def values(self, X: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at the rows of ``X`` (shape ``(n, d)``)."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dimension)
        if isinstance(self.base, PiecewiseConstant):
            out = self.base.values(X)
        else:
            out = np.full(len(X), complex(self.base))
        out = out * self.support.contains_array(X)
        for m in self.mods:
            s = np.linalg.norm(X - np.asarray(m.center), axis=1)
            hit = s < m.radius
            if m.mode == ANNIHILATE:
                out = np.where(hit, 0j, out)
            else:
                out = np.where(hit, out * self.potential.boltzmann_array(s), out)
        return out

    def with_mod(self, m: Modification) -> "ActivityField":
        # hot path in the recursion: skip dataclass re-validation
        out = object.__new__(ActivityField)
        object.__setattr__(out, "base", self.base)
        object.__setattr__(out, "support", self.support)
        object.__setattr__(out, "potential", self.potential)
        object.__setattr__(out, "mods", self.mods + (m,))
        return out

    def scaled(self, t: complex) -> "ActivityField":
        base = self.base.scaled(t) if isinstance(self.base, PiecewiseConstant) else self.base * t
        return replace(self, base=base)

    def with_base(self, lam: complex) -> "ActivityField":
        return replace(self, base=complex(lam))

    def breakpoints_1d(self) -> list[float]:
        """Coordinates in 1D where the field may jump or kink."""
        pts = list(self.support.breakpoints())
        if isinstance(self.base, PiecewiseConstant):
            pts.extend(self.base.breakpoints_1d())
        core = self.potential.range if self.potential.is_hard_core else None
        for m in self.mods:
            c = m.center[0]
            if math.isfinite(m.radius):
                pts.extend((c - m.radius, c + m.radius))
            if core is not None and m.mode == DISCOUNT:
                r = min(core, m.radius)
                pts.extend((c - r, c + r))
        return pts


def evaluate_activity(f: ActivityField, x) -> complex:
    """The field's value at x (0 outside its support)."""
    return f(as_point(x, f.dimension))


def discount_at(f: ActivityField, v) -> ActivityField:
    """Multiply by exp(-phi(v - .)) everywhere."""
    return f.with_mod(Modification(as_point(v, f.dimension), math.inf, DISCOUNT))


def restrict_toward(f: ActivityField, v, w) -> ActivityField:
    """Discount around v only on the open ball of radius dist(v, w)."""
    v, w = as_point(v, f.dimension), as_point(w, f.dimension)
    r = math.dist(v, w)
    if r == 0:
        raise ValueError("degenerate restriction")
    return f.with_mod(Modification(v, r, DISCOUNT))


def hat_at(f: ActivityField, x, center=None) -> ActivityField:
    """Zero the activity on the open ball around ``center`` (default origin)
    whose radius is the distance from ``center`` to x."""
    x = as_point(x, f.dimension)
    c = as_point(center, f.dimension) if center is not None else (0.0,) * f.dimension
    return f.with_mod(Modification(c, math.dist(c, x), ANNIHILATE))


def apply_boundary(f: ActivityField, Y: Iterable[Sequence[float] | float]) -> ActivityField:
    """Discount by fixed particles at the points of Y, all outside the support."""
    out = f
    for y in Y:
        y = as_point(y, f.dimension)
        if f.support.contains(y):
            raise ValueError("boundary point inside region")
        out = out.with_mod(Modification(y, math.inf, DISCOUNT))
    return out
