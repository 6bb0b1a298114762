"""
Bounded regions and deterministic quadrature.

Two kinds of integral appear everywhere in the recursion: volume integrals
over a region, and Mayer-weighted integrals over the interaction ball
around a point.  Both are plain weighted node sums accumulated in a fixed
node order, so results are bit-reproducible.

In one dimension the Mayer interval is split at caller-supplied breakpoints
(activity discontinuities) and at the ball center, and nodes are spread
over the pieces in proportion to their length.  In two and three
dimensions the ball is integrated in polar/spherical coordinates with
radial layers; for hard cores the outer layer ends exactly at the core
radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .potential import Potential

Point = tuple[float, ...]


def as_point(x, dimension: int | None = None) -> Point:
    if isinstance(x, (int, float, np.floating, np.integer)):
        p = (float(x),)
    else:
        p = tuple(float(c) for c in x)
    if dimension is not None and len(p) != dimension:
        raise ValueError(f"expected a point in R^{dimension}, got {x!r}")
    return p


@dataclass(frozen=True)
class Region:
    """An interval, axis-parallel box or closed ball.

    ``lo``/``hi`` are the bounding box; for balls ``center`` and ``radius``
    are also set.
    """

    kind: str
    lo: Point
    hi: Point
    center: Point | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("interval", "box", "ball"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("region bounds must have matching dimension")
        if any(not (b > a) for a, b in zip(self.lo, self.hi)):
            raise ValueError("region must have positive volume")
        if self.kind == "interval" and len(self.lo) != 1:
            raise ValueError("an interval is one-dimensional")

    @classmethod
    def interval(cls, a: float, b: float) -> "Region":
        return cls("interval", (float(a),), (float(b),))

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float]) -> "Region":
        lo, hi = as_point(lo), as_point(hi)
        if len(lo) == 1:
            return cls.interval(lo[0], hi[0])
        return cls("box", lo, hi)

    @classmethod
    def ball(cls, center: Sequence[float], radius: float) -> "Region":
        c = as_point(center)
        if not radius > 0:
            raise ValueError("region must have positive volume")
        return cls("ball", tuple(x - radius for x in c), tuple(x + radius for x in c),
                   c, float(radius))

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        if self.kind == "ball":
            d = self.dimension
            return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * self.radius ** d
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2 * self.radius
        return math.dist(self.lo, self.hi)

    def contains(self, x: Point) -> bool:
        if self.kind == "interval":
            return self.lo[0] <= x[0] <= self.hi[0]
        if self.kind == "ball":
            return math.dist(x, self.center) <= self.radius
        return all(a <= c <= b for a, c, b in zip(self.lo, x, self.hi))

    def contains_array(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.dimension)
        if self.kind == "ball":
            return np.linalg.norm(X - np.asarray(self.center), axis=1) <= self.radius
        return np.all((X >= np.asarray(self.lo)) & (X <= np.asarray(self.hi)), axis=1)

    def breakpoints(self) -> tuple[float, ...]:
        return (self.lo[0], self.hi[0]) if self.dimension == 1 else ()


@dataclass(frozen=True)
class QuadratureScheme:
    """Node budget for one integral.

    ``order_per_dimension`` nodes per coordinate at the root of a recursion
    tree; each deeper level multiplies it by ``taper`` but never drops
    below ``min_order``.  ``radial_layers`` splits the radial direction of
    a Mayer ball in d >= 2.
    """

    order_per_dimension: int = 32
    rule: str = "gauss-legendre"
    radial_layers: int = 2
    taper: float = 0.5
    min_order: int = 2

    def __post_init__(self):
        if self.rule not in ("gauss-legendre", "midpoint"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.order_per_dimension < 1 or self.min_order < 1 or self.radial_layers < 1:
            raise ValueError("quadrature orders must be positive")
        if not 0 < self.taper <= 1:
            raise ValueError("taper must lie in (0, 1]")

    @classmethod
    def default(cls, dimension: int) -> "QuadratureScheme":
        return cls(order_per_dimension=32 if dimension == 1 else 16)

    def child_order(self, order: int) -> int:
        return max(self.min_order, int(round(order * self.taper)))

    def describe(self) -> str:
        return (f"{self.rule}:order={self.order_per_dimension}:taper={self.taper}"
                f":min={self.min_order}:layers={self.radial_layers}")


@lru_cache(maxsize=None)
def rule_1d(n: int, rule: str = "gauss-legendre") -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Nodes and weights on [-1, 1]."""
    if rule == "gauss-legendre":
        x, w = np.polynomial.legendre.leggauss(n)
    else:
        x = -1.0 + (2.0 * np.arange(n) + 1.0) / n
        w = np.full(n, 2.0 / n)
    return tuple(x.tolist()), tuple(w.tolist())


def _segments(lo: float, hi: float, cuts: Iterable[float]) -> list[tuple[float, float]]:
    pts = sorted({lo, hi, *(c for c in cuts if lo < c < hi)})
    return [(a, b) for a, b in zip(pts, pts[1:]) if b - a > 1e-14 * max(1.0, abs(b))]


def composite_rule_1d(lo: float, hi: float, order: int, scheme: QuadratureScheme,
                      cuts: Iterable[float] = (),
                      keep: Callable[[float], bool] | None = None) -> list[tuple[float, float]]:
    """(node, weight) pairs on [lo, hi], split at ``cuts``.

    Each piece gets ``ceil(order * length / (hi - lo))`` nodes, at least
    ``scheme.min_order``.  Pieces whose midpoint fails ``keep`` are dropped.
    """
    total = hi - lo
    out = []
    for a, b in _segments(lo, hi, cuts):
        if keep is not None and not keep(0.5 * (a + b)):
            continue
        n = max(scheme.min_order, math.ceil(order * (b - a) / total - 1e-9))
        x, w = rule_1d(n, scheme.rule)
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        out.extend((mid + half * xi, half * wi) for xi, wi in zip(x, w))
    return out


def region_rule(region: Region, scheme: QuadratureScheme, order: int | None = None,
                breakpoints: Iterable[float] = ()) -> list[tuple[Point, float]]:
    """Nodes and positive weights for integrating over ``region``."""
    n = order or scheme.order_per_dimension
    if region.kind == "interval":
        return [((x,), w) for x, w in composite_rule_1d(region.lo[0], region.hi[0], n,
                                                         scheme, breakpoints)]
    if region.kind == "box":
        axes = []
        for a, b in zip(region.lo, region.hi):
            x, w = rule_1d(n, scheme.rule)
            axes.append([(0.5 * (a + b) + 0.5 * (b - a) * xi, 0.5 * (b - a) * wi)
                         for xi, wi in zip(x, w)])
        out = []
        for combo in _product(axes):
            out.append((tuple(c for c, _ in combo), math.prod(w for _, w in combo)))
        return out
    return [(tuple(c + o for c, o in zip(region.center, off)), w)
            for off, w in ball_rule(region.dimension, region.radius, n, scheme,
                                    layer_edges=None)]


def _product(axes):
    if not axes:
        yield ()
        return
    for head in axes[0]:
        for rest in _product(axes[1:]):
            yield (head,) + rest


def ball_rule(d: int, radius: float, order: int, scheme: QuadratureScheme,
              layer_edges: Sequence[float] | None = None) -> list[tuple[Point, float]]:
    """Offsets and weights for the centered ball of the given radius (d = 2, 3)."""
    if d == 1:
        return [((x,), w) for x, w in composite_rule_1d(-radius, radius, 2 * order, scheme, (0.0,))]
    if d > 3:
        raise ValueError("Mayer-ball cubature is implemented for d <= 3")
    edges = list(layer_edges) if layer_edges else [
        radius * (i + 1) / scheme.radial_layers for i in range(scheme.radial_layers)]
    radial = []
    prev = 0.0
    for e in edges:
        x, w = rule_1d(order, scheme.rule)
        half, mid = 0.5 * (e - prev), 0.5 * (e + prev)
        radial.extend((mid + half * xi, half * wi * (mid + half * xi) ** (d - 1))
                      for xi, wi in zip(x, w))
        prev = e
    out = []
    if d == 2:
        m = max(order, 4)
        for k in range(m):
            th = 2 * math.pi * (k + 0.5) / m
            c, s = math.cos(th), math.sin(th)
            for r, wr in radial:
                out.append(((r * c, r * s), wr * 2 * math.pi / m))
    else:
        ct, wt = rule_1d(order, scheme.rule)
        m = max(2 * order, 4)
        for cz, wz in zip(ct, wt):
            sz = math.sqrt(max(0.0, 1 - cz * cz))
            for k in range(m):
                ph = 2 * math.pi * (k + 0.5) / m
                for r, wr in radial:
                    out.append(((r * sz * math.cos(ph), r * sz * math.sin(ph), r * cz),
                                wr * wz * 2 * math.pi / m))
    return out


def integrate_region(f: Callable[[Point], complex], region: Region,
                     scheme: QuadratureScheme, breakpoints: Iterable[float] = ()) -> complex:
    """Weighted node sum approximating the integral of ``f`` over ``region``."""
    total = 0j
    for x, w in region_rule(region, scheme, breakpoints=breakpoints):
        total += w * f(x)
    return total


def mayer_ball_rule(p: Potential, v: Point, region: Region, scheme: QuadratureScheme,
                    order: int | None = None, breakpoints: Iterable[float] = (),
                    keep: Callable[[float], bool] | None = None
                    ) -> list[tuple[Point, float]]:
    """Nodes w with weights ``weight * mayer(v - w)`` on the Mayer support of
    ``p`` around ``v``, restricted to ``region``.

    In 1D, ``keep`` is tested at the midpoint of each piece between
    breakpoints and failing pieces are dropped (used to skip stretches of
    zero activity).
    """
    n = order or scheme.order_per_dimension
    R = p.support_radius()
    if R == 0.0:
        return []
    d = p.dimension
    if d == 1:
        c = v[0]
        lo, hi = max(region.lo[0], c - R), min(region.hi[0], c + R)
        if hi <= lo:
            return []
        # order nodes per unit of the full support width 2R
        n_here = n * (hi - lo) / (2 * R)
        cuts = [c, *breakpoints]
        if not p.is_hard_core:
            layers = scheme.radial_layers
            cuts += [c + sgn * R * i / layers for i in range(1, layers) for sgn in (-1, 1)]
        out = []
        for w, wt in composite_rule_1d(lo, hi, max(1, math.ceil(n_here - 1e-9)), scheme,
                                       cuts, keep):
            m = p.mayer_radial(abs(w - c))
            if m > 0:
                out.append(((w,), wt * m))
        return out
    edges = None
    if not p.is_hard_core:
        edges = [R * (i + 1) / scheme.radial_layers for i in range(scheme.radial_layers)]
    out = []
    for off, wt in ball_rule(d, R, n, scheme, edges):
        w = tuple(a + b for a, b in zip(v, off))
        if not region.contains(w):
            continue
        m = p.mayer_radial(math.hypot(*off))
        if m > 0:
            out.append((w, wt * m))
    return out


def integrate_mayer_ball(f: Callable[[Point], complex], p: Potential, v, region: Region,
                         scheme: QuadratureScheme, breakpoints: Iterable[float] = ()) -> complex:
    """Approximate the integral of ``f(w) * mayer(v - w)`` over ``region``."""
    v = as_point(v, p.dimension)
    total = 0j
    for w, wm in mayer_ball_rule(p, v, region, scheme, breakpoints=breakpoints):
        total += wm * f(w)
    return total
