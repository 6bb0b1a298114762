"""
Depth-truncated correlation-decay recursion for generalized densities.

The density at v under activity field f satisfies

    rho_f(v) = f(v) * exp(-int rho_{f_{v->w}}(w) * mayer(v - w) dw),

where ``f_{v->w}`` discounts f by exp(-phi(v - .)) on the open ball of
radius |v - w| around v.  Unrolling this identity ``depth`` times gives a
tree whose leaves are seeded with the activity itself; each tree edge adds
one modification to the field.  Integrating the density at x under the
field with the ball of radius |x - center| around ``center`` removed gives
log Z.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .activity import DISCOUNT, ActivityField, Modification, discount_at, hat_at
from .contraction import u2_excursion
from .potential import Potential, temperedness_constant
from .quadrature import (Point, QuadratureScheme, Region, as_point, integrate_mayer_ball,
                         mayer_ball_rule, region_rule)

DEFAULT_PRUNE_TOL = 1e-10
DEFAULT_NODE_BUDGET = 5_000_000


class RecursionBudgetExceeded(RuntimeError):
    def __init__(self, msg: str = "recursion budget exceeded"):
        super().__init__(msg)


@dataclass
class DensityEstimate:
    value: complex
    depth: int
    scheme: str
    last_step_delta: float
    in_certified_region: bool
    nodes: int = 0
    max_u2_excursion: float = -math.inf


class U2Monitor:
    """Tracks how far recursion intermediates stray outside psi^{-1}(closed
    eps2-neighborhood of [0, log(1+e)])."""

    def __init__(self, c_phi: float, eps2: float = 0.0, tol: float = 1e-12):
        self.c_phi = c_phi
        self.eps2 = eps2
        self.tol = tol
        self.count = 0
        self.worst = -math.inf

    def see(self, value: complex) -> None:
        self.count += 1
        ex = u2_excursion(value, self.c_phi, self.eps2)
        if ex > self.worst:
            self.worst = ex

    def merge(self, count: int, worst: float) -> None:
        self.count += count
        self.worst = max(self.worst, worst)

    @property
    def inside(self) -> bool:
        return self.worst <= self.tol


def apply_F(lam_value: complex, rho_field: Callable[[Point], complex], p: Potential, v,
            region: Region, scheme: QuadratureScheme, breakpoints=()) -> complex:
    """lam * exp(-int rho_field(w) mayer(v - w) dw) over the region."""
    s = integrate_mayer_ball(rho_field, p, v, region, scheme, breakpoints)
    return complex(lam_value) * cmath.exp(-s)


class _Tree:
    def __init__(self, potential: Potential, region: Region, scheme: QuadratureScheme,
                 prune_tol: float, node_budget: int, monitor: U2Monitor | None):
        self.p = potential
        self.region = region
        self.scheme = scheme
        self.prune_tol = prune_tol
        self.node_budget = node_budget
        self.monitor = monitor
        self.nodes = 0
        self.one_d = potential.dimension == 1

    def rho(self, f: ActivityField, v: Point, depth: int, order: int) -> complex:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise RecursionBudgetExceeded()
        a = f(v)
        if a == 0 or depth == 0:
            value = a
        else:
            child_order = self.scheme.child_order(order)
            s = 0j
            if self.one_d:
                # exact zeros of a 1D field only occur on whole pieces between breakpoints
                rule = mayer_ball_rule(self.p, v, self.region, self.scheme, order,
                                       f.breakpoints_1d(), lambda x: f((x,)) != 0)
            else:
                rule = [(w, wm) for w, wm in
                        mayer_ball_rule(self.p, v, self.region, self.scheme, order)
                        if f(w) != 0]
            for w, wm in rule:
                # f_{v->w}(w) = f(w): the sphere through w is not discounted
                if wm < self.prune_tol:
                    continue
                child = f.with_mod(Modification(v, math.dist(v, w), DISCOUNT))
                s += wm * self.rho(child, w, depth - 1, child_order)
            value = a * cmath.exp(-s)
        if self.monitor is not None:
            self.monitor.see(value)
        return value


def _run(f: ActivityField, v: Point, depth: int, scheme: QuadratureScheme,
         prune_tol: float, node_budget: int, monitor: U2Monitor | None) -> tuple[complex, int]:
    tree = _Tree(f.potential, f.support, scheme, prune_tol, node_budget, monitor)
    value = tree.rho(f, v, depth, scheme.order_per_dimension)
    return value, tree.nodes


def density(f: ActivityField, v, depth: int, q: QuadratureScheme | None = None, *,
            prune_tol: float = DEFAULT_PRUNE_TOL, node_budget: int = DEFAULT_NODE_BUDGET,
            eps2: float = 0.0, monitor: U2Monitor | None = None) -> DensityEstimate:
    """Depth-``depth`` estimate of the generalized density at v.

    Depth 0 returns f(v).  ``last_step_delta`` compares against the
    depth - 1 estimate.  ``in_certified_region`` reports whether every
    intermediate value of the depth-``depth`` tree lies in the closed set
    psi^{-1}(N(log(1+e), eps2)); with the default eps2 = 0 that is the real
    interval [0, e / C_phi].
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    q = q or QuadratureScheme.default(f.dimension)
    v = as_point(v, f.dimension)
    mon = U2Monitor(temperedness_constant(f.potential), eps2)
    value, nodes = _run(f, v, depth, q, prune_tol, node_budget, mon)
    if monitor is not None:
        monitor.merge(mon.count, mon.worst)
    delta = 0.0
    if depth > 0:
        prev, _ = _run(f, v, depth - 1, q, prune_tol, node_budget, None)
        delta = abs(value - prev)
    return DensityEstimate(value, depth, q.describe(), delta, mon.inside, nodes, mon.worst)


def density_sequence(f: ActivityField, v, max_depth: int, q: QuadratureScheme | None = None,
                     **kw) -> list[DensityEstimate]:
    """Estimates for every depth 0..max_depth, each with its step delta."""
    q = q or QuadratureScheme.default(f.dimension)
    v = as_point(v, f.dimension)
    c_phi = temperedness_constant(f.potential)
    prune_tol = kw.get("prune_tol", DEFAULT_PRUNE_TOL)
    budget = kw.get("node_budget", DEFAULT_NODE_BUDGET)
    eps2 = kw.get("eps2", 0.0)
    out: list[DensityEstimate] = []
    prev = None
    for k in range(max_depth + 1):
        mon = U2Monitor(c_phi, eps2)
        value, nodes = _run(f, v, k, q, prune_tol, budget, mon)
        delta = 0.0 if prev is None else abs(value - prev)
        out.append(DensityEstimate(value, k, q.describe(), delta, mon.inside, nodes, mon.worst))
        prev = value
    return out


def _identity_term(args) -> tuple[complex, int, int, float]:
    f, x, center, depth, scheme, prune_tol, budget, eps2, c_phi = args
    mon = U2Monitor(c_phi, eps2)
    value, nodes = _run(hat_at(f, x, center), x, depth, scheme, prune_tol, budget, mon)
    return value, nodes, mon.count, mon.worst


def _outer_nodes(f: ActivityField, region: Region, q: QuadratureScheme,
                 extra: Sequence[float] = ()) -> list[tuple[Point, float]]:
    bps = (list(f.breakpoints_1d()) + list(extra)) if f.dimension == 1 else ()
    return region_rule(region, q, breakpoints=bps)


def log_partition_via_identity(f: ActivityField, region: Region | None = None, center=None,
                               depth: int = 8, q: QuadratureScheme | None = None, *,
                               prune_tol: float = DEFAULT_PRUNE_TOL,
                               node_budget: int = DEFAULT_NODE_BUDGET, workers: int = 1,
                               eps2: float = 0.0, monitor: U2Monitor | None = None) -> complex:
    """log Z as the region integral of rho at x under the field with the
    ball {y : |y - center| < |x - center|} removed."""
    region = region or f.support
    q = q or QuadratureScheme.default(f.dimension)
    c = as_point(center, f.dimension) if center is not None else (0.0,) * f.dimension
    c_phi = temperedness_constant(f.potential)
    nodes = _outer_nodes(f, region, q, (c[0],) if f.dimension == 1 else ())
    args = [(f, x, c, depth, q, prune_tol, node_budget, eps2, c_phi) for x, _ in nodes]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_identity_term, args, chunksize=max(1, len(args) // (4 * workers))))
    else:
        results = [_identity_term(a) for a in args]
    total = 0j
    for (_, w), (value, _, count, worst) in zip(nodes, results):
        total += w * value
        if monitor is not None:
            monitor.merge(count, worst)
    return total


def integrated_density(f: ActivityField, depth: int, q: QuadratureScheme | None = None, *,
                       prune_tol: float = DEFAULT_PRUNE_TOL,
                       node_budget: int = DEFAULT_NODE_BUDGET) -> complex:
    """(1/|support|) times the integral of the recursion density over the support."""
    q = q or QuadratureScheme.default(f.dimension)
    total = 0j
    for x, w in _outer_nodes(f, f.support, q):
        value, _ = _run(f, x, depth, q, prune_tol, node_budget, None)
        total += w * value
    return total / f.support.volume


def kpoint_density_telescoping(f: ActivityField, points: Sequence, depth: int,
                               q: QuadratureScheme | None = None, **kw) -> complex:
    """k-point density as a product of one-point densities under successively
    discounted fields."""
    if not points:
        raise ValueError("need at least one point")
    q = q or QuadratureScheme.default(f.dimension)
    prune_tol = kw.get("prune_tol", DEFAULT_PRUNE_TOL)
    budget = kw.get("node_budget", DEFAULT_NODE_BUDGET)
    total = 1 + 0j
    g = f
    for v in points:
        v = as_point(v, f.dimension)
        if g(v) == 0:
            return 0j
        value, _ = _run(g, v, depth, q, prune_tol, budget, None)
        total *= value
        g = discount_at(g, v)
    return total
