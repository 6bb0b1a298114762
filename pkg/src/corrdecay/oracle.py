"""
Brute-force ground truth for small instances.

The grand-canonical partition function

    Z(f) = sum_k (1/k!) int_{Lambda^k} f(x_1)...f(x_k) exp(-U(x_1..x_k)) dx

is truncated at order K.  Orders up to 3 are integrated deterministically
(nested Gauss-Legendre over ordered configurations in 1D, a fixed-node
matrix method in higher dimension); orders 4..K use scrambled Sobol
points with replicate-based standard errors.  Densities, k-point
densities and mean densities follow from their defining ratios.

For fields with a constant base activity ``lam`` the coefficients are
those of the polynomial in ``lam`` (the base is factored out), so the
same object serves zero finding and derivatives.  For piecewise-constant
bases the polynomial variable is a dimensionless scale ``t`` and the
value is taken at ``t = 1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .activity import ActivityField, discount_at
from .potential import Potential, temperedness_constant
from .quadrature import Region, as_point, region_rule, QuadratureScheme, rule_1d

DEFAULT_K = 12
DEFAULT_SAMPLES = 8192
REPLICATES = 8
ZERO_THRESHOLD = 1e-9


class OracleError(ArithmeticError):
    pass


@dataclass
class PartitionPolynomial:
    """Truncated series ``Z = sum_k coefficients[k] * activity**k``."""

    coefficients: list
    truncation: int
    tail_estimate: float
    region_volume: float
    activity: complex = 1.0
    stderr: list = field(default_factory=list)

    @property
    def degree(self) -> int:
        c = list(self.coefficients)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        return len(c) - 1

    def evaluate(self, lam: complex) -> complex:
        out = 0j
        for c in reversed(self.coefficients):
            out = out * lam + c
        return out

    def derivative(self, lam: complex) -> complex:
        out = 0j
        for k in range(len(self.coefficients) - 1, 0, -1):
            out = out * lam + k * self.coefficients[k]
        return out

    @property
    def value(self) -> complex:
        return self.evaluate(self.activity)

    @property
    def sampling_error(self) -> float:
        """One standard error of the value from the sampled orders."""
        a = abs(self.activity)
        return math.sqrt(sum((s * a ** k) ** 2 for k, s in enumerate(self.stderr)))

    def to_text(self, digits: int = 17) -> str:
        lines = [f"c{k} = {_fmt(c, digits)}" for k, c in enumerate(self.coefficients)]
        lines += [f"truncation = {self.truncation}",
                  f"tail_estimate = {self.tail_estimate:.{digits}g}",
                  f"region_volume = {self.region_volume:.{digits}g}",
                  f"activity = {_fmt(self.activity, digits)}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PartitionPolynomial":
        kv = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = (s.strip() for s in line.split("=", 1))
                kv[k] = v
        coeffs = []
        while f"c{len(coeffs)}" in kv:
            coeffs.append(_parse(kv[f"c{len(coeffs)}"]))
        return cls(coeffs, int(kv["truncation"]), float(kv["tail_estimate"]),
                   float(kv["region_volume"]), _parse(kv.get("activity", "1")))


def _fmt(z, digits: int) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.{digits}g}"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}j"


def _parse(s: str):
    z = complex(s)
    return z.real if z.imag == 0 else z


def series_tail(x: float, K: int) -> float:
    """sum_{k > K} x^k / k! for x >= 0."""
    if x == 0:
        return 0.0
    term = math.exp((K + 1) * math.log(x) - math.lgamma(K + 2))
    total, k = 0.0, K + 1
    while term > 1e-300 and (total == 0 or term > 1e-18 * total):
        total += term
        k += 1
        term *= x / k
    return total


def _scale_of(f: ActivityField) -> complex:
    if f.is_constant and f.base != 0:
        return complex(f.base)
    return 1.0


def _weights(f: ActivityField, scale: complex):
    """Field values with the constant base factored out."""
    unit = f.with_base(1.0) if scale != 1.0 else f
    return unit.values


def _boltz_pairs(p: Potential, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """exp(-phi(x - y)) for broadcast point arrays (last axis is the coordinate)."""
    s = np.sqrt(np.sum((X - Y) ** 2, axis=-1))
    return p.boltzmann_array(s)


# -- deterministic orders --------------------------------------------------

def _cuts_1d(p: Potential, base_bps: Sequence[float], prev: Sequence[float], k: int) -> list:
    pts = list(base_bps) + list(prev)
    if p.is_hard_core:
        # kinks of the inner integrals sit at shifts of the jumps by whole cores
        r = p.range
        return [b + m * r for b in pts for m in range(-k, k + 1)]
    return pts


def _composite(lo: float, hi: float, cuts, n: int, max_len: float) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted({lo, hi, *(c for c in cuts if lo < c < hi)})
    x0, w0 = rule_1d(n)
    x0, w0 = np.asarray(x0), np.asarray(w0)
    xs, ws = [], []
    for a, b in zip(pts, pts[1:]):
        if b - a <= 1e-14 * max(1.0, abs(b)):
            continue
        m = max(1, math.ceil((b - a) / max_len - 1e-9))
        edges = np.linspace(a, b, m + 1)
        for u, v in zip(edges, edges[1:]):
            xs.append(0.5 * (u + v) + 0.5 * (v - u) * x0)
            ws.append(0.5 * (v - u) * w0)
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def _nested_1d(f: ActivityField, scale: complex, region: Region, k: int) -> complex:
    """(1/k!) int over Lambda^k, as the integral over ordered configurations."""
    p = f.potential
    lo, hi = region.lo[0], region.hi[0]
    base_bps = [lo, hi, *f.breakpoints_1d()]
    if p.is_hard_core:
        n, max_len = 4, math.inf
    else:
        n, max_len = 12, max(0.5 * p.range, 1e-3) if not p.is_zero else math.inf
    w = _weights(f, scale)

    def level(j: int, prev: list) -> complex:
        start = prev[-1] if prev else lo
        x, wt = _composite(start, hi, _cuts_1d(p, base_bps, prev, k), n, max_len)
        if len(x) == 0:
            return 0j
        vals = w(x[:, None]) * wt
        for y in prev:
            vals = vals * p.boltzmann_array(np.abs(x - y))
        if j == k:
            return complex(np.sum(vals))
        total = 0j
        for xi, vi in zip(x, vals):
            if vi != 0:
                total += vi * level(j + 1, prev + [float(xi)])
        return total

    return level(1, [])


def _matrix_orders(f: ActivityField, scale: complex, region: Region, order: int | None):
    """c1, c2, c3 on a fixed node set: a^T 1, a^T E a / 2, sum a a a E E E / 6."""
    d = region.dimension
    n = order or (16 if d == 2 else 8)
    nodes = region_rule(region, QuadratureScheme(order_per_dimension=n), n)
    X = np.array([x for x, _ in nodes])
    a = np.array([w for _, w in nodes]) * _weights(f, scale)(X)
    E = _boltz_pairs(f.potential, X[:, None, :], X[None, :, :])
    c1 = complex(a.sum())
    Ea = E @ a
    c2 = complex(a @ Ea) / 2
    T = E @ (a[:, None] * E)
    c3 = complex(np.sum(a[:, None] * a[None, :] * E * T)) / 6
    return [c1, c2, c3]


# -- sampled orders ---------------------------------------------------------

def _sampled_order(f: ActivityField, scale: complex, region: Region, k: int,
                   samples: int, seed: int) -> tuple[complex, float]:
    d = region.dimension
    lo, hi = np.asarray(region.lo), np.asarray(region.hi)
    box_vol = float(np.prod(hi - lo))
    per_rep = 1 << max(4, math.ceil(math.log2(max(samples // REPLICATES, 16))))
    w = _weights(f, scale)
    p = f.potential
    iu = np.triu_indices(k, 1)
    means = []
    for rep in range(REPLICATES):
        rng = np.random.default_rng(np.random.SeedSequence([seed, k, rep]))
        U = qmc.Sobol(d=k * d, scramble=True, seed=rng).random(per_rep)
        X = (lo + U.reshape(per_rep, k, d) * (hi - lo))
        flat = X.reshape(-1, d)
        vals = w(flat) * region.contains_array(flat)
        prod = vals.reshape(per_rep, k).prod(axis=1)
        B = _boltz_pairs(p, X[:, :, None, :], X[:, None, :, :])[:, iu[0], iu[1]]
        prod = prod * B.prod(axis=1)
        means.append(prod.mean())
    means = np.array(means)
    factor = box_vol ** k / math.factorial(k)
    est = complex(means.mean()) * factor
    err = float(np.std(means, ddof=1) / math.sqrt(REPLICATES)) * factor
    return est, err


def partition_series(f: ActivityField, region: Region | None = None, K: int = DEFAULT_K,
                     samples_per_order: int = DEFAULT_SAMPLES, *, seed: int = 0,
                     matrix_order: int | None = None) -> PartitionPolynomial:
    """Truncated partition series of the field over ``region`` (default: its support).

    ``value`` of the result is Z at the field's own activity.  Sampled
    orders are deterministic for a fixed ``seed``.
    """
    if K < 1:
        raise ValueError("truncation order must be at least 1")
    region = region or f.support
    scale = _scale_of(f)
    vol = region.volume
    if f.sup_abs() == 0:
        return PartitionPolynomial([1.0] + [0.0] * K, K, 0.0, vol, 0.0, [0.0] * (K + 1))
    coeffs: list = [1.0]
    errs = [0.0]
    if region.dimension == 1:
        det = [_nested_1d(f, scale, region, k) for k in range(1, min(K, 3) + 1)]
    else:
        det = _matrix_orders(f, scale, region, matrix_order)[:min(K, 3)]
    coeffs += det
    errs += [0.0] * len(det)
    for k in range(4, K + 1):
        if _cannot_fit(f.potential, region, k):
            coeffs.append(0.0)
            errs.append(0.0)
            continue
        c, e = _sampled_order(f, scale, region, k, samples_per_order, seed)
        coeffs.append(c)
        errs.append(e)
    coeffs = [_realify(c) for c in coeffs]
    sup_w = f.sup_abs() / abs(scale)
    tail = series_tail(abs(scale) * sup_w * vol, K)
    return PartitionPolynomial(coeffs, K, tail, vol, _realify(scale), errs)


def _cannot_fit(p: Potential, region: Region, k: int) -> bool:
    """True if k hard rods cannot be placed in a 1D region (up to measure zero)."""
    if not p.is_hard_core or region.dimension != 1:
        return False
    return (k - 1) * p.range >= region.hi[0] - region.lo[0]


def _realify(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


# -- closed forms and ratios -----------------------------------------------

def hard_rod_partition(L: float, r: float, lam: complex, K: int | None = None) -> complex:
    """Z for hard rods of length r on an interval of length L (Tonks gas)."""
    if K is None:
        K = int(L // r) + 1 if r > 0 else 0
    total = 1 + 0j
    for k in range(1, K + 1):
        free = max(L - (k - 1) * r, 0.0)
        if free == 0:
            break
        total += lam ** k * free ** k / math.factorial(k)
    return total


def _checked_value(poly: PartitionPolynomial) -> complex:
    z = poly.value
    if abs(z) <= ZERO_THRESHOLD:
        raise OracleError("oracle at numerical zero of Z")
    return z


def density_oracle(f: ActivityField, region: Region | None = None, v=None,
                   K: int = DEFAULT_K, samples_per_order: int = DEFAULT_SAMPLES,
                   seed: int = 0) -> complex:
    """f(v) Z(f exp(-phi(v - .))) / Z(f)."""
    return kpoint_oracle(f, region, [v], K, samples_per_order, seed)


def kpoint_oracle(f: ActivityField, region: Region | None, points: Sequence,
                  K: int = DEFAULT_K, samples_per_order: int = DEFAULT_SAMPLES,
                  seed: int = 0) -> complex:
    """prod f(v_i) exp(-U(v)) Z(f discounted at every v_i) / Z(f)."""
    region = region or f.support
    pts = [as_point(v, f.dimension) for v in points]
    if not pts:
        raise ValueError("need at least one point")
    denom = _checked_value(partition_series(f, region, K, samples_per_order, seed=seed))
    pref = 1 + 0j
    for v in pts:
        pref *= f(v)
    p = f.potential
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            pref *= p.boltzmann_radial(math.dist(pts[i], pts[j]))
    if pref == 0:
        return 0j
    g = f
    for v in pts:
        g = discount_at(g, v)
    numer = partition_series(g, region, K, samples_per_order, seed=seed).value
    return pref * numer / denom


@dataclass(frozen=True)
class MeanDensity:
    density: float
    lower_bound: float
    margin: float


def mean_density(f: ActivityField, region: Region | None = None, K: int = DEFAULT_K,
                 samples_per_order: int = DEFAULT_SAMPLES, seed: int = 0) -> MeanDensity:
    """lam Z'(lam) / (|Lambda| Z(lam)) for a real constant activity, with the
    lower bound lam / (1 + lam C_phi)."""
    if not f.is_constant or complex(f.base).imag != 0 or complex(f.base).real < 0:
        raise ValueError("mean density needs a real nonnegative constant activity")
    lam = complex(f.base).real
    c_phi = temperedness_constant(f.potential)
    if lam == 0:
        return MeanDensity(0.0, 0.0, 0.0)
    region = region or f.support
    poly = partition_series(f, region, K, samples_per_order, seed=seed)
    z = _checked_value(poly)
    rho = (lam * poly.derivative(lam) / (region.volume * z)).real
    bound = lam / (1 + lam * c_phi)
    return MeanDensity(rho, bound, rho - bound)


def partition_zeros(poly: PartitionPolynomial | Sequence, polish_tol: float = 1e-12) -> list[complex]:
    """All complex roots of sum c_k x^k, Newton-polished, sorted by modulus."""
    coeffs = list(poly.coefficients if isinstance(poly, PartitionPolynomial) else poly)
    coeffs = [complex(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs[::-1])
    desc = np.array(coeffs[::-1])
    ddesc = np.polyder(desc)
    out = []
    for z in roots:
        z = complex(z)
        for _ in range(50):
            val = complex(np.polyval(desc, z))
            scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(coeffs))
            if abs(val) <= polish_tol * scale:
                break
            der = complex(np.polyval(ddesc, z))
            if der == 0:
                break
            z -= val / der
        if abs(z.imag) <= 1e-14 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append(z)
    return sorted(out, key=lambda z: (abs(z), z.real, z.imag))


def segment_distance_to_roots(roots: Sequence[complex], a: float, b: float) -> float:
    """Smallest distance from any root to the real segment [a, b]."""
    if not roots:
        return math.inf
    return min(abs(z - complex(min(max(z.real, a), b), 0.0)) for z in roots)


@dataclass(frozen=True)
class LogZReport:
    log_z: complex
    bound: float
    region_volume: float
    c: float
    passed: bool


def logZ_bound_check(f: ActivityField, region: Region | None, K: int, C: float,
                     samples_per_order: int = DEFAULT_SAMPLES, seed: int = 0) -> LogZReport:
    """Is |log Z| <= C |Lambda| (principal logarithm of the series value)?"""
    if not C > 0:
        raise ValueError("C must be positive")
    region = region or f.support
    z = _checked_value(partition_series(f, region, K, samples_per_order, seed=seed))
    lz = cmath.log(z)
    bound = C * region.volume
    return LogZReport(lz, bound, region.volume, C, abs(lz) <= bound)
