"""
Contraction machinery for the density functional.

In the coordinates ``z = psi(x) = log(1 + C_phi x)`` the functional
``F(lam, rho) = lam exp(-int rho * mayer)`` evaluated on a constant field
becomes the scalar map

    g_lam(z) = log(1 + C_phi lam e exp(-e^z)),

which is a contraction on [0, log(1 + e)] for real ``lam < e / C_phi``.
This module evaluates g and its derivatives, computes the explicit
contraction margin delta, and searches for complex neighborhoods on which
the contraction persists.  Neighborhood certificates are grid verified,
not proved.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

LOG1PE = math.log1p(math.e)


class BranchCutError(ValueError):
    def __init__(self, msg: str = "outside principal domain"):
        super().__init__(msg)


def _check_branch(w) -> None:
    w = np.asarray(w)
    if np.any(np.real(w) <= 0):
        raise BranchCutError()


def psi(x: complex, c_phi: float) -> complex:
    w = 1 + c_phi * complex(x)
    if w.imag == 0 and w.real <= 0:
        raise BranchCutError()
    return complex(np.log(w))


def psi_inv(z: complex, c_phi: float) -> complex:
    return complex(np.expm1(complex(z))) / c_phi


def _inner(lam, z, c_phi):
    return c_phi * lam * math.e * np.exp(-np.exp(z))


def g(lam: complex, z: complex, c_phi: float) -> complex:
    """log(1 + C_phi lam e exp(-e^z)), principal branch."""
    w = 1 + _inner(lam, z, c_phi)
    _check_branch(w)
    return np.log(w)


def g_prime(lam: complex, z: complex, c_phi: float) -> complex:
    """d g / d z."""
    t = _inner(lam, z, c_phi)
    _check_branch(1 + t)
    return -t * np.exp(z) / (1 + t)


def g_lambda_derivative(lam: complex, z: complex, c_phi: float) -> complex:
    """d g / d lam."""
    t = _inner(lam, z, c_phi)
    _check_branch(1 + t)
    return c_phi * math.e * np.exp(-np.exp(z)) / (1 + t)


def delta_bound(lambda0: float, c_phi: float, grid: int = 10_000) -> float:
    """Contraction margin: min of (1 - b e^-2) / (1 + b e) over b in [0, C_phi e lambda0].

    The objective decreases in b, so the endpoint value is exact; the grid
    minimum is kept as a cross-check.
    """
    if lambda0 >= math.e / c_phi:
        raise ValueError("supercritical activity")
    if lambda0 <= 0:
        return 1.0
    beta_max = c_phi * math.e * lambda0
    beta = np.append(np.linspace(0.0, beta_max, grid), beta_max)
    vals = (1 - beta * math.exp(-2)) / (1 + beta * math.e)
    return float(min(vals.min(), (1 - beta_max * math.exp(-2)) / (1 + beta_max * math.e)))


def segment_distance(z, length: float):
    """Distance from complex z to the real segment [0, length]."""
    z = np.asarray(z)
    return np.abs(z - np.clip(np.real(z), 0.0, length))


def neighborhood_samples(length: float, eps: float, n: int, closed: bool = True) -> np.ndarray:
    """Boundary and interior sample points of the eps-neighborhood of [0, length].

    Boundary points are pulled in by a factor 1 - 1e-9 when ``closed`` is
    False, so they lie in the open set.
    """
    n = max(int(n), 4)
    s = 1.0 if closed else 1.0 - 1e-9
    e = eps * s
    th = np.linspace(-np.pi / 2, np.pi / 2, n)
    right = length + e * np.exp(1j * th)
    left = -e * np.exp(1j * th)
    x = np.linspace(0.0, length, n)
    parts = [right, left, x + 1j * e, x - 1j * e, x.astype(complex)]
    if eps > 0:
        m = max(n // 4, 3)
        X, Y = np.meshgrid(np.linspace(-e, length + e, m), np.linspace(-e, e, m))
        inner = (X + 1j * Y).ravel()
        parts.append(inner[segment_distance(inner, length) <= e])
    return np.concatenate(parts)


@dataclass
class ContractionCertificate:
    lambda0: float
    c_phi: float
    eps1: float
    eps2: float
    eps3: float
    delta: float
    grid_resolution: int
    max_abs_gprime_on_grid: float
    max_abs_glam_on_grid: float
    max_image_excursion: float
    c_bound: float
    passed: bool

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                s = "true" if v else "false"
            elif isinstance(v, float):
                s = f"{v:.9g}"
            else:
                s = str(v)
            lines.append(f"{f.name} = {s}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ContractionCertificate":
        kv = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = (t.strip() for t in line.split("=", 1))
                kv[k] = v
        out = {}
        for f in fields(cls):
            raw = kv[f.name]
            if f.type in ("bool", bool):
                out[f.name] = raw == "true"
            elif f.type in ("int", int):
                out[f.name] = int(raw)
            else:
                out[f.name] = float(raw)
        return cls(**out)

    def as_dict(self) -> dict:
        return asdict(self)


def _max_abs(fn, lam, z, c_phi) -> float:
    """max |fn| over the product grid; inf if the branch condition fails."""
    L, Z = np.meshgrid(lam, z, indexing="ij")
    t = _inner(L, Z, c_phi)
    if np.any(np.real(1 + t) <= 0):
        return math.inf
    return float(np.max(np.abs(fn(L, Z, c_phi))))


def _bisect(pred, lo: float, hi: float, iters: int = 40) -> float:
    """Largest x in [lo, hi] with pred(x), assuming pred is monotone and pred(lo)."""
    if pred(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def u2_modulus_bound(c_phi: float, eps2: float, samples: int = 4096) -> float:
    """max |x| over the closed set psi^{-1}(N(log(1+e), eps2)), sampled on its boundary."""
    z = neighborhood_samples(LOG1PE, eps2, samples)
    return float(np.max(np.abs(np.expm1(z)))) / c_phi


def certify_neighborhood(lambda0: float, c_phi: float, grid_resolution: int = 64,
                         eps_max: float = 1.0) -> ContractionCertificate:
    """Search complex neighborhoods (eps1 around [0, lambda0], eps2 around
    [0, log(1+e)]) on which g is a uniform contraction into the eps3-shrunk set.

    eps2 is the largest value (bisection) such that |g'| <= 1 - delta/2 on
    the sampled product of the two closed neighborhoods, taking eps1 = eps2;
    eps1 is then the largest value with |dg/dlam| <= delta eps2 / (4 eps1).
    Both bounds and the image inclusion are re-verified on a final grid.
    """
    n = grid_resolution
    zs_real = np.linspace(0.0, LOG1PE, max(8 * n, 16))
    if lambda0 >= math.e / c_phi:
        lam_real = np.linspace(0.0, lambda0, max(8 * n, 16))
        gmax = _max_abs(g_prime, lam_real, zs_real, c_phi)
        beta = c_phi * math.e * lambda0
        delta = (1 - beta * math.exp(-2)) / (1 + beta * math.e)
        return ContractionCertificate(float(lambda0), float(c_phi), 0.0, 0.0, 0.0,
                                      float(delta), n, gmax, math.nan, math.nan,
                                      math.nan, False)
    delta = delta_bound(lambda0, c_phi)
    target = 1 - delta / 2
    coarse = max(n // 2, 8)

    def gprime_ok(eps2, eps1=None, res=coarse):
        eps1 = eps2 if eps1 is None else eps1
        lam = neighborhood_samples(lambda0, eps1, res)
        z = neighborhood_samples(LOG1PE, eps2, res)
        return _max_abs(g_prime, lam, z, c_phi) <= target

    eps2 = _bisect(gprime_ok, 0.0, eps_max)

    def glam_ok(eps1, res=coarse):
        if eps1 == 0:
            return True
        lam = neighborhood_samples(lambda0, eps1, res)
        z = np.linspace(-eps2, LOG1PE, 4 * res)
        return _max_abs(g_lambda_derivative, lam, z, c_phi) <= delta * eps2 / (4 * eps1)

    eps1 = _bisect(glam_ok, 0.0, eps2)
    # shave the search result so the finer final grid does not sit on the edge
    eps1 *= 0.999
    eps3 = eps2 * (1 - delta / 4)

    lam = neighborhood_samples(lambda0, eps1, n)
    z = neighborhood_samples(LOG1PE, eps2, n)
    gmax = _max_abs(g_prime, lam, z, c_phi)
    glam = _max_abs(g_lambda_derivative, lam, np.linspace(-eps2, LOG1PE, 4 * n), c_phi)
    L, Z = np.meshgrid(neighborhood_samples(lambda0, eps1, n, closed=False), z, indexing="ij")
    w = 1 + _inner(L, Z, c_phi)
    if np.any(np.real(w) <= 0):
        excursion = math.inf
    else:
        excursion = float(np.max(segment_distance(np.log(w), LOG1PE)))
    passed = bool(eps1 > 0 and eps2 > 0 and gmax <= target
                  and glam <= delta * eps2 / (4 * eps1) and excursion < eps3)
    return ContractionCertificate(float(lambda0), float(c_phi), float(eps1), float(eps2),
                                  float(eps3), float(delta), n, gmax, glam, excursion,
                                  u2_modulus_bound(c_phi, eps2), passed)


def u2_excursion(rho: complex, c_phi: float, eps2: float) -> float:
    """How far psi(rho) lies outside the closed eps2-neighborhood of [0, log(1+e)].

    Nonpositive means rho is in the closed set U_2; +inf on the branch cut.
    """
    w = 1 + c_phi * complex(rho)
    if w.real <= 0 and w.imag == 0:
        return math.inf
    z = complex(np.log(w))
    return float(segment_distance(z, LOG1PE)) - eps2


def convexity_probe(radius: float, eps: float, samples: int, seed: int = 0) -> bool:
    """Check that midpoints of pairs in exp(closed eps-neighborhood of [0, radius])
    have a preimage in the neighborhood."""
    if samples <= 0:
        return True
    rng = np.random.default_rng(seed)
    pool = neighborhood_samples(radius, eps, max(samples // 4, 8))
    # extra interior points drawn uniformly from the neighborhood
    x = rng.uniform(-eps, radius + eps, samples)
    y = rng.uniform(-eps, eps, samples)
    z = x + 1j * y
    pool = np.concatenate([pool, z[segment_distance(z, radius) <= eps]])
    i = rng.integers(0, len(pool), samples)
    j = rng.integers(0, len(pool), samples)
    mid = 0.5 * (np.exp(pool[i]) + np.exp(pool[j]))
    pre = np.log(mid)
    return bool(np.all(segment_distance(pre, radius) <= eps + 1e-9))


def effective_coordinate(z_values, weights) -> complex:
    """The scalar z with e^z equal to the weighted average of e^{z_values}."""
    z = np.asarray(z_values, dtype=complex)
    w = np.asarray(weights, dtype=float)
    if z.shape != w.shape or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("not a probability vector")
    return complex(np.log(np.sum(w * np.exp(z))))
