"""
Grand-canonical birth-death Metropolis sampler for real repulsive gasses.

Each step proposes, with probability 1/2 each, the birth of a particle at
a uniform point of the region or the death of a uniformly chosen existing
particle.  With ``B(x; xi) = exp(-sum_y phi(x - y))`` the acceptance
probabilities are

    birth:  min(1, lam(x) |Lambda| B(x; xi) / (n + 1))
    death:  min(1, n / (lam(x) |Lambda| B(x; xi - x)))

which targets the density ``lam^n exp(-U)`` against the Poisson reference
measure.  Random numbers come from numpy's Philox counter-based generator;
chain ``i`` of a run with seed ``s`` uses the stream seeded by
``SeedSequence([s, i])``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .activity import ActivityField
from .potential import Potential
from .quadrature import Region

BLOCK = 1 << 14
BATCHES = 50


@dataclass(frozen=True)
class McConfig:
    steps: int = 1_000_000
    burn_in: int = 10_000
    chains: int = 1
    seed: int = 0
    thinning: int = 10

    def __post_init__(self):
        if self.steps < 1 or self.chains < 1 or self.thinning < 1:
            raise ValueError("steps, chains and thinning must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise ValueError("burn_in must lie in [0, steps)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class ChainResult:
    chain: int
    seed: int
    steps: int
    mean_count: float
    stderr: float
    acceptance: float
    count_samples: np.ndarray = field(repr=False)
    histogram: np.ndarray = field(repr=False)

    def record(self) -> dict:
        return {"chain": self.chain, "seed": self.seed, "steps": self.steps,
                "mean_count": self.mean_count, "stderr": self.stderr,
                "acceptance": self.acceptance}


@dataclass
class McResult:
    mean_count: float
    mean_count_stderr: float
    density_histogram: np.ndarray
    bin_edges: np.ndarray
    chains: list[ChainResult]

    @property
    def count_samples(self) -> np.ndarray:
        return np.concatenate([c.count_samples for c in self.chains])

    def jsonl(self) -> str:
        return "".join(json.dumps(c.record(), sort_keys=True) + "\n" for c in self.chains)


def birth_acceptance(lam_x: float, volume: float, boltz: float, n: int) -> float:
    """Acceptance of adding a point to an n-point configuration."""
    return min(1.0, lam_x * volume * boltz / (n + 1))


def death_acceptance(lam_x: float, volume: float, boltz: float, n: int) -> float:
    """Acceptance of removing a point from an n-point configuration; ``boltz``
    is the point's Boltzmann factor against the other n - 1 points."""
    denom = lam_x * volume * boltz
    if denom <= 0:
        return 1.0
    return min(1.0, n / denom)


def _boltz(p: Potential, x, others) -> float:
    b = 1.0
    for y in others:
        b *= p.boltzmann_radial(math.dist(x, y))
        if b == 0.0:
            return 0.0
    return b


def _uniform_points(rng: np.random.Generator, region: Region, n: int) -> np.ndarray:
    lo, hi = np.asarray(region.lo), np.asarray(region.hi)
    if region.kind != "ball":
        return lo + rng.random((n, region.dimension)) * (hi - lo)
    out = np.empty((0, region.dimension))
    while len(out) < n:
        X = lo + rng.random((2 * n, region.dimension)) * (hi - lo)
        out = np.concatenate([out, X[region.contains_array(X)]])
    return out[:n]


def _batch_stderr(x: np.ndarray, batches: int = BATCHES) -> float:
    m = len(x) // batches
    if m < 2:
        return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    means = x[: m * batches].reshape(batches, m).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def _run_chain(args) -> ChainResult:
    f, region, cfg, chain, edges = args
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, chain])))
    p = f.potential
    vol = region.volume
    pts: list[tuple] = []
    lams: list[float] = []
    counts = np.empty(cfg.steps - cfg.burn_in, dtype=np.int64)
    samples = []
    hist = np.zeros(len(edges) - 1)
    accepted = 0
    step = 0
    while step < cfg.steps:
        m = min(BLOCK, cfg.steps - step)
        moves = rng.random(m)
        accs = rng.random(m)
        picks = rng.random(m)
        X = _uniform_points(rng, region, m)
        lam_X = f.values(X).real
        for i in range(m):
            n = len(pts)
            if moves[i] < 0.5:
                lx = lam_X[i]
                if lx > 0:
                    x = tuple(X[i])
                    b = _boltz(p, x, pts)
                    if b > 0 and accs[i] < birth_acceptance(lx, vol, b, n):
                        pts.append(x)
                        lams.append(lx)
                        accepted += 1
            elif n:
                j = min(int(picks[i] * n), n - 1)
                x = pts[j]
                b = _boltz(p, x, pts[:j] + pts[j + 1:])
                if accs[i] < death_acceptance(lams[j], vol, b, n):
                    pts.pop(j)
                    lams.pop(j)
                    accepted += 1
            s = step + i
            if s >= cfg.burn_in:
                counts[s - cfg.burn_in] = len(pts)
                if (s - cfg.burn_in) % cfg.thinning == 0:
                    samples.append(len(pts))
                    if pts:
                        hist += np.histogram([q[0] for q in pts], edges)[0]
        step += m
    widths = np.diff(edges)
    cross = vol / (region.hi[0] - region.lo[0])
    hist = hist / max(len(samples), 1) / (widths * cross)
    return ChainResult(chain, cfg.seed, cfg.steps, float(counts.mean()), _batch_stderr(counts),
                       accepted / cfg.steps, np.asarray(samples, dtype=np.int64), hist)


def _check_real(f: ActivityField) -> None:
    if f.is_constant:
        ok = complex(f.base).imag == 0 and complex(f.base).real >= 0
    else:
        vals = [complex(v) for _, _, v in f.base.pieces] + [complex(f.base.default)]
        ok = all(v.imag == 0 and v.real >= 0 for v in vals)
    if not ok:
        raise ValueError("sampler needs a real nonnegative activity")


def run_birth_death(f: ActivityField, region: Region | None = None, cfg: McConfig | None = None,
                    bins: int = 20, workers: int = 1) -> McResult:
    """Run ``cfg.chains`` independent chains and merge their statistics.

    ``density_histogram`` is the mean number of particles per unit volume
    in slabs along the first coordinate.
    """
    region = region or f.support
    cfg = cfg or McConfig()
    if not region.volume > 0:
        raise ValueError("region has zero volume")
    _check_real(f)
    edges = np.linspace(region.lo[0], region.hi[0], bins + 1)
    args = [(f, region, cfg, c, edges) for c in range(cfg.chains)]
    if workers > 1 and cfg.chains > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chain, args))
    else:
        results = [_run_chain(a) for a in args]
    k = len(results)
    mean = sum(r.mean_count for r in results) / k
    err = math.sqrt(sum(r.stderr ** 2 for r in results)) / k
    hist = sum(r.histogram for r in results) / k
    return McResult(mean, err, hist, edges, results)


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    p_value: float
    dof: int
    passed: bool


def poisson_goodness_of_fit(samples: np.ndarray, mean: float, level: float = 1e-3,
                            min_expected: float = 5.0) -> GoodnessOfFit:
    """Chi-square test of integer samples against Poisson(mean); tail cells
    are merged until every expected count is at least ``min_expected``."""
    samples = np.asarray(samples)
    n = len(samples)
    kmax = int(max(samples.max(), stats.poisson.ppf(1 - 1e-12, mean)))
    probs = stats.poisson.pmf(np.arange(kmax + 1), mean)
    probs[-1] += stats.poisson.sf(kmax, mean)
    observed = np.bincount(samples, minlength=kmax + 1)[: kmax + 1].astype(float)
    exp_cells, obs_cells = [], []
    e_acc = o_acc = 0.0
    for e, o in zip(probs * n, observed):
        e_acc += e
        o_acc += o
        if e_acc >= min_expected:
            exp_cells.append(e_acc)
            obs_cells.append(o_acc)
            e_acc = o_acc = 0.0
    if exp_cells:
        exp_cells[-1] += e_acc
        obs_cells[-1] += o_acc
    exp_arr, obs_arr = np.array(exp_cells), np.array(obs_cells)
    stat, pval = stats.chisquare(obs_arr, exp_arr * obs_arr.sum() / exp_arr.sum())
    return GoodnessOfFit(float(stat), float(pval), len(exp_cells) - 1, bool(pval > level))


def detailed_balance_unit_checks(tol: float = 1e-12) -> bool:
    """Check pi(xi) q(xi -> xi') a(xi -> xi') = pi(xi') q(xi' -> xi) a(xi' -> xi)
    for births and deaths on hand-built small configurations."""
    vol = 1.0

    def pi(lam, p, pts):
        return lam ** len(pts) * math.prod(p.boltzmann_radial(math.dist(a, b))
                                           for i, a in enumerate(pts) for b in pts[i + 1:])

    def balanced(lam, p, pts, y):
        n = len(pts)
        b = _boltz(p, y, pts)
        forward = pi(lam, p, pts) / vol * birth_acceptance(lam, vol, b, n)
        after = pts + [y]
        backward = pi(lam, p, after) / (n + 1) * (death_acceptance(lam, vol, b, n + 1) if b > 0 else 0.0)
        return abs(forward - backward) <= tol * max(1.0, abs(forward))

    ideal = Potential.ideal(1)
    rods = Potential.hard_core(1, 0.5)
    soft = Potential.gaussian(1, 1.3, 0.4)
    checks = [
        balanced(lam, ideal, [], (0.3,)) for lam in (0.2, 1.0, 3.0)
    ] + [
        balanced(1.0, rods, [(0.2,)], (0.9,)),
        balanced(1.0, rods, [(0.2,)], (0.4,)),
        birth_acceptance(1.0, vol, _boltz(rods, (0.4,), [(0.2,)]), 1) == 0.0,
        balanced(0.7, soft, [(0.2,)], (0.5,)),
        balanced(2.5, soft, [(0.2,), (0.45,)], (0.3,)),
    ]
    return all(checks)
