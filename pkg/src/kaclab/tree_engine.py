"""Probabilistic representation: Yule counts, McKean-tree weights, V_t and M_n.

The single-draw functions (``sample_yule_count``, ``grow_weights``,
``sample_velocity``) follow the definitions literally, keeping the ordered
leaf vector and an optional split log.  The bulk samplers feed a compiled
kernel that grows many trees per substream block; it appends the right child
at the end instead of splicing it next to its sibling, which leaves the law
of the leaf multiset (and hence of every symmetric statistic) unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .kernels import KernelModel
from .rng import BLOCK_SIZE, block_sizes, float_key, map_blocks, substream

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

# stream purpose tags
_TAG_VELOCITY = 11
_TAG_MASS = 12


class Sampler(Protocol):
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...


@dataclass
class LeafWeights:
    n: int
    betas: np.ndarray
    split_log: list | None = None


def sample_yule_count(t: float, rng: np.random.Generator) -> int:
    """Yule population at time t started from one individual."""
    return int(sample_yule_counts(t, rng, 1)[0])


def sample_yule_counts(t: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vector of independent Yule counts, one uniform each (inverse CDF)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    u = 1.0 - rng.random(size)  # in (0, 1]
    if t == 0:
        return np.ones(size, dtype=np.int64)
    log_q = math.log(-math.expm1(-t))
    return 1 + np.floor(np.log(u) / log_q).astype(np.int64)


def grow_weights(n: int, kernel: KernelModel, rng: np.random.Generator, log: bool = True) -> LeafWeights:
    """Run the beta recursion for n leaves.

    Split k (k = 1..n-1) picks a leaf uniformly among the k present and
    replaces it by the adjacent pair (beta L_k, beta R_k).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    u = rng.random(n - 1)
    L, R = kernel.sample(rng, n - 1)
    betas = [1.0]
    split_log = [] if log else None
    for k in range(1, n):
        i = min(int(u[k - 1] * k), k - 1)
        b = betas[i]
        betas[i:i + 1] = [b * L[k - 1], b * R[k - 1]]
        if log:
            split_log.append((i, (float(L[k - 1]), float(R[k - 1]))))
    return LeafWeights(n, np.asarray(betas), split_log)


def mass_stat(w: LeafWeights, alpha: float) -> float:
    """sum_j |beta_j|^alpha with exact (Shewchuk) summation."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return math.fsum(np.abs(w.betas) ** alpha)


def sample_velocity(t: float, kernel: KernelModel, initial: Sampler, rng: np.random.Generator) -> float:
    nu = sample_yule_count(t, rng)
    w = grow_weights(nu, kernel, rng, log=False)
    x = np.asarray(initial.sample(rng, nu), dtype=float)
    return math.fsum(w.betas * x)


# -- compiled core ------------------------------------------------------------

@njit(cache=True)
def _fsum_add(partials, npart, x):
    i = 0
    for j in range(npart):
        y = partials[j]
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo != 0.0:
            partials[i] = lo
            i += 1
        x = hi
    partials[i] = x
    return i + 1


@njit(cache=True)
def _fsum_total(partials, n):
    # correctly rounded total, same rule as math.fsum
    hi = 0.0
    if n > 0:
        n -= 1
        hi = partials[n]
        lo = 0.0
        while n > 0:
            x = hi
            n -= 1
            y = partials[n]
            hi = x + y
            yr = hi - x
            lo = y - yr
            if lo != 0.0:
                break
        if n > 0 and ((lo < 0.0 and partials[n - 1] < 0.0) or (lo > 0.0 and partials[n - 1] > 0.0)):
            y = lo * 2.0
            x = hi + y
            yr = x - hi
            if y == yr:
                hi = x
    return hi


@njit(cache=True)
def _grow_block(nu, u, L, R, x, alpha, want_v, out_v, out_mass, out_sum):
    nmax = 1
    for r in range(nu.shape[0]):
        if nu[r] > nmax:
            nmax = nu[r]
    beta = np.empty(nmax)
    partials = np.empty(128)
    off_s = 0
    off_x = 0
    for r in range(nu.shape[0]):
        n = nu[r]
        beta[0] = 1.0
        for k in range(1, n):
            i = int(u[off_s + k - 1] * k)
            if i >= k:
                i = k - 1
            b = beta[i]
            beta[i] = b * L[off_s + k - 1]
            beta[k] = b * R[off_s + k - 1]
        off_s += n - 1
        np_ = 0
        for j in range(n):
            np_ = _fsum_add(partials, np_, abs(beta[j]) ** alpha)
        out_mass[r] = _fsum_total(partials, np_)
        np_ = 0
        for j in range(n):
            np_ = _fsum_add(partials, np_, beta[j])
        out_sum[r] = _fsum_total(partials, np_)
        if want_v:
            np_ = 0
            for j in range(n):
                np_ = _fsum_add(partials, np_, beta[j] * x[off_x + j])
            out_v[r] = _fsum_total(partials, np_)
            off_x += n


def fsum_compiled(values: np.ndarray) -> float:
    """Exact sum through the compiled path (exposed for testing)."""
    p = np.empty(128)
    n = 0
    for v in np.asarray(values, dtype=float):
        n = _fsum_add(p, n, float(v))
    return float(_fsum_total(p, n))


@dataclass
class VelocitySample:
    t: float
    v: np.ndarray
    nu: np.ndarray
    mass_alpha: np.ndarray
    beta_sum: np.ndarray


def _velocity_block(t, kernel, initial, alpha, seed, block, size):
    rng = substream(seed, _TAG_VELOCITY, float_key(t), block)
    nu = sample_yule_counts(t, rng, size)
    n_split = int((nu - 1).sum())
    u = rng.random(n_split)
    L, R = kernel.sample(rng, n_split)
    x = np.asarray(initial.sample(rng, int(nu.sum())), dtype=float)
    v, mass, s = np.empty(size), np.empty(size), np.empty(size)
    _grow_block(nu, u, np.ascontiguousarray(L, dtype=float), np.ascontiguousarray(R, dtype=float),
                x, float(alpha), True, v, mass, s)
    return v, nu, mass, s


def simulate_velocities(t: float, kernel: KernelModel, initial: Sampler, replicates: int, seed: int,
                        alpha: float = 1.0, workers: int | None = None) -> VelocitySample:
    """Draw V_t for ``replicates`` independent trees.

    Replicate r lives in block r // BLOCK_SIZE, whose substream depends only
    on (seed, t, block), so results do not depend on ``workers``.
    """
    sizes = block_sizes(replicates)
    out = map_blocks(_velocity_block, [(t, kernel, initial, alpha, seed, b, s) for b, s in enumerate(sizes)], workers)
    if not out:
        e = np.empty(0)
        return VelocitySample(t, e, np.empty(0, dtype=np.int64), e, e)
    v, nu, m, s = (np.concatenate(parts) for parts in zip(*out))
    return VelocitySample(float(t), v, nu, m, s)


def _mass_block(kernel, alpha, n_big, seed, block, size):
    rng = substream(seed, _TAG_MASS, int(n_big), block)
    nu = np.full(size, n_big, dtype=np.int64)
    u = rng.random(size * (n_big - 1))
    L, R = kernel.sample(rng, size * (n_big - 1))
    mass, s = np.empty(size), np.empty(size)
    _grow_block(nu, u, np.ascontiguousarray(L, dtype=float), np.ascontiguousarray(R, dtype=float),
                np.empty(0), float(alpha), False, np.empty(size), mass, s)
    return mass


@dataclass
class MInfinity:
    values: np.ndarray
    n_big: int
    alpha: float

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def stderr(self) -> float:
        return float(self.values.std(ddof=1) / math.sqrt(self.values.size)) if self.values.size > 1 else math.nan


def sample_m_infinity(kernel: KernelModel, alpha: float, n_big: int = 2 ** 10, replicates: int = 10 ** 4,
                      seed: int = 0, workers: int | None = None) -> MInfinity:
    """Ensemble of sum |beta_j|^alpha over trees with exactly n_big leaves."""
    if n_big < 1:
        raise ValueError("n_big must be >= 1")
    sizes = block_sizes(replicates)
    parts = map_blocks(_mass_block, [(kernel, alpha, n_big, seed, b, s) for b, s in enumerate(sizes)], workers)
    return MInfinity(np.concatenate(parts) if parts else np.empty(0), int(n_big), float(alpha))


__all__ = [
    "BLOCK_SIZE", "LeafWeights", "MInfinity", "VelocitySample", "fsum_compiled", "grow_weights", "mass_stat",
    "sample_m_infinity", "sample_velocity", "sample_yule_count", "sample_yule_counts", "simulate_velocities",
]
