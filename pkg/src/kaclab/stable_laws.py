"""Stable characteristic functions, attraction parameters, sampling and CF inversion."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import levy_stable

from .cfgrid import CfGrid

DECAY_THRESHOLD = 1e-6


@dataclass(frozen=True)
class StableParams:
    """alpha-stable law with CF exp{i chi xi - k |xi|^alpha (1 - i gamma sgn(xi) omega(xi, alpha))}."""

    alpha: float
    chi: float = 0.0
    k: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError("alpha must lie in (0, 2]")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if not -1 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [-1, 1]")
        if self.alpha in (1.0, 2.0) and self.gamma != 0:
            raise ValueError("gamma must be 0 when alpha is 1 or 2")

    @property
    def degenerate(self) -> bool:
        """k = 0: the law is the point mass at chi."""
        return self.k == 0


def stable_cf(xi, p: StableParams):
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    if p.alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = np.where(a > 0, 2.0 / math.pi * np.log(np.where(a > 0, a, 1.0)), 0.0)
    else:
        omega = math.tan(math.pi * p.alpha / 2)
    expo = 1j * p.chi * xi - p.k * a ** p.alpha * (1 - 1j * p.gamma * np.sign(xi) * omega)
    out = np.exp(expo)
    return out if out.ndim else complex(out)


def attraction_params(alpha: float, c1: float = 0.0, c2: float = 0.0, m01: float = 0.0,
                      m02: float = math.nan, chi: float | None = None) -> StableParams:
    """Stable parameters of the limit attracting data with tail constants (c1, c2).

    For alpha = 2 only the mean m01 and second moment m02 matter.  For
    alpha = 1 the location is not determined by (c1, c2) alone; symmetric
    tails use chi = 0 and asymmetric ones need ``chi`` from the caller.
    """
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if alpha == 2:
        if not math.isfinite(m02):
            raise ValueError("alpha = 2 needs a finite second moment m02")
        return StableParams(2.0, 0.0, (m02 - m01 ** 2) / 2.0, 0.0)
    if c1 < 0 or c2 < 0:
        raise ValueError("tail constants must be nonnegative")
    total = c1 + c2
    if total == 0:
        warnings.warn("c1 + c2 = 0: degenerate limit (k = 0)", RuntimeWarning, stacklevel=2)
    if alpha == 1:
        if c1 != c2 and chi is None:
            raise ValueError("alpha = 1 with c1 != c2 needs an explicit chi")
        return StableParams(1.0, 0.0 if chi is None else float(chi), total * math.pi / 2.0, 0.0)
    k = math.pi * total / (2.0 * math.gamma(alpha) * math.sin(math.pi * alpha / 2.0))
    gamma = (c2 - c1) / total if total > 0 else 0.0
    return StableParams(float(alpha), 0.0, k, gamma)


def sample_stable(p: StableParams, rng: np.random.Generator, size: int | None = None):
    """Draws whose CF is ``stable_cf(., p)`` (Chambers-Mallows-Stuck, S1 form)."""
    n = 1 if size is None else size
    if p.degenerate:
        out = np.full(n, p.chi)
    else:
        z = levy_stable.rvs(p.alpha, p.gamma, size=n, random_state=rng)
        out = p.k ** (1.0 / p.alpha) * np.asarray(z, dtype=float) + p.chi
    return float(out[0]) if size is None else out


class Inversion(NamedTuple):
    cdf: np.ndarray
    budget: float
    decayed: bool


def _gil_pelaez(xi, phi, x, h):
    # trapezoid for F(x) = 1/2 - (1/pi) int_0^inf Im[e^{-i xi x} phi(xi)] / xi dxi
    F = np.empty(x.size)
    xr = xi[1:]
    for lo in range(0, x.size, 256):
        xs = x[lo:lo + 256, None]
        g = np.imag(np.exp(-1j * xr * xs) * phi[1:]) / xr
        g0 = 3 * g[:, 0] - 3 * g[:, 1] + g[:, 2]
        integral = h * (0.5 * g0 + g[:, :-1].sum(axis=1) + 0.5 * g[:, -1])
        F[lo:lo + 256] = 0.5 - integral / math.pi
    return F


def invert_cf_to_cdf(cf: CfGrid, x_grid, threshold: float = DECAY_THRESHOLD) -> Inversion:
    """CDF on ``x_grid`` from a tabulated CF.

    The budget adds the change between step h and 2h to the truncation
    term |phi(xi_max)| / pi.  The result is clipped into [0, 1] and made
    nondecreasing along the sorted grid.
    """
    x = np.asarray(x_grid, dtype=float)
    xi, phi = cf.half
    h = xi[1] - xi[0]
    F = _gil_pelaez(xi, phi, x.ravel(), h)
    F2 = _gil_pelaez(xi[::2], phi[::2], x.ravel(), 2 * h)
    tail = abs(phi[-1])
    decayed = tail <= threshold
    if not decayed:
        warnings.warn(f"CF has not decayed at the grid edge (|phi| = {tail:.3g}); "
                      "inverted CDF has reduced accuracy", RuntimeWarning, stacklevel=2)
    order = np.argsort(x.ravel(), kind="stable")
    Fs = np.clip(F[order], 0.0, 1.0)
    Fs = np.maximum.accumulate(Fs)
    F[order] = Fs
    budget = float(np.max(np.abs(F2 - F), initial=0.0) + tail / math.pi)
    return Inversion(F.reshape(x.shape), budget, decayed)
