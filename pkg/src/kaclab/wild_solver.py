"""Spectral solution through the truncated Wild series.

q_1 = phi_0 and, for n >= 2,

    q_n(xi) = 1/(n-1) sum_{j=1}^{n-1} E[ q_j(L xi) q_{n-j}(R xi) ],

with the expectation taken over the kernel's quadrature nodes.  The solution
is phi(t, xi) = sum_n e^{-t} (1 - e^{-t})^{n-1} q_n(xi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cfgrid import MODULUS_SLACK, CfGrid
from .kernels import KernelModel

N_TRUNC_CAP = 512
TARGET_LOG_BOUND = -18.4  # log(1e-8)

__all__ = ["CfGrid", "SpectralPathUnsupported", "WildResult", "default_n_trunc", "qn_sequence",
           "symmetrization_check", "wild_cf", "wild_weights"]


class SpectralPathUnsupported(ValueError):
    """The kernel can push arguments off the grid (|L| or |R| > 1); use the Monte Carlo path."""


class PreconditionError(ValueError):
    pass


def _check_kernel(kernel: KernelModel) -> None:
    if kernel.abs_bound() > 1.0 + 1e-12:
        raise SpectralPathUnsupported(
            f"kernel {kernel.spec()} allows |L| or |R| > 1; the spectral path needs both bounded by 1, "
            "use the Monte Carlo path (simulate) instead")


def qn_sequence(phi0: CfGrid, kernel: KernelModel, n_max: int, quad_nodes: int = 64) -> list[CfGrid]:
    """q_1, ..., q_{n_max} on the grid of ``phi0``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    _check_kernel(kernel)
    L, R, w = kernel.expectation_nodes(quad_nodes)
    xi_h, _ = phi0.half
    args_L = np.outer(L, xi_h)
    args_R = np.outer(R, xi_h)
    Q, G = args_L.shape
    A = np.empty((n_max, Q, G), dtype=complex)   # w * q_j(L xi)
    B = np.empty((n_max, Q, G), dtype=complex)   # q_j(R xi)
    grids = [phi0]
    A[0] = w[:, None] * phi0(args_L)
    B[0] = phi0(args_R)
    for n in range(2, n_max + 1):
        acc = np.einsum("jqg,jqg->g", A[:n - 1], B[n - 2::-1]) / (n - 1)
        grid = _from_half(phi0.xi, acc)
        grids.append(grid)
        if n < n_max:
            A[n - 1] = w[:, None] * grid(args_L)
            B[n - 1] = grid(args_R)
    return grids


def _from_half(xi: np.ndarray, half: np.ndarray) -> CfGrid:
    full = np.concatenate([np.conj(half[:0:-1]), half])
    return CfGrid(xi, full)


def default_n_trunc(t: float) -> int:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1
    return int(min(N_TRUNC_CAP, math.ceil(TARGET_LOG_BOUND / math.log(-math.expm1(-t)))))


def wild_weights(t: float, n_trunc: int) -> np.ndarray:
    """e^{-t} (1 - e^{-t})^{n-1} for n = 1..n_trunc."""
    q = -math.expm1(-t)
    return math.exp(-t) * q ** np.arange(n_trunc)


@dataclass
class WildResult:
    grid: CfGrid
    truncation_bound: float
    n_trunc: int
    weight_sum: float
    max_modulus: float = field(default=math.nan)


def wild_cf(t: float, phi0: CfGrid, kernel: KernelModel, n_trunc: int | None = None, quad_nodes: int = 64,
            qn: list[CfGrid] | None = None) -> WildResult:
    """phi(t, .) from the truncated Wild series, with the geometric truncation bound."""
    n_trunc = default_n_trunc(t) if n_trunc is None else int(n_trunc)
    if qn is None:
        qn = qn_sequence(phi0, kernel, n_trunc, quad_nodes)
    elif len(qn) < n_trunc:
        raise ValueError("precomputed q_n list shorter than n_trunc")
    wts = wild_weights(t, n_trunc)
    vals = np.zeros_like(phi0.values)
    for wn, g in zip(wts, qn):
        vals = vals + wn * g.values
    bound = float((-math.expm1(-t)) ** n_trunc)
    res = WildResult(CfGrid(phi0.xi, vals), bound, n_trunc, float(math.fsum(wts)))
    res.max_modulus = float(max(np.abs(g.values).max() for g in qn[:n_trunc]))
    if res.max_modulus > 1 + MODULUS_SLACK:
        raise ArithmeticError(f"|q_n| reached {res.max_modulus}; quadrature or grid too coarse")
    return res


@dataclass
class SymmetrizationReport:
    per_n: np.ndarray          # sup-grid |q_n(phi0) - q_n(Re phi0)|, n = 1..n_max
    max_discrepancy: float
    within_tol: bool
    phi_reale: dict            # t -> sup-grid discrepancy of the real-part identity
    tol: float


def symmetrization_check(phi0: CfGrid, kernel: KernelModel, n_max: int = 30, quad_nodes: int = 64,
                         tol: float = 1e-8, t_values=(0.5, 1.0, 2.0)) -> SymmetrizationReport:
    """Compare q_n built from phi0 and from Re phi0 (n >= 2), and the induced identity

    phi(t) = sum_n e^{-t}(1-e^{-t})^{n-1} q_n(Re phi0) + i Im phi0 e^{-t}.
    """
    if not kernel.quarter_turn_invariant:
        raise PreconditionError("symmetrization identity needs a quarter-turn invariant kernel")
    q_full = qn_sequence(phi0, kernel, n_max, quad_nodes)
    q_real = qn_sequence(phi0.real_part(), kernel, n_max, quad_nodes)
    per_n = np.array([0.0] + [float(np.abs(a.values - b.values).max()) for a, b in zip(q_full[1:], q_real[1:])])
    identity = {}
    for t in t_values:
        wts = wild_weights(t, n_max)
        lhs = sum(wn * g.values for wn, g in zip(wts, q_full))
        rhs = sum(wn * g.values for wn, g in zip(wts, q_real)) + 1j * phi0.values.imag * math.exp(-t)
        identity[float(t)] = float(np.abs(lhs - rhs).max())
    mx = float(per_n[1:].max()) if n_max > 1 else 0.0
    return SymmetrizationReport(per_n, mx, bool(mx <= tol), identity, tol)
