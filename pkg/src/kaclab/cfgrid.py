"""Tabulated characteristic functions on symmetric uniform grids."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

MODULUS_SLACK = 1e-9


@dataclass
class CfGrid:
    """CF values on the nodes ``linspace(-xi_max, xi_max, 2**m + 1)``.

    Values are stored Hermitian-symmetrized and normalized to 1 at the origin.
    Off-node evaluation interpolates Re and Im with cubic splines built on the
    half grid [0, xi_max] and extends them by symmetry, so a kink of the CF at
    the origin (heavy-tailed laws) does not spoil the interpolant.
    """

    xi: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        n = xi.size
        if n < 5 or (n - 1) & (n - 2) or xi.shape != v.shape:
            raise ValueError("CfGrid needs 2**m + 1 nodes (m >= 2) with matching values")
        if not np.allclose(xi, -xi[::-1], rtol=0, atol=1e-12 * abs(xi[-1])) or not np.allclose(
                np.diff(xi), xi[1] - xi[0]):
            raise ValueError("CfGrid nodes must be symmetric and uniform")
        v = 0.5 * (v + np.conj(v[::-1]))
        mid = n // 2
        if v[mid].real > 0:
            v = v / v[mid].real
        v[mid] = 1.0
        self.xi, self.values = xi, v
        self._spline = None

    @classmethod
    def from_function(cls, f: Callable, xi_max: float = 64.0, m: int = 14) -> "CfGrid":
        xi = np.linspace(-xi_max, xi_max, 2 ** m + 1)
        return cls(xi, np.asarray(f(xi), dtype=complex))

    @property
    def xi_max(self) -> float:
        return float(self.xi[-1])

    @property
    def half(self) -> tuple[np.ndarray, np.ndarray]:
        mid = self.xi.size // 2
        return self.xi[mid:], self.values[mid:]

    def _splines(self):
        if self._spline is None:
            x, v = self.half
            self._spline = (CubicSpline(x, v.real), CubicSpline(x, v.imag))
        return self._spline

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        if np.any(ax > self.xi_max * (1 + 1e-12)):
            raise ValueError("evaluation point outside the CF grid")
        re, im = self._splines()
        return re(ax) + 1j * np.sign(x) * im(ax)

    def modulus_ok(self, slack: float = MODULUS_SLACK) -> bool:
        return bool(np.all(np.abs(self.values) <= 1 + slack))

    def real_part(self) -> "CfGrid":
        return CfGrid(self.xi.copy(), self.values.real.astype(complex))
