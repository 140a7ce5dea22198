import math

import numpy as np
import pytest

from kaclab import kernels as K
from kaclab.cfgrid import CfGrid
from kaclab.initial_data import Gaussian
from kaclab.wild_solver import (PreconditionError, SpectralPathUnsupported, default_n_trunc, qn_sequence,
                                symmetrization_check, wild_cf, wild_weights)


def _gauss_grid(mu=0.0, m=10, xi_max=12.0):
    return CfGrid.from_function(Gaussian(mu, 1.0).cf, xi_max, m)


def test_weights_sum_and_truncation():
    w = wild_weights(1.0, 200)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-15)
    assert default_n_trunc(0) == 1 and default_n_trunc(1.0) == 41


def test_point_kernel_recursion_by_hand():
    # L = R = 1/sqrt(2) with Gaussian data keeps q_n = exp(-xi^2/2)
    g = _gauss_grid(m=12)
    qn = qn_sequence(g, K.point_mass(2 ** -0.5, 2 ** -0.5), 6, 8)
    for q in qn:  # only spline interpolation error remains
        assert np.abs(q.values - np.exp(-g.xi ** 2 / 2)).max() < 1e-9


def test_kac_gaussian_is_stationary():
    g = _gauss_grid()
    res = wild_cf(1.0, g, K.kac())
    assert np.abs(res.grid.values - np.exp(-g.xi ** 2 / 2)).max() <= res.truncation_bound + 1e-7


def test_refuses_unbounded_kernels():
    with pytest.raises(SpectralPathUnsupported):
        qn_sequence(_gauss_grid(), K.point_mass(1.2, 0.3), 3)


def test_symmetrization_identity_small():
    rep = symmetrization_check(_gauss_grid(1.0), K.kac(), n_max=8)
    assert rep.within_tol and max(rep.phi_reale.values()) < 1e-8
    with pytest.raises(PreconditionError):
        symmetrization_check(_gauss_grid(1.0), K.nonnegative_simplex(1.0), n_max=3)
