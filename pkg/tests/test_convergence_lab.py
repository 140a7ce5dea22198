import math

import numpy as np
import pytest

from kaclab import kernels as K
from kaclab.convergence_lab import (VIOLATED_NOTE, EquilibriumSpec, HypothesisRefusal, RelaxationConfig,
                                    check_regime, degenerate_regime_check, doubling_gate, empirical_cf,
                                    run_relaxation, windowed_ks)
from kaclab.initial_data import Gaussian, Pareto, PointMass
from kaclab.stable_laws import StableParams


def test_regime_selection():
    rc = check_regime(K.kac(), Gaussian(1, 1))
    assert rc.ok and rc.regime == "quarter_turn" and rc.alpha == 2.0
    rc = check_regime(K.nonnegative_simplex(1.0), Pareto(1, 1, 1))
    assert rc.ok and rc.regime == "sufficiency"
    rc = check_regime(K.nonnegative_simplex(1.0), Pareto(1, 1, 2))
    assert "c1 = c2" in rc.failures
    rc = check_regime(K.kac(), Gaussian(0, 1), regime="sufficiency")
    assert "nonnegative support" in rc.failures


def test_equilibrium_mixture_cf():
    spec = EquilibriumSpec(1.0, StableParams(1.0, 0.0, 1.0), np.array([1.0, 1.0, 2.0]))
    xi = np.array([0.5, 1.0])
    assert np.allclose(spec.cf(xi), (2 * np.exp(-xi) + np.exp(-2 * xi)) / 3)


def test_empirical_cf_and_ks():
    v = np.random.default_rng(0).standard_normal(50_000)
    m, se = empirical_cf(v, np.array([0.0, 1.0]))
    assert m[0] == 1 and abs(m[1] - math.exp(-0.5)) < 4 * se[1]
    from scipy import stats
    xk = np.linspace(-2, 2, 101)
    assert windowed_ks(v, xk, stats.norm.cdf(xk)) < 0.01


def test_doubling_gate_trivial_for_simplex():
    assert doubling_gate(K.nonnegative_simplex(1.0), 1.0, n_big=32, ensemble=500)["passed"]


def test_refusal_and_override():
    cfg = RelaxationConfig(kernel="gauss-equal:0.25", initial="gaussian:0,1", t_list=(0.5,), replicates=2000,
                           n_big=32, ensemble=200)
    with pytest.raises(HypothesisRefusal):
        run_relaxation(cfg)
    cfg = RelaxationConfig(kernel="gauss-line:0.3", initial="gaussian:0,1", t_list=(0.5,), replicates=2000,
                           n_big=32, ensemble=200, regime="sufficiency", override=True)
    rep = run_relaxation(cfg)
    assert rep.annotation.startswith(VIOLATED_NOTE) and not rep.hypotheses_ok


def test_kac_small_relaxation_run():
    cfg = RelaxationConfig(kernel="kac", initial="gaussian:0,1", t_list=(1.0,), replicates=20_000,
                           n_big=64, ensemble=500, seed=5)
    rep = run_relaxation(cfg)
    row = rep.rows[0]
    assert rep.hypotheses_ok and row["cf_within"] and row["ks"] < row["ks_critical"]


def test_degenerate_check_needs_large_root():
    with pytest.raises(HypothesisRefusal):
        degenerate_regime_check(K.kac(), PointMass(1.0), replicates=100)
    kern = K.atoms([(0.55, 0.5, 0.5), (0.45, -0.25, 1.25)])
    rep = degenerate_regime_check(kern, PointMass(1.5), t_list=(0.5, 1.0), replicates=2000)
    assert rep.concentrates_at == "one" and all(r["v_all_equal_first"] for r in rep.rows)
