import math

import numpy as np
import pytest
from scipy import integrate, stats

from kaclab.initial_data import (AppendixBLaw, Cauchy, Gaussian, Pareto, PointMass, build_appendix_b, classify_sda,
                                 parse_initial, power_law_fourier, symmetrize, tail_functional)


@pytest.mark.parametrize("law", [Gaussian(0.5, 2.0), Pareto(1.5, 1.0, 2.0), Pareto(0.8, 0.5, 0.5, loc=1.0),
                                 Cauchy(0.3, 2.0), AppendixBLaw(1, 2, 2.5, 3, 1)])
def test_sampler_matches_cdf(law):
    x = law.sample(np.random.default_rng(11), 40_000)
    assert stats.kstest(x, law.cdf).pvalue > 1e-3


@pytest.mark.parametrize("law", [Gaussian(0.5, 2.0), Pareto(1.5, 1.0, 2.0), Cauchy(0.3, 2.0),
                                 AppendixBLaw(1, 2, 2.5, 3, 1), symmetrize(Pareto(1.2, 0.3, 1.0))])
def test_cf_matches_sample_average(law):
    xi = np.array([-2.0, -0.5, 0.25, 1.0, 3.0])
    x = law.sample(np.random.default_rng(12), 200_000)
    ecf = np.exp(1j * np.multiply.outer(xi, x)).mean(axis=1)
    assert np.abs(ecf - law.cf(xi)).max() < 0.01


@pytest.mark.parametrize("alpha", [0.7, 1.0, 1.5])
def test_power_law_fourier_against_quadrature(alpha):
    a, xi = 1.3, 2.1
    re = integrate.quad(lambda x: x ** (-alpha - 1), a, np.inf, weight="cos", wvar=xi)[0]
    im = integrate.quad(lambda x: x ** (-alpha - 1), a, np.inf, weight="sin", wvar=xi)[0]
    assert abs(power_law_fourier(a, xi, alpha) - (re + 1j * im)) < 1e-8


def test_symmetrize_is_idempotent_and_even():
    s = symmetrize(Pareto(1.2, 0.3, 1.0))
    assert symmetrize(s).spec == s.spec
    x = np.array([0.5, 2.0, 7.0])
    assert np.allclose(s.sf(x), s.cdf(-x))


def test_worked_appendix_b_case():
    with pytest.raises(ValueError):
        build_appendix_b(1, 2, 2.5, 2, 1)
    law = build_appendix_b(1, 2, 2.5, 2, 1, m_max=3, require_cdf=False)
    assert law.i.tolist() == [6.0, 36.0, 216.0] and law.s.tolist() == [2.0, 12.0, 72.0]


@pytest.mark.parametrize("bad", [(2, 1, 2.5, 3, 1), (1, 2, 3.5, 3, 1), (1, 2, 2.5, 0.5, 1), (1, 2, 2.5, 1.2, 1)])
def test_appendix_b_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        build_appendix_b(*bad)


def test_appendix_b_law_is_a_distribution():
    law = AppendixBLaw(1, 2, 2.5, 3, 1)
    x = np.linspace(-500, 500, 20001)
    F = law.cdf(x)
    assert np.all(np.diff(F) >= -1e-15) and F[0] >= 0 and F[-1] <= 1


def test_classifier_catalog():
    assert classify_sda(Pareto(1.5, 0.5, 2.0), 1.5).member is True
    c = classify_sda(Pareto(1.5, 0.5, 2.0), 1.5)
    assert (c.c1, c.c2) == (0.5, 2.0)
    c = classify_sda(Cauchy(0, 2), 1.0)
    assert c.member is True and c.c1 == c.c2 == 2 / math.pi
    assert classify_sda(Gaussian(0, 1), 2.0).member is True
    assert classify_sda(PointMass(1.0), 1.0).member is True
    assert classify_sda(AppendixBLaw(1, 2, 2.5, 3, 1), 1.0).member is False
    c = classify_sda(symmetrize(AppendixBLaw(1, 2, 2.5, 3, 1)), 1.0)
    assert c.member is True and c.c1 == pytest.approx(1.5, abs=1e-10)


def test_tail_functional_of_pareto_is_flat():
    tf = tail_functional(Pareto(1.0, 1.0, 3.0), 1.0)
    assert tf.stable and np.allclose(tf.upper[tf.x >= 4], 3.0) and np.allclose(tf.lower[tf.x >= 4], 1.0)


@pytest.mark.parametrize("spec", ["point:1.5", "gaussian:0,1", "pareto:1.5,1,2", "pareto:1,1,1,0.5",
                                  "cauchy:0,1", "appendixb:1,2,2.5,3,1", "sym:pareto:1,1,2"])
def test_parse_initial(spec):
    law = parse_initial(spec)
    assert np.isfinite(law.cdf(np.array([0.3]))).all()


def test_parse_initial_error_lists_grammar():
    with pytest.raises(ValueError, match="grammar"):
        parse_initial("uniform:0,1")
