import math

import numpy as np
import pytest

from hoppetree import limitdist
from hoppetree.core import make_stream
from hoppetree.montecarlo import ks_statistic

EULER = 0.5772156649015329


def test_toll_values():
    assert limitdist.toll(0.0) == 0.0
    assert limitdist.toll(1.0) == 1.0
    assert limitdist.toll(0.5) == pytest.approx(0.5 - math.log(2))
    # stationary point b = 1/(1+e) gives the minimum 1 - log(1+e)
    b = np.linspace(0, 1, 1001)
    low = 1 - math.log1p(math.e)
    assert np.all(limitdist.toll(b) >= low - 1e-15)
    assert limitdist.toll(1 / (1 + math.e)) == pytest.approx(low, abs=1e-15)


def test_beta_uniform_at_theta_one():
    x = np.sort(limitdist.sample_beta(1.0, make_stream(1), 100_000))
    assert ks_statistic(x, lambda v: v) <= 0.006


def test_beta_mean():
    x = limitdist.sample_beta(2.0, make_stream(2), 100_000)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - 1 / 3) <= 4 * se


def test_beta_inverse_cdf_pointwise():
    class Half:
        def random(self, size=None):
            return 0.5

    assert limitdist.sample_beta(1.0, Half()) == 0.5


def test_limit_moments():
    m, v = limitdist.limit_moments(1.0)
    assert m == pytest.approx(EULER - 1, abs=1e-13) and v == pytest.approx(2 - math.pi**2 / 6, abs=1e-13)
    m, v = limitdist.limit_moments(2.0)
    assert m == pytest.approx(EULER - 1.5, abs=1e-13)
    assert v == pytest.approx(2 / 3 - (math.pi**2 / 6 - 1.25), abs=1e-13)


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 5.0])
def test_mean_identity(theta):
    assert limitdist.mean_identity_residual(theta) <= 1e-3


def test_expected_toll_theta_one():
    # each entropy term integrates to -1/4 and b to 1/2
    assert limitdist.expected_toll(1.0) == pytest.approx(0.0, abs=1e-10)


def test_zero_iterations_gives_zeros():
    pop = limitdist.picard(1.0, 10_000, 0)
    assert pop.generation == 0 and np.all(pop.values == 0) and pop.mean == 0.0


def test_rejects_small_population():
    with pytest.raises(ValueError):
        limitdist.picard(1.0, 9_999)


@pytest.fixture(scope="module")
def theta_one():
    return limitdist.picard(1.0, 100_000, 40, seed=5)


def test_theta_one_moments(theta_one):
    m, v = limitdist.limit_moments(1.0)
    assert abs(theta_one.mean - m) <= 0.01
    assert abs(theta_one.variance - v) <= 0.02


def test_theta_two_moments_and_stages(theta_one):
    pop = limitdist.picard(2.0, 100_000, 40, seed=6, base=theta_one)
    m, v = limitdist.limit_moments(2.0)
    assert pop.base is theta_one and pop.theta == 2.0
    assert abs(pop.mean - m) <= 0.01
    assert abs(pop.variance - v) <= 0.02


def test_theta_two_builds_its_own_base():
    pop = limitdist.picard(2.0, 10_000, 30, seed=1)
    assert pop.base is not None and pop.base.theta == 1.0


def test_wrong_base_rejected(theta_one):
    other = limitdist.picard(2.0, 10_000, 5, seed=1, base=theta_one)
    with pytest.raises(ValueError):
        limitdist.picard(2.0, 10_000, 5, base=other)


def test_one_more_step_is_small(theta_one):
    nxt = limitdist.Population(
        limitdist._step(theta_one.values, theta_one.values, 1.0, make_stream(123), None), 0, 1.0
    )
    assert abs(nxt.mean - theta_one.mean) < 2e-3
    assert abs(nxt.variance - theta_one.variance) < 5e-3


def test_char_function_decays(theta_one):
    phi = limitdist.empirical_char_function(theta_one.values, [0.0, 5.0, 20.0])
    assert phi[0] == pytest.approx(1.0)
    assert phi[2] < phi[1] < 1.0
