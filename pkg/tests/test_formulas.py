import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from hoppetree import formulas
from hoppetree.formulas import DiscreteDistribution


def _poisson_binomial(probs):
    """Exact pmf in rationals by repeated convolution."""
    pmf = [Fraction(1)]
    for p in probs:
        new = [Fraction(0)] * (len(pmf) + 1)
        for k, m in enumerate(pmf):
            new[k] += m * (1 - p)
            new[k + 1] += m * p
        pmf = new
    return pmf


def test_depth_moments_small():
    m = formulas.depth_moments(3.0, 2)
    assert (m.mean, m.variance) == (1.0, 0.0)
    m = formulas.depth_moments(1.0, 3)
    assert m.mean == pytest.approx(1.5) and m.variance == pytest.approx(0.25)
    assert formulas.depth_moments(2.0, 4).mean == pytest.approx(19 / 12)


def test_depth_pmf_small():
    assert formulas.depth_pmf_exact(1.0, 2).as_dict() == pytest.approx({1: 1.0})
    assert formulas.depth_pmf_exact(1.0, 3).as_dict() == pytest.approx({1: 0.5, 2: 0.5})
    assert formulas.depth_pmf_exact(1.0, 4).as_dict() == pytest.approx({1: 1 / 3, 2: 1 / 2, 3: 1 / 6})


@settings(max_examples=30, deadline=None)
@given(theta_num=st.integers(1, 20), theta_den=st.integers(1, 8), n=st.integers(2, 40))
def test_depth_pmf_matches_rational_convolution(theta_num, theta_den, n):
    theta = Fraction(theta_num, theta_den)
    exact = _poisson_binomial([1 / (theta + i) for i in range(1, n - 1)])
    law = formulas.depth_pmf_exact(float(theta), n)
    assert law.offset == 1
    assert np.max(np.abs(law.pmf - np.array([float(x) for x in exact]))) < 1e-13


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0.05, 50.0), n=st.integers(2, 3000))
def test_depth_pmf_moments_agree_with_closed_form(theta, n):
    law = formulas.depth_pmf_exact(theta, n)
    m = formulas.depth_moments(theta, n)
    assert law.total == pytest.approx(1.0, abs=1e-12)
    assert law.mean() == pytest.approx(m.mean, rel=1e-10)
    assert law.variance() == pytest.approx(m.variance, rel=1e-8, abs=1e-12)


def test_depth_pmf_size_limit():
    formulas.depth_pmf_exact(1.0, formulas.DEPTH_DP_MAX_N)
    with pytest.raises(ValueError):
        formulas.depth_pmf_exact(1.0, formulas.DEPTH_DP_MAX_N + 1)


def test_poisson_tv_at_two_nodes():
    assert formulas.depth_poisson_tv(1.0, 2) == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_poisson_tv_brute_force():
    theta, n = 1.0, 200
    law = formulas.depth_pmf_exact(theta, n)
    lam = formulas.depth_moments(theta, n).mean
    k = np.arange(0, 400)
    mine = np.zeros(k.size)
    mine[law.support] = law.pmf
    expected = 0.5 * np.abs(mine - poisson.pmf(k, lam)).sum()
    assert formulas.depth_poisson_tv(theta, n) == pytest.approx(expected, abs=1e-12)


def test_leaf_mean_examples():
    assert formulas.leaf_mean_exact(0.7, 2) == pytest.approx(1.0)
    assert formulas.leaf_mean_exact(2.0, 3) == pytest.approx(5 / 3)
    assert formulas.leaf_mean_exact(1.0, 10) == pytest.approx(5.0)


def test_leaf_variance_examples():
    assert formulas.leaf_var_exact(4.0, 2) == pytest.approx(0.0, abs=1e-15)
    assert formulas.leaf_var_exact(1.0, 3) == pytest.approx(0.25)
    assert formulas.leaf_var_exact(2.0, 3) == pytest.approx(2 / 9)


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_leaf_variance_near_linear(theta):
    for n in (10, 100, 1000):
        assert abs(formulas.leaf_var_exact(theta, n) - (theta + n - 1) / 12) * n <= 2


def test_leaf_tail_bound():
    assert formulas.leaf_tail_bound(1.0, 10, 1e-12) == pytest.approx(2.0)
    assert formulas.leaf_tail_bound(1.0, 10, math.sqrt(2)) == pytest.approx(2 * math.exp(-1))


def test_ipl_mean_examples():
    assert formulas.ipl_mean_exact(3.0, 1) == 0.0
    assert formulas.ipl_mean_exact(3.0, 2) == pytest.approx(1.0)
    assert formulas.ipl_mean_exact(1.0, 3) == pytest.approx(2.5)


def test_ipl_var_coefficient():
    assert formulas.ipl_var_coefficient(1.0) == pytest.approx(2 - math.pi**2 / 6, abs=1e-12)
    assert formulas.ipl_var_coefficient(2.0) == pytest.approx(2 / 3 - (math.pi**2 / 6 - 1.25), abs=1e-12)
    assert formulas.ipl_moments(1.0, 100).kind == "asymptotic"


def test_subtree_pmf_examples():
    assert formulas.subtree_pmf_exact(5.0, 2).as_dict() == pytest.approx({1: 1.0})
    assert formulas.subtree_pmf_exact(2.0, 3).as_dict() == pytest.approx({1: 2 / 3, 2: 1 / 3})


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0.05, 30.0), n=st.integers(2, 2000))
def test_subtree_pmf_normalized(theta, n):
    law = formulas.subtree_pmf_exact(theta, n)
    assert law.total == pytest.approx(1.0, abs=1e-10)
    assert law.support[0] == 1 and law.support[-1] == n - 1


def test_small_subtree_bound():
    assert formulas.small_subtree_bound(1.0, 0.1) == pytest.approx(0.6)
    assert formulas.small_subtree_bound(1.0, 0.0) == 0.0


def test_ancestor_stats():
    assert formulas.ancestor_stats(1.0, 2, 17)[0] == pytest.approx(0.5)
    assert formulas.ancestor_stats(2.5, 2, 3)[1] == pytest.approx(0.0)
    p, d = formulas.ancestor_stats(2.0, 3, 5)
    assert p == pytest.approx(0.25) and d == pytest.approx(0.25)


def test_height_band():
    assert formulas.height_band(math.exp(math.e)) == pytest.approx(math.e**2 - 1.5)
    assert formulas.height_band(10_000) == pytest.approx(21.70, abs=0.01)


@pytest.mark.parametrize(
    "call",
    [
        lambda: formulas.depth_moments(0.0, 5),
        lambda: formulas.depth_moments(1.0, 1),
        lambda: formulas.leaf_mean_exact(-1.0, 5),
        lambda: formulas.subtree_pmf_exact(1.0, 1),
        lambda: formulas.ancestor_stats(1.0, 1, 5),
        lambda: formulas.height_band(2),
    ],
)
def test_invalid_arguments(call):
    with pytest.raises(ValueError):
        call()


def test_distribution_helpers():
    d = DiscreteDistribution.from_masses({2: 0.25, 4: 0.75})
    assert d.offset == 2 and d.prob(3) == 0.0 and d.prob(4) == 0.75
    assert d.mean() == pytest.approx(3.5)
    assert d.variance() == pytest.approx(0.75)
    assert d.tv_distance(DiscreteDistribution(4, np.array([1.0]))) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        DiscreteDistribution(0, np.array([0.5, -0.1]))
